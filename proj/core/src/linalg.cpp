#include "poisson/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace poisson::linalg {

namespace {

Eigen::JacobiSVD<Mat> svd_of(const Mat& a, unsigned options) { return Eigen::JacobiSVD<Mat>(a, options); }

int count_above(const Vec& sv, double rel_tol, double scale) {
  if (sv.size() == 0) return 0;
  const double top = std::max(sv.maxCoeff(), scale);
  if (top == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > rel_tol * top) ++r;
  return r;
}

}  // namespace

int rank(const Mat& a, double rel_tol, double scale) {
  if (a.size() == 0) return 0;
  return count_above(svd_of(a, 0).singularValues(), rel_tol, scale);
}

int skew_rank(const Mat& a, double rel_tol, double reference) {
  Mat m = a;
  if (m.size() == 0) return 0;
  const double scale = std::max(m.cwiseAbs().maxCoeff(), reference);
  if (m.size() == 0 || scale == 0.0) return 0;
  int r = 0;
  for (;;) {
    const Eigen::Index n = m.rows();
    if (n < 2) return r;
    Eigen::Index bi = 0, bj = 0;
    const double best = m.cwiseAbs().maxCoeff(&bi, &bj);
    if (best <= rel_tol * scale) return r;
    r += 2;
    // Schur complement on the 2x2 block {bi, bj}.
    const Eigen::Index i = std::min(bi, bj), j = std::max(bi, bj);
    std::vector<Eigen::Index> rest;
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != i && k != j) rest.push_back(k);
    const Eigen::Index nr = static_cast<Eigen::Index>(rest.size());
    Mat next(nr, nr);
    const double pij = m(i, j);
    for (Eigen::Index a1 = 0; a1 < nr; ++a1)
      for (Eigen::Index b1 = 0; b1 < nr; ++b1) {
        const Eigen::Index ka = rest[a1], kb = rest[b1];
        // [m_ka,i m_ka,j] * inv([[0, pij],[-pij, 0]]) * [m_i,kb; m_j,kb]
        const double t = (m(ka, i) * (-m(j, kb)) + m(ka, j) * m(i, kb)) / pij;
        next(a1, b1) = m(ka, kb) - t;
      }
    m = next;
  }
}

Mat kernel(const Mat& a, double rel_tol, double scale) {
  const Eigen::Index n = a.cols();
  if (a.rows() == 0) return Mat::Identity(n, n);
  auto svd = svd_of(a, Eigen::ComputeFullV);
  const int r = count_above(svd.singularValues(), rel_tol, scale);
  return svd.matrixV().rightCols(n - r);
}

Mat column_space(const Mat& a, double rel_tol, double scale) {
  if (a.cols() == 0) return Mat(a.rows(), 0);
  auto svd = svd_of(a, Eigen::ComputeFullU);
  const int r = count_above(svd.singularValues(), rel_tol, scale);
  return svd.matrixU().leftCols(r);
}

Vec principal_cosines(const Mat& u, const Mat& v) {
  if (u.cols() == 0 || v.cols() == 0) return Vec(0);
  Vec s = svd_of(u.transpose() * v, 0).singularValues();
  return s;
}

int intersection_dim(const Mat& u, const Mat& v, double threshold) {
  const Vec c = principal_cosines(u, v);
  int k = 0;
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (c[i] > 1.0 - threshold) ++k;
  return k;
}

std::vector<int> pivot_rows(const Mat& a, int limit, double rel_tol, double scale) {
  std::vector<int> chosen;
  if (a.rows() == 0 || a.cols() == 0) return chosen;
  const double top = std::max(a.rowwise().norm().maxCoeff(), scale);
  if (top == 0.0) return chosen;
  Mat basis(a.cols(), 0);  // orthonormal columns spanning chosen rows
  const int max_pick = limit < 0 ? static_cast<int>(a.rows()) : limit;
  while (static_cast<int>(chosen.size()) < max_pick) {
    int best = -1;
    double best_norm = 0.0;
    Vec best_res;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (std::find(chosen.begin(), chosen.end(), static_cast<int>(i)) != chosen.end()) continue;
      Vec res = a.row(i).transpose();
      if (basis.cols() > 0) res -= basis * (basis.transpose() * res);
      const double nr = res.norm();
      if (nr > best_norm * (1 + 1e-12) + 0.0 && nr > best_norm) {
        best = static_cast<int>(i);
        best_norm = nr;
        best_res = res;
      }
    }
    if (best < 0 || best_norm <= rel_tol * top) break;
    chosen.push_back(best);
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = best_res / best_norm;
  }
  return chosen;
}

Mat axis_complement(const Mat& a, int count) {
  const Eigen::Index n = a.rows();
  Mat basis = column_space(a);
  Mat out(n, 0);
  for (int k = 0; k < count; ++k) {
    int best = -1;
    double best_norm = 0.0;
    Vec best_res;
    for (Eigen::Index i = 0; i < n; ++i) {
      Vec res = Vec::Unit(n, i);
      if (basis.cols() > 0) res -= basis * (basis.transpose() * res);
      const double nr = res.norm();
      if (nr > best_norm + 1e-12) {
        best = static_cast<int>(i);
        best_norm = nr;
        best_res = res;
      }
    }
    if (best < 0 || best_norm < 1e-12) break;
    Vec unit = best_res / best_norm;
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = unit;
    out.conservativeResize(Eigen::NoChange, out.cols() + 1);
    out.col(out.cols() - 1) = unit;
  }
  return out;
}

double pfaffian(const Mat& a) {
  const Eigen::Index n = a.rows();
  if (n == 0) return 1.0;
  if (n % 2 == 1) return 0.0;
  if (n == 2) return a(0, 1);
  double total = 0.0;
  for (Eigen::Index j = 1; j < n; ++j) {
    if (a(0, j) == 0.0) continue;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 1; k < n; ++k)
      if (k != j) keep.push_back(k);
    Mat sub(n - 2, n - 2);
    for (Eigen::Index r = 0; r < n - 2; ++r)
      for (Eigen::Index c = 0; c < n - 2; ++c) sub(r, c) = a(keep[r], keep[c]);
    const double sign = (j % 2 == 1) ? 1.0 : -1.0;
    total += sign * a(0, j) * pfaffian(sub);
  }
  return total;
}

}  // namespace poisson::linalg
