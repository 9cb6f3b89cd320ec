#include "poisson/normalform.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace poisson {

namespace {

using ScalarFn = std::function<double(const Vec&)>;
using GradFn = std::function<Vec(const Vec&)>;
using MatFn = std::function<Mat(const Vec&)>;
using MapFn = std::function<Vec(const Vec&)>;

struct NumericFunction {
  ScalarFn value;
  GradFn gradient;
};

// Everything a level needs about the space it straightens.
struct LevelInput {
  int dim = 0;
  Vec center;
  MatFn bivector;
  std::vector<NumericFunction> p;
  std::vector<FieldFn> fields;  // X_{p_i}
  std::vector<MapFn> group;     // all element maps, identity included
  ChartOptions options;
};

double sup(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

Mat solve_or_throw(const Mat& a, const Mat& b, const char* what) {
  Eigen::FullPivLU<Mat> lu(a);
  if (!lu.isInvertible()) throw NumericalError(std::string(what) + ": singular system");
  return lu.solve(b);
}

// Newton on a square system with a user Jacobian; damped on divergence.
template <class Residual, class Jacobian>
Vec newton(Residual&& residual, Jacobian&& jacobian, Vec x, int iterations, double tol, const char* what) {
  Vec r = residual(x);
  for (int it = 0; it < iterations; ++it) {
    if (sup(r) <= tol) return x;
    const Vec dx = solve_or_throw(jacobian(x), -r, what);
    double lambda = 1.0;
    for (int k = 0; k < 12; ++k, lambda /= 2) {
      try {
        const Vec xn = x + lambda * dx;
        const Vec rn = residual(xn);
        if (sup(rn) < sup(r) || k == 11) {
          x = xn;
          r = rn;
          break;
        }
      } catch (const FlowError&) {
        if (k == 11) throw;
      }
    }
  }
  if (sup(r) <= tol) return x;
  throw NumericalError(std::string(what) + ": shooting did not converge");
}

class Level {
 public:
  virtual ~Level() = default;
  virtual Vec forward(const Vec& u) const = 0;
  virtual Vec inverse(const Vec& x) const = 0;
  virtual Mat center_z_block() const = 0;
};

class BaseLevel : public Level {
 public:
  BaseLevel(Vec center, MatFn bivector) : center_(std::move(center)), bivector_(std::move(bivector)) {}
  Vec forward(const Vec& u) const override { return center_ + u; }
  Vec inverse(const Vec& x) const override { return x - center_; }
  Mat center_z_block() const override { return bivector_(center_); }

 private:
  Vec center_;
  MatFn bivector_;
};

std::unique_ptr<Level> make_level(LevelInput in);

// One induction step: straightens (p_r, q_r) and recurses on the slice.
//
// Frobenius coordinates w = (t, σ) with x = Φ^{t_1}_{p_1}...Φ^{t_r}_{p_r}(m + E_F σ).
// There X_{p_i} = ∂/∂t_i and the bracket matrix depends on σ only, so it can
// be evaluated on the t = 0 plane without flowing.
class CjlLevel : public Level {
 public:
  explicit CjlLevel(LevelInput in) : in_(std::move(in)) {
    const int n = in_.dim;
    const int r = static_cast<int>(in_.p.size());
    r_ = r;
    Mat xm(n, r);
    for (int i = 0; i < r; ++i) xm.col(i) = in_.fields[i](in_.center);
    if (linalg::rank(xm) < r)
      throw PreconditionError("independent-fields", "Hamiltonian fields of P are dependent at the center");
    normals_ = linalg::column_space(xm);
    ef_ = linalg::axis_complement(xm, n - r);
    normal_system_ = normals_.transpose() * xm;

    last_ = r - 1;
    ew_ = Vec::Zero(n);
    ew_[last_] = 1.0;
    const Vec xq0 = xq_w(Vec::Zero(n));
    Mat pair(n, 2);
    pair << ew_, xq0;
    if (linalg::rank(pair) < 2) throw NumericalError("flow box: X_p and X_q dependent at the center");
    k_ = linalg::column_space(pair);
    e_ = linalg::axis_complement(pair, n - 2);
    k_system_ = Mat(2, 2);
    k_system_ << k_.transpose() * xq0, k_.transpose() * ew_;

    LevelInput sub;
    sub.dim = n - 2;
    sub.center = Vec::Zero(n - 2);
    sub.options = in_.options;
    sub.bivector = [this](const Vec& v) { return slice_bivector(v); };
    for (int i = 0; i < last_; ++i) {
      NumericFunction f;
      f.value = [this, i](const Vec& v) { return in_.p[i].value(ambient_on_s(e_ * v)); };
      f.gradient = [this, i](const Vec& v) { return Vec(e_.transpose() * grad_w(i, e_ * v)); };
      sub.p.push_back(f);
    }
    for (int i = 0; i < last_; ++i) {
      const NumericFunction f = sub.p[i];
      sub.fields.push_back([this, f](const Vec& v) { return Vec(slice_bivector(v).transpose() * f.gradient(v)); });
    }
    if (in_.group.size() > 1)
      for (const auto& g : in_.group)
        sub.group.push_back([this, g](const Vec& v) {
          const Vec w = frobenius_inverse(g(frobenius(e_ * v)));
          return flowbox_inverse(w).tail(in_.dim - 2).eval();
        });
    sub_ = make_level(std::move(sub));
  }

  Vec forward(const Vec& u) const override {
    const int n = in_.dim;
    const Index ia = 2 * last_, ib = ia + 1;
    Vec us(n - 2);
    us << u.head(ia), u.tail(n - ib - 1);
    const Vec v = sub_->forward(us);
    return frobenius(flowbox(u[ia], u[ib], v));
  }

  Vec inverse(const Vec& x) const override {
    const int n = in_.dim;
    const Vec abv = flowbox_inverse(frobenius_inverse(x));
    const Vec us = sub_->inverse(abv.tail(n - 2));
    const Index ia = 2 * last_;
    Vec u(n);
    u << us.head(ia), abv[0], abv[1], us.tail(n - 2 - ia);
    return u;
  }

  Mat center_z_block() const override { return sub_->center_z_block(); }

 private:
  Vec ambient_on_s(const Vec& w) const { return in_.center + ef_ * w.tail(in_.dim - r_); }

  Vec frobenius(const Vec& w) const {
    Vec y = ambient_on_s(w);
    for (int i = r_ - 1; i >= 0; --i) y = flow(in_.fields[i], y, w[i], in_.options.flow);
    return y;
  }

  Vec flow_back(const Vec& x, const Vec& t) const {
    Vec y = x;
    for (int i = 0; i < r_; ++i) y = flow(in_.fields[i], y, -t[i], in_.options.flow);
    return y;
  }

  // Frobenius flow times by Newton on the r normal components.
  Vec frobenius_inverse(const Vec& x) const {
    const Vec t0 = solve_or_throw(normal_system_, normals_.transpose() * (x - in_.center), "frobenius");
    const Vec t = newton(
        [&](const Vec& t) { return Vec(normals_.transpose() * (flow_back(x, t) - in_.center)); },
        [&](const Vec& t) {
          const Vec y = flow_back(x, t);
          Mat j(r_, r_);
          for (int i = 0; i < r_; ++i) j.col(i) = -normals_.transpose() * in_.fields[i](y);
          return j;
        },
        t0, in_.options.newton_iterations, in_.options.newton_tol, "frobenius");
    Vec w(in_.dim);
    w << t, ef_.transpose() * (flow_back(x, t) - in_.center);
    return w;
  }

  Mat bracket_w(const Vec& w) const {
    const Vec y = ambient_on_s(w);
    Mat j(in_.dim, in_.dim);
    for (int i = 0; i < r_; ++i) j.col(i) = in_.fields[i](y);
    j.rightCols(in_.dim - r_) = ef_;
    Eigen::PartialPivLU<Mat> lu(j);
    const Mat ji = lu.inverse();
    return ji * in_.bivector(y) * ji.transpose();
  }

  // Gradient of p_i in w-coordinates; independent of t.
  Vec grad_w(int i, const Vec& w) const {
    Vec g = Vec::Zero(in_.dim);
    g.tail(in_.dim - r_) = ef_.transpose() * in_.p[i].gradient(ambient_on_s(w));
    return g;
  }

  // Group average of t_r along the t = 0 plane (zero without a group).
  double q_shift(const Vec& sigma) const {
    if (in_.group.size() <= 1) return 0.0;
    Vec w = Vec::Zero(in_.dim);
    w.tail(in_.dim - r_) = sigma;
    const Vec y = ambient_on_s(w);
    double acc = 0;
    for (const auto& g : in_.group) acc += frobenius_inverse(g(y))[last_];
    return acc / static_cast<double>(in_.group.size());
  }

  double q_w(const Vec& w) const { return w[last_] + q_shift(w.tail(in_.dim - r_)); }

  Vec grad_q_w(const Vec& w) const {
    Vec g = ew_;
    if (in_.group.size() > 1) {
      const Vec sigma = w.tail(in_.dim - r_);
      const double h = 1e-6;
      for (Index k = 0; k < sigma.size(); ++k) {
        Vec sp = sigma, sm = sigma;
        sp[k] += h;
        sm[k] -= h;
        g[r_ + k] = (q_shift(sp) - q_shift(sm)) / (2 * h);
      }
    }
    return g;
  }

  Vec xq_w(const Vec& w) const { return bracket_w(w).transpose() * grad_q_w(w); }

  double p_w(const Vec& w) const { return in_.p[last_].value(ambient_on_s(w)); }

  Vec flowbox(double a, double b, const Vec& v) const {
    const Vec sigma = e_ * v;
    const double alpha = p_w(sigma) - a;
    const double beta = b - q_w(sigma);
    Vec w = flow([this](const Vec& s) { return xq_w(s); }, sigma, alpha, in_.options.flow);
    w[last_] += beta;
    return w;
  }

  // (a, b, v) of a point in w-coordinates.
  Vec flowbox_inverse(const Vec& w) const {
    const FieldFn xq = [this](const Vec& s) { return xq_w(s); };
    auto slide = [&](const Vec& ab) {
      Vec s = flow(xq, w, -ab[0], in_.options.flow);
      s[last_] -= ab[1];
      return s;
    };
    const Vec ab0 = solve_or_throw(k_system_, k_.transpose() * w, "flow box");
    const Vec ab = newton([&](const Vec& ab) { return Vec(k_.transpose() * slide(ab)); },
                          [&](const Vec& ab) {
                            Mat j(2, 2);
                            j << -k_.transpose() * xq(slide(ab)), -k_.transpose() * ew_;
                            return j;
                          },
                          ab0, in_.options.newton_iterations, in_.options.newton_tol, "flow box");
    Vec out(in_.dim);
    out << p_w(w), q_w(w), e_.transpose() * slide(ab);
    return out;
  }

  Mat slice_bivector(const Vec& v) const {
    const int n = in_.dim;
    const Vec sigma = e_ * v;
    Mat j(n, n);
    j << xq_w(sigma), ew_, e_;
    Eigen::PartialPivLU<Mat> lu(j);
    const Mat ji = lu.inverse();
    const Mat c = ji * bracket_w(sigma) * ji.transpose();
    const Mat h = c.bottomRightCorner(n - 2, n - 2);
    return (h - h.transpose()) / 2;
  }

  LevelInput in_;
  int r_ = 0, last_ = 0;
  Mat normals_, ef_, normal_system_;
  Vec ew_;
  Mat k_, e_, k_system_;
  std::unique_ptr<Level> sub_;
};

std::unique_ptr<Level> make_level(LevelInput in) {
  if (in.p.empty()) return std::make_unique<BaseLevel>(in.center, in.bivector);
  return std::make_unique<CjlLevel>(std::move(in));
}

struct LevelImpl : NumericChart::Impl {
  std::unique_ptr<Level> level;
  Vec forward(const Vec& u) const override { return level->forward(u); }
  Vec inverse(const Vec& x) const override { return level->inverse(x); }
  Mat center_z_block() const override { return level->center_z_block(); }
};

// Chart with z replaced by psi(z); the p, q part is untouched.
struct ReparamImpl : NumericChart::Impl {
  NumericChart base;
  MapFn psi;
  Mat dpsi0;
  Mat dpsi0_inverse;

  Vec psi_inverse(const Vec& y) const {
    Vec z = dpsi0_inverse * y;
    Mat jinv = dpsi0_inverse;
    for (int it = 0; it < 100; ++it) {
      const Vec r = psi(z) - y;
      if (sup(r) <= 1e-13) return z;
      if (it > 0 && it % 10 == 0)
        jinv = solve_or_throw(linalg::fd_jacobian(psi, z, 1e-6), Mat::Identity(z.size(), z.size()), "z-map");
      z -= jinv * r;
    }
    if (sup(psi(z) - y) <= 1e-10) return z;
    throw NumericalError("z-map: inversion did not converge");
  }

  Vec forward(const Vec& u) const override {
    const int pq = 2 * base.r();
    Vec v = u;
    v.tail(u.size() - pq) = psi_inverse(u.tail(u.size() - pq));
    return base.forward(v);
  }
  Vec inverse(const Vec& x) const override {
    Vec u = base.inverse(x);
    const int pq = 2 * base.r();
    u.tail(u.size() - pq) = psi(u.tail(u.size() - pq).eval());
    return u;
  }
  Mat center_z_block() const override { return dpsi0 * base.center_z_block() * dpsi0.transpose(); }
};

NumericChart reparametrize(const NumericChart& chart, MapFn psi) {
  auto impl = std::make_shared<ReparamImpl>();
  impl->base = chart;
  impl->psi = std::move(psi);
  const int s = chart.s();
  impl->dpsi0 = linalg::fd_jacobian(impl->psi, Vec::Zero(s), 1e-4);
  impl->dpsi0_inverse = solve_or_throw(impl->dpsi0, Mat::Identity(s, s), "z-map");
  NumericChart out(chart.center(), chart.r(), impl);
  out.box = chart.box;
  return out;
}

// Compiled numeric view of the ambient data.
struct CompiledPoisson {
  std::size_t n;
  std::vector<std::pair<std::pair<int, int>, CompiledExpr>> entries;

  explicit CompiledPoisson(const Bivector& pi) : n(pi.dim()) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const Expr e = pi.entry(i, j);
        if (!e.is_zero()) entries.push_back({{static_cast<int>(i), static_cast<int>(j)}, CompiledExpr(e)});
      }
  }
  Mat operator()(const Vec& x) const {
    Mat m = Mat::Zero(n, n);
    const std::span<const double> xs(x.data(), x.size());
    for (const auto& [ij, e] : entries) {
      const double v = e(xs);
      m(ij.first, ij.second) = v;
      m(ij.second, ij.first) = -v;
    }
    return m;
  }
};

NumericFunction compile_function(const Expr& f) {
  auto value = std::make_shared<CompiledExpr>(f);
  auto grads = std::make_shared<std::vector<CompiledExpr>>();
  for (std::size_t k = 0; k < f.nvars(); ++k) grads->emplace_back(f.derivative(k));
  return {[value](const Vec& x) { return (*value)(std::span<const double>(x.data(), x.size())); },
          [grads](const Vec& x) {
            Vec g(grads->size());
            for (std::size_t k = 0; k < grads->size(); ++k) g[k] = (*grads)[k](std::span<const double>(x.data(), x.size()));
            return g;
          }};
}

MapFn compile_map(const SymbolicMap& m) {
  auto comps = std::make_shared<std::vector<CompiledExpr>>();
  for (const auto& c : m.components) comps->emplace_back(c);
  return [comps](const Vec& x) {
    Vec y(comps->size());
    for (std::size_t k = 0; k < comps->size(); ++k) y[k] = (*comps)[k](std::span<const double>(x.data(), x.size()));
    return y;
  };
}

Vec to_vec(const Point& m) { return Eigen::Map<const Vec>(m.values.data(), m.size()); }

FunctionFamily centered(const FunctionFamily& p, const Point& m) {
  std::vector<Expr> shifted;
  for (const auto& f : p.functions()) {
    const double c = evaluate(f, m);
    shifted.push_back(c == 0.0 ? f : f - Expr::constant(p.chart(), Rational(c)));
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < p.size(); ++i) names.push_back(p.name(i));
  return FunctionFamily(p.chart(), shifted, names);
}

NumericChart build_chart(const Bivector& pi, const FunctionFamily& p, const Point& m, const ChartOptions& options,
                         const std::vector<MapFn>& group) {
  if (!same_chart(pi.chart(), p.chart()) || !same_chart(pi.chart(), m.chart)) throw ChartMismatch();
  if (2 * p.size() > pi.dim()) throw PreconditionError("independent-fields", "more functions than half the dimension");
  const auto inv = is_involutive(pi, p);
  if (!inv.involutive) throw PreconditionError("involutive", "P is not involutive");
  const FunctionFamily pc = centered(p, m);

  LevelInput in;
  in.dim = static_cast<int>(pi.dim());
  in.center = to_vec(m);
  in.bivector = [cp = std::make_shared<CompiledPoisson>(pi)](const Vec& x) { return (*cp)(x); };
  for (const auto& f : pc.functions()) {
    in.p.push_back(compile_function(f));
    auto field = std::make_shared<CompiledField>(hamiltonian_vf(pi, f));
    in.fields.push_back([field](const Vec& x) { return (*field)(x); });
  }
  in.group = group;
  in.options = options;
  auto impl = std::make_shared<LevelImpl>();
  impl->level = make_level(std::move(in));
  NumericChart chart(m, static_cast<int>(p.size()), impl);
  chart.box = options.box;
  return chart;
}

// Verify, halving the working box on flow failures.
void verify_in_box(const Bivector& pi, NumericChart& chart, const ChartOptions& options) {
  if (!options.verify) return;
  double box = options.box;
  for (int attempt = 0;; ++attempt) {
    chart.box = box;
    VerifyOptions vo;
    vo.half_width = std::min(vo.half_width, box / 2.5);
    try {
      chart.diagnostics = verify_chart(pi, chart, vo);
      return;
    } catch (const NumericalError&) {
      if (attempt >= 4) throw;
      box /= 2;
    }
  }
}

// Action of the group on the z-part of a chart at p = q = 0.
MapFn z_action(const NumericChart& chart, const MapFn& g) {
  return [chart, g](const Vec& z) {
    Vec u = Vec::Zero(chart.dim());
    u.tail(z.size()) = z;
    const Vec v = chart.inverse(g(chart.forward(u)));
    return v.tail(z.size()).eval();
  };
}

Mat snap(const Mat& a) {
  Mat out = a;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) {
      const Rational q = rationalize(a(i, j), 1e-7);
      if (q.get_den() <= 1000) out(i, j) = q.get_d();
    }
  return out;
}

struct Linearization {
  std::vector<Mat> matrices;
  MapFn phi;  // empty when the action is already linear
};

Linearization linearize_z(const NumericChart& chart, const std::vector<MapFn>& group, std::uint64_t seed) {
  const int s = chart.s();
  Linearization out;
  std::vector<MapFn> actions;
  for (const auto& g : group) {
    actions.push_back(z_action(chart, g));
    out.matrices.push_back(s ? snap(linalg::fd_jacobian(actions.back(), Vec::Zero(s), 1e-3)) : Mat(0, 0));
  }
  if (s == 0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-0.05, 0.05);
  double defect = 0;
  for (int k = 0; k < 6; ++k) {
    Vec z(s);
    for (Index i = 0; i < s; ++i) z[i] = uni(rng);
    for (std::size_t g = 0; g < actions.size(); ++g)
      defect = std::max(defect, sup(actions[g](z) - out.matrices[g] * z));
  }
  if (defect <= 1e-10) return out;
  std::vector<Mat> inverses;
  for (const auto& a : out.matrices) inverses.push_back(solve_or_throw(a, Mat::Identity(s, s), "bochner"));
  out.phi = [actions, inverses](const Vec& z) {
    Vec acc = Vec::Zero(z.size());
    for (std::size_t g = 0; g < actions.size(); ++g) acc += inverses[g] * actions[g](z);
    return Vec(acc / static_cast<double>(actions.size()));
  };
  return out;
}

}  // namespace

// ---------------------------------------------------------------- chart

NumericChart::NumericChart(Point center, int r, std::shared_ptr<const Impl> impl)
    : center_(std::move(center)), r_(r), impl_(std::move(impl)) {}

std::vector<std::string> NumericChart::coordinate_names() const {
  std::vector<std::string> names;
  for (int i = 1; i <= r_; ++i) {
    names.push_back("p" + std::to_string(i));
    names.push_back("q" + std::to_string(i));
  }
  for (int k = 1; k <= s(); ++k) names.push_back("z" + std::to_string(k));
  return names;
}

Vec NumericChart::forward(const Vec& u) const {
  if (sup(u) > box * (1 + 1e-9)) throw NumericalError("chart: point outside the working box");
  return impl_->forward(u);
}

Vec NumericChart::inverse(const Vec& x) const { return impl_->inverse(x); }

Mat NumericChart::bracket_matrix(const Bivector& pi, const Vec& u, double h) const {
  const Vec x = forward(u);
  const Mat j = linalg::fd_jacobian([this](const Vec& v) { return forward(v); }, u, h);
  const Mat ji = solve_or_throw(j, Mat::Identity(j.rows(), j.cols()), "chart Jacobian");
  return ji * pi.matrix(std::span<const double>(x.data(), x.size())) * ji.transpose();
}

ChartDiagnostics verify_chart(const Bivector& pi, const NumericChart& chart, const VerifyOptions& options) {
  ChartDiagnostics d;
  const int n = static_cast<int>(chart.dim());
  const int r = chart.r(), s = chart.s();
  const int axes = std::min(n, 4);
  const int per = options.points_per_axis;
  const double step = per > 1 ? 2 * options.half_width / (per - 1) : 0.0;
  d.half_width = options.half_width;

  int total = 1;
  for (int a = 0; a < axes; ++a) total *= per;
  std::vector<Mat> g(total);
  auto index_of = [&](const std::vector<int>& idx) {
    int k = 0;
    for (int a = axes - 1; a >= 0; --a) k = k * per + idx[a];
    return k;
  };
  auto delta = [](int i, int j) { return i == j ? 1.0 : 0.0; };

  std::vector<int> idx(axes, 0);
  for (int k = 0; k < total; ++k) {
    int rem = k;
    for (int a = 0; a < axes; ++a) {
      idx[a] = rem % per;
      rem /= per;
    }
    Vec u = Vec::Zero(n);
    for (int a = 0; a < axes; ++a) u[a] = -options.half_width + idx[a] * step;
    const Mat c = chart.bracket_matrix(pi, u, options.fd_step);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        d.pp = std::max(d.pp, std::abs(c(2 * i, 2 * j)));
        d.pq = std::max(d.pq, std::abs(c(2 * i, 2 * j + 1) - delta(i, j)));
        d.qq = std::max(d.qq, std::abs(c(2 * i + 1, 2 * j + 1)));
      }
      for (int z = 0; z < s; ++z) {
        d.pz = std::max(d.pz, std::abs(c(2 * i, 2 * r + z)));
        d.qz = std::max(d.qz, std::abs(c(2 * i + 1, 2 * r + z)));
      }
    }
    g[index_of(idx)] = c.bottomRightCorner(s, s);
    if (options.roundtrip) d.roundtrip = std::max(d.roundtrip, sup(chart.inverse(chart.forward(u)) - u));
    ++d.grid_points;
  }

  // ∂g/∂p_i and ∂g/∂q_i by central differences along grid lines
  if (s > 0 && per >= 3)
    for (int a = 0; a < std::min(axes, 2 * r); ++a)
      for (int k = 0; k < total; ++k) {
        int rem = k;
        for (int b = 0; b < axes; ++b) {
          idx[b] = rem % per;
          rem /= per;
        }
        if (idx[a] == 0 || idx[a] == per - 1) continue;
        auto up = idx, down = idx;
        ++up[a];
        --down[a];
        const double der = (g[index_of(up)] - g[index_of(down)]).cwiseAbs().maxCoeff() / (2 * step);
        (a % 2 == 0 ? d.dg_dp : d.dg_dq) = std::max(a % 2 == 0 ? d.dg_dp : d.dg_dq, der);
      }

  d.max_residual = std::max({d.pp, d.pq, d.qq, d.pz, d.qz, d.dg_dp, d.dg_dq});
  const Mat g0 = chart.center_z_block();
  d.center_z_norm = g0.size() ? g0.cwiseAbs().maxCoeff() : 0.0;
  d.rank_at_center = rank_at(pi, chart.center());
  d.rank_criterion = (d.center_z_norm <= 1e-9) == (d.rank_at_center == 2 * r);
  d.passed = d.max_residual <= options.tolerance && (!options.roundtrip || d.roundtrip <= 1e-8) && d.rank_criterion;
  return d;
}

NumericChart construct_cjl_chart(const Bivector& pi, const FunctionFamily& p, const Point& m,
                                 const ChartOptions& options) {
  NumericChart chart = build_chart(pi, p, m, options, {});
  verify_in_box(pi, chart, options);
  return chart;
}

EquivariantChart construct_equivariant_chart(const Bivector& pi, const FunctionFamily& p, const GroupAction& g,
                                             const Point& m, const EquivariantOptions& options) {
  if (!same_chart(g.chart(), pi.chart())) throw ChartMismatch();
  EquivariantChart out;
  const Vec mv = to_vec(m);
  std::vector<MapFn> maps;
  for (const auto& map : g.maps()) {
    maps.push_back(compile_map(map));
    if (sup(maps.back()(mv) - mv) > 1e-10) throw PreconditionError("fixed-point", "the center is not fixed by the group");
  }
  for (const auto& f : p.functions())
    if (!is_invariant(g, f)) throw PreconditionError("invariant-functions", "P is not invariant under the group");
  out.invariant_functions = true;

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uni(-options.chart.box, options.chart.box);
  std::vector<Point> samples;
  for (int k = 0; k < options.action_samples; ++k) {
    std::vector<double> x(m.values);
    for (auto& v : x) v += uni(rng);
    samples.emplace_back(m.chart, x);
  }
  const ActionCheck pc = preserves_poisson(g, pi, samples);
  out.poisson_action = pc.ok;
  out.poisson_residual = pc.residual;
  if (!pc.ok && options.require_poisson_action)
    throw PreconditionError("poisson-action", "the group does not act by Poisson maps");

  ChartOptions co = options.chart;
  co.verify = false;
  EquivariantChart lin = linearize_action(pi, build_chart(pi, p, m, co, maps), g, options);
  lin.poisson_action = out.poisson_action;
  lin.poisson_residual = out.poisson_residual;
  lin.invariant_functions = true;
  return lin;
}

EquivariantChart linearize_action(const Bivector& pi, NumericChart chart, const GroupAction& g,
                                  const EquivariantOptions& options) {
  EquivariantChart out;
  std::vector<MapFn> maps;
  for (const auto& map : g.maps()) maps.push_back(compile_map(map));
  const Linearization lin = linearize_z(chart, maps, options.seed);
  if (lin.phi) chart = reparametrize(chart, lin.phi);
  out.action_matrices = lin.matrices;
  if (chart.s() > 0)
    for (std::size_t a = 0; a < g.order(); ++a)
      for (std::size_t b = 0; b < g.order(); ++b)
        out.homomorphism_residual =
            std::max(out.homomorphism_residual,
                     (lin.matrices[g.product(a, b)] - lin.matrices[a] * lin.matrices[b]).cwiseAbs().maxCoeff());
  verify_in_box(pi, chart, options.chart);

  std::mt19937_64 rng(options.seed + 1);
  std::uniform_real_distribution<double> small(-options.action_half_width, options.action_half_width);
  for (int k = 0; k < options.action_samples; ++k) {
    Vec u(chart.dim());
    for (Index i = 0; i < u.size(); ++i) u[i] = small(rng);
    const Vec x = chart.forward(u);
    for (std::size_t e = 0; e < maps.size(); ++e) {
      const Vec v = chart.inverse(maps[e](x));
      Vec expected = u;
      expected.tail(chart.s()) = lin.matrices[e] * u.tail(chart.s());
      out.action_residual = std::max(out.action_residual, sup(v - expected));
    }
  }
  out.linear = out.action_residual <= 1e-8 && out.homomorphism_residual <= 1e-9;
  out.chart = chart;
  return out;
}

NumericChart foliate_chart(const NumericChart& chart, const FunctionFamily& f, int count) {
  const int s = chart.s();
  if (count <= 0 || s == 0) return chart;
  if (count > s) throw PreconditionError("foliated-pivot", "more foliation generators than z-coordinates");
  std::vector<NumericFunction> fs;
  for (const auto& e : f.functions()) fs.push_back(compile_function(e));
  auto restrict_f = [chart, fs](const Vec& z) {
    Vec u = Vec::Zero(chart.dim());
    u.tail(z.size()) = z;
    const Vec x = chart.forward(u);
    Vec out(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) out[i] = fs[i].value(x);
    return out;
  };
  const Mat grads = linalg::fd_jacobian(restrict_f, Vec::Zero(s), 1e-4);
  const std::vector<int> piv = linalg::pivot_rows(grads, count, 1e-6);
  if (static_cast<int>(piv.size()) < count)
    throw PreconditionError("foliated-pivot", "foliation generators are dependent on the slice");
  Mat chosen(count, s);
  for (int i = 0; i < count; ++i) chosen.row(i) = grads.row(piv[i]);
  const Mat comp = linalg::axis_complement(chosen.transpose(), s - count);
  const Vec base = restrict_f(Vec::Zero(s));
  return reparametrize(chart, [restrict_f, piv, comp, base, count, s](const Vec& z) {
    const Vec vals = restrict_f(z);
    Vec y(s);
    for (int i = 0; i < count; ++i) y[i] = vals[piv[i]] - base[piv[i]];
    y.tail(s - count) = comp.transpose() * z;
    return y;
  });
}

double flow_commutator(const Bivector& pi, const Expr& f, const Expr& g, const Point& x, double s, double t,
                       const FlowOptions& options) {
  const CompiledField xf(hamiltonian_vf(pi, f)), xg(hamiltonian_vf(pi, g));
  const FieldFn ff = [&](const Vec& v) { return xf(v); };
  const FieldFn fg = [&](const Vec& v) { return xg(v); };
  const Vec x0 = to_vec(x);
  const Vec a = flow(ff, flow(fg, x0, t, options), s, options);
  const Vec b = flow(fg, flow(ff, x0, s, options), t, options);
  return sup(a - b);
}

}  // namespace poisson
