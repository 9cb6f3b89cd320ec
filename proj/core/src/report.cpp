#include "poisson/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace poisson {

Report::Report(std::string command, std::string model) {
  root_["command"] = std::move(command);
  root_["model"] = std::move(model);
  root_["seed"] = 0;
  root_["convention"] =
      "{f,g} = sum_{i<j} pi_ij (d_i f d_j g - d_j f d_i g); X_f[g] = {f,g}; chart coordinates satisfy "
      "{p_i,q_j} = delta_ij, i.e. {q_i,p_j} = -delta_ij";
  root_["verdicts"] = Json::array();
  root_["residuals"] = Json::object();
  root_["witnesses"] = Json::object();
  root_["notes"] = Json::array();
  root_["error"] = nullptr;
}

void Report::set_seed(std::uint64_t seed) { root_["seed"] = seed; }

void Report::verdict(const std::string& name, bool pass, Json value) {
  Json v;
  v["name"] = name;
  v["pass"] = pass;
  v["value"] = value.is_null() ? Json(pass) : std::move(value);
  root_["verdicts"].push_back(std::move(v));
}

void Report::residual(const std::string& name, Json value) { root_["residuals"][name] = std::move(value); }

void Report::witness(const std::string& name, Json value) { root_["witnesses"][name] = std::move(value); }

void Report::note(const std::string& text) { root_["notes"].push_back(text); }

void Report::error(const std::string& kind, const std::string& name, const std::string& message) {
  root_["error"] = Json{{"kind", kind}, {"name", name}, {"message", message}};
}

bool Report::all_pass() const {
  for (const auto& v : root_["verdicts"])
    if (!v["pass"].get<bool>()) return false;
  return true;
}

int Report::exit_code() const {
  if (has_error()) return 2;
  return all_pass() ? 0 : 1;
}

Report::Json Report::json() const {
  Json out = root_;
  out["exit_code"] = exit_code();
  return out;
}

Report Report::from_json(std::string_view text) {
  Report r;
  r.root_ = Json::parse(text);
  r.root_.erase("exit_code");
  return r;
}

Report::Json Report::num(double x) {
  if (!std::isfinite(x)) return Json(std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf"));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  const double rounded = std::strtod(buf, nullptr);
  return Json(rounded == 0.0 ? 0.0 : rounded);
}

Report::Json Report::vec(const Vec& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

Report::Json Report::mat(const Mat& m) {
  Json a = Json::array();
  for (Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
  return a;
}

namespace {

std::string scalar(const Report::Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void flatten(std::ostringstream& os, const std::string& prefix, const std::string& key, const Report::Json& v) {
  if (v.is_object() && v.empty() && key.empty()) return;
  if (v.is_object() && !v.empty()) {
    for (const auto& [k, x] : v.items()) flatten(os, prefix, key.empty() ? k : key + "." + k, x);
    return;
  }
  os << prefix << ' ' << key << ": " << scalar(v) << '\n';
}

}  // namespace

std::string emit_report(const Report& report, ReportFormat format) {
  const Report::Json j = report.json();
  if (format == ReportFormat::json) return j.dump(2) + "\n";
  std::ostringstream os;
  os << "command: " << scalar(j["command"]) << '\n';
  if (!j["model"].get<std::string>().empty()) os << "model: " << scalar(j["model"]) << '\n';
  os << "seed: " << j["seed"].dump() << '\n';
  os << "convention: " << scalar(j["convention"]) << '\n';
  for (const auto& v : j["verdicts"])
    os << "verdict " << scalar(v["name"]) << ": " << scalar(v["value"]) << (v["pass"].get<bool>() ? "" : "  [FAIL]")
       << '\n';
  flatten(os, "residual", "", j["residuals"]);
  flatten(os, "witness", "", j["witnesses"]);
  for (const auto& n : j["notes"]) os << "note: " << scalar(n) << '\n';
  if (!j["error"].is_null())
    os << "error: " << scalar(j["error"]["kind"]) << ' ' << scalar(j["error"]["name"]) << ": "
       << scalar(j["error"]["message"]) << '\n';
  os << "exit: " << j["exit_code"].dump() << '\n';
  return os.str();
}

}  // namespace poisson
