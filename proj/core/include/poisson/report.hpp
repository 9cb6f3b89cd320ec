#pragma once

// Command reports: verdicts, residuals, witnesses and notes, emitted as
// text or as a JSON tree (schema in docs/report-schema.md).

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "poisson/linalg.hpp"

namespace poisson {

class Report {
 public:
  using Json = nlohmann::ordered_json;

  Report() : Report("", "") {}
  Report(std::string command, std::string model);

  void set_seed(std::uint64_t seed);
  /// `value` defaults to `pass`.
  void verdict(const std::string& name, bool pass, Json value = nullptr);
  void residual(const std::string& name, Json value);
  void witness(const std::string& name, Json value);
  void note(const std::string& text);
  /// kind is "parse", "precondition", "numerical" or "error".
  void error(const std::string& kind, const std::string& name, const std::string& message);

  bool has_error() const { return !root_["error"].is_null(); }
  bool all_pass() const;
  /// 2 on error, 1 when a verdict fails, 0 otherwise.
  int exit_code() const;

  /// Full tree including "exit_code".
  Json json() const;
  static Report from_json(std::string_view text);

  /// Doubles rounded to 12 significant digits.
  static Json num(double x);
  static Json vec(const Vec& v);
  static Json mat(const Mat& m);

 private:
  Json root_;
};

enum class ReportFormat { text, json };

std::string emit_report(const Report& report, ReportFormat format);

}  // namespace poisson
