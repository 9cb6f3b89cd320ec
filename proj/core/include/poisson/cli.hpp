#pragma once

// Command dispatch shared by the poisson-forms tool and the tests.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "poisson/report.hpp"

namespace poisson::cli {

struct Request {
  std::string command;
  std::string model;  // file path or builtin:NAME
  std::vector<std::string> functions;
  std::string point;
  std::vector<std::string> points;
  std::string transversal;
  std::string group;
  std::string two_form;
  bool split = false;
  std::optional<std::uint64_t> seed;
};

const std::vector<std::string>& commands();

/// Explicit seed, else POISSON_FORMS_SEED, else 0. Throws Error on a
/// malformed environment value.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag);

/// Runs a command. Library errors are captured in the report (exit 2).
Report run(const Request& request);

}  // namespace poisson::cli
