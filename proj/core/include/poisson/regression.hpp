#pragma once

// Reproducible regression suite over the shipped models: the two
// counterexamples, splitting charts, equivariance, averaging, transversal
// brackets and the core algebra identities.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "poisson/expr.hpp"
#include "poisson/report.hpp"

namespace poisson::regression {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  double seconds = 0;
  double limit_seconds = 0;
  std::string summary;
  Report::Json details;
};

constexpr int kCriteria = 6;

/// Runs criterion `id` (1..6). Failures inside a criterion are caught and
/// reported as a failed result with the message in `summary`.
CriterionResult run_criterion(int id, std::uint64_t seed = 0);
std::vector<CriterionResult> run_all(std::uint64_t seed = 0);

/// Random element of the expression class: up to `max_terms` terms
/// c x^a exp(L) with low degrees and linear exponents.
Expr random_expression(std::mt19937_64& rng, const ChartPtr& chart, int max_terms = 3, bool with_exp = true);

}  // namespace poisson::regression
