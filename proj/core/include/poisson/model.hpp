#pragma once

// Line-oriented model files.
//
//   [model]            name, coordinates, system, description
//   [bivector]         a, b = expression        ({a, b} = expression)
//   [functions]        name = expression
//   [points]           name = v1, v2, ...
//   [transversal T]    define = h1, h2, ...; base = point
//   [group G]          elements = e, g, ...; product.g = row; map.g = images
//   [two_form B]       a, b = expression
//
// '#' starts a comment. Function lists accept names or inline expressions.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "poisson/dirac.hpp"
#include "poisson/groups.hpp"

namespace poisson {

struct Model {
  std::string name;
  std::string description;
  std::string source;
  ChartPtr chart;
  Bivector pi;
  std::vector<std::pair<std::string, Expr>> functions;
  std::vector<std::string> system;
  std::vector<std::pair<std::string, Point>> points;
  std::vector<Transversal> transversals;
  std::vector<std::pair<std::string, GroupAction>> groups;
  std::vector<std::pair<std::string, TwoForm>> two_forms;

  /// Named function, or the expression parsed over the chart.
  Expr function(std::string_view name_or_expression) const;
  FunctionFamily family(const std::vector<std::string>& names_or_expressions) const;
  FunctionFamily system_family() const { return family(system); }
  /// Named point, or a comma-separated coordinate list.
  Point point(std::string_view name_or_values) const;
  const Transversal& transversal(std::string_view name) const;
  const GroupAction& group(std::string_view name) const;
  const TwoForm& two_form(std::string_view name) const;
};

/// Throws ParseError with a line-annotated message; the position is the byte
/// offset of the offending text.
Model parse_model(std::string_view text, std::string source = "<memory>");

/// Reads a file, or a shipped model when `path` is "builtin:NAME".
Model load_model(const std::string& path);

std::vector<std::string> builtin_models();
std::string_view builtin_model_text(std::string_view name);

}  // namespace poisson
