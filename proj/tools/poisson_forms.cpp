// poisson-forms: command-line front end over the core library.

#ifdef POISSON_CLI11_SINGLE_HEADER
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <iostream>
#include <map>

#include "poisson/cli.hpp"
#include "poisson/model.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Splitting charts and integrable-system checks for Poisson bivectors"};
  app.require_subcommand(0, 1);

  poisson::cli::Request request;
  std::string format = "text";
  std::uint64_t seed = 0;
  bool list_models = false;
  app.add_flag("--list-models", list_models, "List the shipped models (usable as builtin:NAME)");

  const std::map<std::string, std::string> help = {
      {"check-jacobi", "Exact Jacobi identity of the bivector"},
      {"check-involutive", "Exact pairwise involutivity of a family"},
      {"check-integrable", "Liouville integrability at a point"},
      {"check-f-regular", "dim(T F ∩ T S) = r' at a point"},
      {"transversal-induce", "Induced Poisson-Dirac structure and system on a transversal"},
      {"gauge", "Pointwise gauge transformation by a two-form"},
      {"normalize", "Numeric splitting chart (p, q, z) around a point"},
      {"split-test", "Split or non-split witness for the model's system"},
      {"paper-regression", "Run the full regression suite"}};
  for (const auto& name : poisson::cli::commands()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->callback([&request, name] { request.command = name; });
    if (name != "paper-regression") sub->add_option("model", request.model, "Model file or builtin:NAME")->required();
    sub->add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--seed", seed, "Seed for randomized checks (default: $POISSON_FORMS_SEED or 0)");
    if (name == "paper-regression" || name == "check-jacobi") continue;
    sub->add_option("--functions", request.functions, "Function names or expressions (default: the model's system)")
        ->delimiter(',');
    if (name == "check-involutive") continue;
    if (name == "transversal-induce") {
      sub->add_option("--transversal", request.transversal, "Transversal name")->required();
      sub->add_option("--points", request.points, "Point names or comma-separated coordinates");
      continue;
    }
    sub->add_option("--point", request.point, "Point name or comma-separated coordinates")->required();
    if (name == "gauge") sub->add_option("--two-form", request.two_form, "Two-form name")->required();
    if (name == "normalize") {
      sub->add_option("--group", request.group, "Group name for an equivariant chart");
      sub->add_flag("--split", request.split, "Foliated (split) chart generated by the system");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (list_models) {
    for (const auto& m : poisson::builtin_models()) std::cout << m << '\n';
    return 0;
  }
  if (request.command.empty()) {
    std::cerr << app.help();
    return 2;
  }
  for (const auto* sub : app.get_subcommands())
    if (sub->count("--seed") > 0) request.seed = seed;

  const poisson::Report report = poisson::cli::run(request);
  std::cout << poisson::emit_report(report, format == "json" ? poisson::ReportFormat::json
                                                             : poisson::ReportFormat::text);
  return report.exit_code();
}
