#include <CLI11.hpp>

#include <iostream>

#include "resbvp/cli.hpp"

namespace {

void common_flags(CLI::App* app, resbvp::RunConfig& cfg, bool needs_input) {
  if (needs_input) app->add_option("problem", cfg.input_path, "problem JSON file")->required();
  app->add_flag("--json", cfg.json, "emit a JSON report");
  app->add_option("--out", cfg.out_path, "write the report to a file");
  app->add_option("--tol-rank", cfg.rank_tol, "relative singular value threshold");
  app->add_option("--tol-sign", cfg.sign_tol, "relative sign threshold for the index sets");
  app->add_option("--tol-strict", cfg.strict_tol, "slack for strict inequalities");
  app->add_option("--tol-solve", cfg.solve_tol, "residual target of the solver");
}

void certificate_flags(CLI::App* app, resbvp::RunConfig& cfg) {
  auto* c = app->add_option("--c", cfg.c, "inner radius c");
  auto* d = app->add_option("--d", cfg.d, "outer radius d");
  auto* a = app->add_flag("--auto", cfg.auto_search, "search (c, d) over a grid (default when c, d absent)");
  a->excludes(c)->excludes(d);
  app->add_option("--d-cap", cfg.d_cap, "largest d tried by the search");
  app->add_option("--orientation", cfg.orientation, "standard, reversed or both")
      ->check(CLI::IsMember({"standard", "reversed", "both"}));
  app->add_option("--method", cfg.method,
                  "main, same-sign, sublinear, small-linear or landesman-lazer")
      ->check(CLI::IsMember({"main", "same-sign", "sublinear", "small-linear", "landesman-lazer"}));
  app->add_option("--M1", cfg.M1, "growth coefficient of |x|^beta");
  app->add_option("--M2", cfg.M2, "growth constant");
  app->add_option("--beta", cfg.beta, "growth exponent in (0, 1]");
  app->add_option("--R", cfg.R, "radius for the linear-growth and limit criteria");
  app->add_option("--g-plus", cfg.g_plus, "limit of g at +infinity");
  app->add_option("--g-minus", cfg.g_minus, "limit of g at -infinity");
  app->add_option("--csv", cfg.csv_path, "write (t, y) of the solution as CSV");
}

void oracle_flags(CLI::App* app, resbvp::RunConfig& cfg) {
  app->add_option("--starts", cfg.starts, "number of Newton starts")->capture_default_str();
  app->add_option("--box", cfg.box, "starts are uniform in [-box, box] (default 10)");
  app->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Existence checks and solutions for resonant multipoint difference BVPs"};
  app.require_subcommand(1);
  resbvp::RunConfig cfg;

  auto* analyze = app.add_subcommand("analyze", "linear analysis: Lambda, kernels, S, Psi, norm bound");
  common_flags(analyze, cfg, true);

  auto* check = app.add_subcommand("check", "verify the existence conditions");
  common_flags(check, cfg, true);
  certificate_flags(check, cfg);

  auto* solve = app.add_subcommand("solve", "certify, then solve the reduced equations");
  common_flags(solve, cfg, true);
  certificate_flags(solve, cfg);

  auto* oracle = app.add_subcommand(
      "oracle", "multistart Newton on the full system; distinct solutions are those more than "
                "1e-6 (1 + scale) apart in the sup norm");
  common_flags(oracle, cfg, true);
  certificate_flags(oracle, cfg);
  oracle_flags(oracle, cfg);
  oracle->add_flag("--warm", cfg.warm, "also solve and confirm the solution by a warm Newton start");

  auto* example = app.add_subcommand("example5", "built-in second-order three-point example");
  common_flags(example, cfg, false);
  example->add_option("--c", cfg.c, "inner radius of the log family (default 3)");
  example->add_option("--beta", cfg.beta, "slow growth rate (default 0.5)");
  example->add_option("--csv", cfg.csv_path, "write (t, y) of the solution as CSV");

  auto* all = app.add_subcommand("all", "analyze, check, solve and verify");
  common_flags(all, cfg, true);
  certificate_flags(all, cfg);
  oracle_flags(all, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  return resbvp::run(cfg, std::cout, std::cerr);
}
