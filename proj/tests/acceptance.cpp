// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "resbvp/cli.hpp"
#include "resbvp/conditions.hpp"
#include "resbvp/io.hpp"
#include "resbvp/linear.hpp"
#include "resbvp/oracle.hpp"
#include "resbvp/solver.hpp"
#include "resbvp/worked_example.hpp"
#include "support.hpp"

using namespace resbvp;

namespace {

struct Criterion {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Every solve made by the run, for the equivalence criterion.
struct Solved {
  std::string name;
  ProblemSpec spec;
  SolveResult result;
};
std::vector<Solved> g_solved;

const LinearAnalysis& example_analysis() {
  static const LinearAnalysis la = analyze(worked_example_spec());
  return la;
}

// Solves, records, and checks residuals plus the warm oracle confirmation.
void solve_and_confirm(Criterion& c, const std::string& name, const LinearAnalysis& la,
                       const ProblemSpec& spec, const ConditionReport& rep) {
  const BifurcationProblem bp = make_bifurcation_problem(la, spec, rep);
  const SolveResult r = solve(bp);
  g_solved.push_back({name, spec, r});
  const double rec = testing::sup_abs(recurrence_residual(spec, r.y));
  const double bc = testing::sup_abs(scalar_boundary_residual(spec, r.y));
  c.require(rec < 1e-9, name + ": recurrence residual " + num(rec));
  c.require(bc < 1e-9, name + ": boundary residual " + num(bc));
  const auto w = newton_solve(FullSystem(spec), r.y);
  c.require(w.has_value(), name + ": warm Newton did not converge");
  if (w) {
    c.require(w->iterations <= 3, name + ": warm Newton took " + std::to_string(w->iterations));
    c.require(testing::sup_abs(w->y - r.y) <= 1e-9, name + ": warm Newton moved the solution");
  }
}

Criterion golden() {
  Criterion c;
  const auto t0 = std::chrono::steady_clock::now();
  const LinearAnalysis la = analyze(worked_example_spec());
  const auto checks = worked_example_golden_checks(la);
  const SignSets s = sign_sets(la);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Mat lambda(2, 2);
  lambda << -1, -2, -1, -2;
  c.require((la.Lambda - lambda).cwiseAbs().maxCoeff() <= 1e-12, "Lambda differs");
  for (const auto& g : checks) c.require(g.passed, g.name + " error " + num(g.error));
  c.require(s.opp == std::vector<int>{2} && s.omm == std::vector<int>{3}, "O++/O-- differ");
  c.require(s.opm.empty() && s.omp.empty() && s.o0.empty(), "O+-, O-+ or O0 nonempty");
  c.require(secs < 1.0, "runtime " + num(secs) + " s");
  if (c.ok) c.detail = "Lambda, S, Psi tables and sign sets match; " + num(secs) + " s";
  return c;
}

Criterion end_to_end() {
  Criterion c;
  const LinearAnalysis& la = example_analysis();
  const LogFamily lf = log_family(la);
  const ProblemSpec spec = worked_example_spec(lf.g);
  const ConditionReport rep = certify_main(la, spec, 3.0, lf.d, Orientation::Standard);
  c.require(rep.passed, "check verdict " + rep.verdict());
  c.require(rep.cert.J1 > 0.0 && rep.cert.J2 < 0.0, "J1 > 0 > J2 violated");
  c.require(std::abs(lf.d - (std::exp(lf.gamma) * 4.0 - 1.0)) <= 1e-9 * lf.d, "d != e^gamma (1+c) - 1");
  if (rep.passed) solve_and_confirm(c, "log family", la, spec, rep);
  if (c.ok) {
    c.detail = "gamma = " + num(lf.gamma) + ", d = " + num(lf.d) + ", J1 = " + num(rep.cert.J1) +
               ", J2 = " + num(rep.cert.J2);
  }
  return c;
}

Criterion projections() {
  Criterion c;
  int instances = 0, image_tests = 0;
  for (int k = 0; k < 200; ++k) {
    const int n = 1 + k % 4;
    const int N = 3 + (k / 4) % 10;
    const ProblemSpec spec = random_resonant_instance(static_cast<std::uint64_t>(k), n, N);
    const LinearAnalysis la = analyze(spec);
    std::mt19937_64 rng(static_cast<std::uint64_t>(k) + 77);
    const std::string tag = "instance " + std::to_string(k) + ": ";
    for (int p = 0; p < 5; ++p) {
      const GridFunction x = testing::random_grid(rng, n, N + 1);
      const GridFunction h = testing::random_grid(rng, n, N);
      const GridFunction Px = project_P(la, x);
      const GridFunction Qh = project_Q(la, h);
      c.require((project_P(la, Px) - Px).norm() < 1e-12, tag + "P^2 != P");
      c.require((project_Q(la, Qh) - Qh).norm() < 1e-12, tag + "Q^2 != Q");
      c.require(apply_L(la, Px).norm() < 1e-11, tag + "L P != 0");
    }
    for (int p = 0; p < 10; ++p) {
      const GridFunction h = apply_L(la, testing::domain_element(spec, rng));
      const GridFunction x = right_inverse(la, spec, h);
      c.require((apply_L(la, x) - h).norm() < 1e-10, tag + "L M_p h != h");
      c.require(project_P(la, x).norm() < 1e-12, tag + "P M_p h != 0");
      const auto in = image_membership(la, h);
      const double ls = testing::least_squares_residual(spec, h);
      c.require(in.member == (ls < 1e-8), tag + "membership disagrees on an image element");
      const GridFunction off = testing::random_grid(rng, n, N);
      const auto out = image_membership(la, off);
      const double ls_off = testing::least_squares_residual(spec, off);
      c.require(out.member == (ls_off < 1e-8),
                tag + "membership disagrees (defect " + num(out.defect) + ", residual " +
                    num(ls_off) + ")");
      image_tests += 2;
    }
    ++instances;
  }
  if (c.ok) {
    c.detail = std::to_string(instances) + " instances, " + std::to_string(image_tests) +
               " membership comparisons";
  }
  return c;
}

Criterion nullity() {
  Criterion c;
  for (int k = 0; k < 200; ++k) {
    const ProblemSpec spec =
        random_resonant_instance(static_cast<std::uint64_t>(k), 1 + k % 4, 3 + (k / 4) % 10);
    const LinearAnalysis la = analyze(spec);
    int ker = 0;
    for (Eigen::Index i = 0; i < la.lambda_singular_values.size(); ++i) {
      if (la.lambda_singular_values(i) <= la.kernel_threshold) ++ker;
    }
    const int nl = linear_nullity(spec).nullity;
    c.require(ker == nl, "instance " + std::to_string(k) + ": dim Ker(Lambda) = " +
                             std::to_string(ker) + ", nullity = " + std::to_string(nl));
  }
  if (c.ok) c.detail = "200 instances agree";
  return c;
}

Criterion landesman_lazer() {
  Criterion c;
  const LinearAnalysis& la = example_analysis();
  // Express Psi in the basis with [Psi(2)]_n = 1 so the limits read directly.
  const LinearAnalysis scaled = rescale_basis(la, 1.0, 1.0 / la.psi_n()(2));
  const double pi = std::numbers::pi;
  const ProblemSpec spec = worked_example_spec(Expr::parse("atan(x)"));
  const ConditionReport rep = certify_landesman_lazer(scaled, spec, pi / 2, -pi / 2, 1.0);
  const double L1 = rep.values.at("L1"), L2 = rep.values.at("L2");
  c.require(rep.passed, "verdict " + rep.verdict());
  c.require(std::abs(L1 - pi) <= 1e-12 && std::abs(L2 + pi) <= 1e-12,
            "L1 = " + num(L1) + ", L2 = " + num(L2));
  if (rep.passed) solve_and_confirm(c, "arctan", scaled, spec, rep);
  if (c.ok) c.detail = "L1 = pi, L2 = -pi; solution verified";
  return c;
}

Criterion sturm_liouville() {
  Criterion c;
  SturmLiouville sl;
  sl.a = 0;
  sl.b = 8;
  sl.lambda = 2.0 - 2.0 * std::cos(std::numbers::pi / 9.0);
  sl.f = Expr::parse("sign(x)*abs(x)^(1/3)");
  const ProblemSpec spec = sturm_liouville_builder(sl);
  const LinearAnalysis la = analyze(spec);
  std::optional<ConditionReport> rep;
  for (double d = 2.0; d < 1e9 && !rep; d *= 2.0) {
    ConditionReport r = certify_same_sign(la, spec, 1.0, d);
    if (r.passed) rep = r;
  }
  c.require(rep.has_value(), "no same-sign certificate found");
  if (rep) {
    solve_and_confirm(c, "Sturm-Liouville", la, spec, *rep);
    if (c.ok) {
      c.detail = "certified with c = 1, d = " + num(rep->cert.d) + "; residual " +
                 num(g_solved.back().result.recurrence_residual);
    }
  }
  return c;
}

Criterion equivalence() {
  Criterion c;
  for (const auto& s : g_solved) {
    const double rec = testing::sup_abs(recurrence_residual(s.spec, s.result.y));
    const double bc = testing::sup_abs(scalar_boundary_residual(s.spec, s.result.y));
    c.require(rec <= 1e-9 && bc <= 1e-9, s.name + ": residuals " + num(rec) + ", " + num(bc));
  }
  // Oracle solutions of the certified log-family instance decomposed as alpha S + v.
  const LinearAnalysis& la = example_analysis();
  const LogFamily lf = log_family(la);
  const ProblemSpec spec = worked_example_spec(lf.g);
  const BifurcationProblem bp =
      make_bifurcation_problem(la, spec, certify_main(la, spec, 3.0, lf.d, Orientation::Standard));
  const FullSystem fs(spec);
  const auto sols = multistart(fs, 64, 2.0 * lf.d, 2024);
  c.require(!sols.empty(), "multistart found no solution");
  double worst_aux = 0.0, worst_bif = 0.0;
  for (const auto& sol : sols) {
    const GridFunction x = scalar_to_grid(sol.y, spec);
    const double alpha = la.u.dot(Vec(x[0])) / la.u.squaredNorm();
    const GridFunction v = x - la.S * alpha;
    worst_aux = std::max(worst_aux, (v - aux_map(bp, alpha, v)).norm());
    worst_bif = std::max(worst_bif, std::abs(bifurcation_value(bp, alpha, v)));
  }
  c.require(worst_aux <= 1e-8, "auxiliary equation defect " + num(worst_aux));
  c.require(worst_bif <= 1e-8, "bifurcation equation defect " + num(worst_bif));
  if (c.ok) {
    c.detail = std::to_string(g_solved.size()) + " solves; " + std::to_string(sols.size()) +
               " oracle solutions, defects " + num(worst_aux) + " / " + num(worst_bif);
  }
  return c;
}

Criterion negative_controls() {
  Criterion c;
  const LinearAnalysis& la = example_analysis();
  const ProblemSpec zero = worked_example_spec(Expr::parse("0"));
  const ConditionReport rz = certify_main(la, zero, 1.0, 10.0, Orientation::Standard);
  c.require(rz.verdict() == "FAIL(C2-strictness)", "g = 0 verdict " + rz.verdict());
  const SolveResult sz = solve(make_bifurcation_problem(la, zero, rz));
  c.require(sz.y.isZero() && sz.recurrence_residual == 0.0 && sz.boundary_residual == 0.0,
            "g = 0 solve is not the exact trivial solution");

  const AutoCertificate cubic =
      auto_certificate(la, worked_example_spec(Expr::parse("x^3")), default_c_grid(), 1e8);
  bool c3 = false;
  for (const auto& line : cubic.trace) c3 = c3 || line.find("FAIL(C3)") != std::string::npos;
  c.require(!cubic.report.has_value(), "x^3 was certified");
  c.require(c3, "x^3 trace has no C3 failure");

  bool not_resonant = false;
  try {
    (void)analyze(random_nonresonant_instance(5, 2, 6));
  } catch (const Error& e) {
    not_resonant = e.kind() == ErrorKind::NotResonant;
  }
  c.require(not_resonant, "nonresonant instance did not raise NotResonant");
  if (c.ok) c.detail = "FAIL(C2-strictness) + trivial solve; x^3 none via C3; NotResonant";
  return c;
}

Criterion determinism() {
  Criterion c;
  auto once = [](RunConfig cfg) {
    std::ostringstream out, err;
    (void)run(cfg, out, err);
    return out.str();
  };
  std::vector<RunConfig> configs;
  RunConfig ex;
  ex.command = "example5";
  configs.push_back(ex);
  for (const char* cmd : {"check", "solve", "oracle", "all"}) {
    RunConfig cfg;
    cfg.command = cmd;
    cfg.input_path = std::string(RESBVP_TEST_DATA) + "/atan.json";
    cfg.seed = 17;
    cfg.starts = 32;
    configs.push_back(cfg);
  }
  for (auto& cfg : configs) {
    cfg.json = true;
    const std::string a = once(cfg);
    const std::string b = once(cfg);
    c.require(!a.empty() && a == b, cfg.command + " output differs between runs");
  }
  if (c.ok) c.detail = std::to_string(configs.size()) + " JSON reports byte-identical";
  return c;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Criterion (*fn)();
  };
  const Entry criteria[] = {
      {"worked example golden values", golden},
      {"worked example end to end", end_to_end},
      {"projection suite", projections},
      {"kernel dimension vs nullity", nullity},
      {"reduction equivalence", equivalence},
      {"Landesman-Lazer arctan", landesman_lazer},
      {"Sturm-Liouville cube root", sturm_liouville},
      {"negative controls", negative_controls},
      {"determinism", determinism},
  };
  // The equivalence check (5) covers every solve, so it runs after 6 and 7.
  const int run_order[] = {0, 1, 2, 3, 5, 6, 4, 7, 8};
  Criterion results[9];
  for (int i : run_order) {
    try {
      results[i] = criteria[i].fn();
    } catch (const std::exception& e) {
      results[i].ok = false;
      results[i].detail = std::string("exception: ") + e.what();
    }
  }
  int failed = 0;
  for (int i = 0; i < 9; ++i) {
    std::printf("criterion %d %s: %s (%s)\n", i + 1, results[i].ok ? "PASS" : "FAIL",
                criteria[i].name, results[i].detail.c_str());
    failed += results[i].ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
