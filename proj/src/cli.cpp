#include "resbvp/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "resbvp/conditions.hpp"
#include "resbvp/io.hpp"
#include "resbvp/linear.hpp"
#include "resbvp/oracle.hpp"
#include "resbvp/solver.hpp"
#include "resbvp/worked_example.hpp"

namespace resbvp {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string list(const std::vector<int>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "}";
}

std::string vec(const Vec& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v(i));
  return s + ")";
}

std::string matrix(const Mat& M) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    s += i ? ", [" : "[";
    for (Eigen::Index j = 0; j < M.cols(); ++j) s += (j ? ", " : "") + num(M(i, j));
    s += "]";
  }
  return s + "]";
}

double require(const std::optional<double>& v, const char* flag) {
  if (!v) throw Error(ErrorKind::Input, std::string("missing required option ") + flag);
  return *v;
}

void validate(const RunConfig& cfg) {
  for (double tol : {cfg.rank_tol, cfg.sign_tol, cfg.strict_tol, cfg.solve_tol}) {
    if (!(tol > 0.0)) throw Error(ErrorKind::Input, "tolerances must be positive");
  }
  if (cfg.auto_search && (cfg.c || cfg.d)) {
    throw Error(ErrorKind::Input, "--auto is exclusive with --c/--d");
  }
  if (cfg.orientation != "standard" && cfg.orientation != "reversed" && cfg.orientation != "both") {
    throw Error(ErrorKind::Input, "--orientation must be standard, reversed or both");
  }
  if (cfg.starts < 1) throw Error(ErrorKind::Input, "--starts must be at least 1");
  if (cfg.box && !(*cfg.box > 0.0)) throw Error(ErrorKind::Input, "--box must be positive");
}

struct Session {
  const RunConfig& cfg;
  std::ostream& text;
  json doc = json::object();
  LinearOptions lopts;
  ConditionOptions copts;
  SolverOptions sopts;

  explicit Session(const RunConfig& c, std::ostream& t) : cfg(c), text(t) {
    lopts.rank_tol = cfg.rank_tol;
    copts.sign_tol = cfg.sign_tol;
    copts.strict_tol = cfg.strict_tol;
    sopts.solve_tol = cfg.solve_tol;
  }
  bool human() const { return !cfg.json; }
};

void print_analysis(Session& s, const LinearAnalysis& la) {
  s.doc["analysis"] = report_json(la);
  if (!s.human()) return;
  std::ostream& o = s.text;
  o << "Lambda = " << matrix(la.Lambda) << "\n";
  o << "singular values " << vec(la.lambda_singular_values) << ", kernel threshold "
    << num(la.kernel_threshold) << "\n";
  o << "u = " << vec(la.u) << "   w = " << vec(la.w) << "\n";
  o << "A_bar = " << num(la.A_bar) << " (probe lower estimate " << num(la.A_probe) << ")\n";
  o << "  t  S(t)                      Psi(t)\n";
  for (int t = 0; t <= la.N; ++t) {
    o << "  " << t << "  " << vec(la.S[t]);
    if (t < la.N) o << "   " << vec(la.Psi[t]);
    o << "\n";
  }
  for (const auto& w : la.warnings) o << "warning: " << w << "\n";
}

void print_report(Session& s, const ConditionReport& rep, const char* key = "conditions") {
  s.doc[key] = report_json(rep);
  if (!s.human()) return;
  std::ostream& o = s.text;
  const SignSets& st = rep.sets;
  o << "method " << rep.method << ": " << rep.verdict() << "\n";
  o << "O++ = " << list(st.opp) << "  O+- = " << list(st.opm) << "  O-+ = " << list(st.omp)
    << "  O-- = " << list(st.omm) << "  O0 = " << list(st.o0) << "\n";
  if (!st.ambiguous.empty()) o << "warning: ambiguous sign classification at " << list(st.ambiguous) << "\n";
  for (const auto& c : rep.checks) {
    o << "  " << (c.passed ? "✓ " : "✗ ") << c.name << "  " << num(c.lhs) << " vs "
      << num(c.rhs);
    if (!c.detail.empty()) o << "  (" << c.detail << ")";
    o << "\n";
  }
  const Certificate& ce = rep.cert;
  o << "c = " << num(ce.c) << "  d = " << num(ce.d) << "  orientation " << to_string(ce.orientation)
    << "\n";
  o << "s_max = " << num(ce.s_max) << "  s_min = " << num(ce.s_min) << "  ||g||_d = "
    << num(ce.g_sup_d) << "  A_bar = " << num(ce.A_bar) << "\n";
  o << "J1 = " << num(ce.J1) << "  J2 = " << num(ce.J2) << "  margin = " << num(ce.margin) << "\n";
  for (const auto& n : rep.notes) o << "note: " << n << "\n";
}

void print_solve(Session& s, const SolveResult& res) {
  s.doc["solve"] = report_json(res);
  if (!s.human()) return;
  std::ostream& o = s.text;
  o << "alpha = " << num(res.alpha) << " after " << res.bisection_steps << " bisection steps ("
    << res.aux_iterations << " auxiliary iterations)\n";
  o << "recurrence residual " << num(res.recurrence_residual) << ", boundary residual "
    << num(res.boundary_residual) << "\n";
  o << "y = " << vec(res.y) << "\n";
  for (const auto& n : res.notes) o << "note: " << n << "\n";
}

std::optional<Orientation> single_orientation(const RunConfig& cfg) {
  if (cfg.orientation == "standard") return Orientation::Standard;
  if (cfg.orientation == "reversed") return Orientation::Reversed;
  return std::nullopt;
}

ConditionReport main_at(Session& s, const LinearAnalysis& la, const ProblemSpec& spec, double c,
                        double d) {
  if (auto o = single_orientation(s.cfg)) return certify_main(la, spec, c, d, *o, s.copts);
  ConditionReport first = certify_main(la, spec, c, d, Orientation::Standard, s.copts);
  if (first.passed) return first;
  ConditionReport second = certify_main(la, spec, c, d, Orientation::Reversed, s.copts);
  return second.passed ? second : first;
}

// Runs the configured certification; always returns a report.
ConditionReport certify(Session& s, const LinearAnalysis& la, const ProblemSpec& spec) {
  const RunConfig& cfg = s.cfg;
  if (cfg.method == "main") {
    if (cfg.c && cfg.d) return main_at(s, la, spec, *cfg.c, *cfg.d);
    if (cfg.c || cfg.d) throw Error(ErrorKind::Input, "--c and --d must be given together");
    AutoCertificate ac = auto_certificate(la, spec, default_c_grid(), cfg.d_cap, s.copts);
    s.doc["auto_trace"] = ac.trace;
    if (s.human()) {
      s.text << "auto search: " << ac.trace.size() << " attempts"
             << (ac.report ? "" : ", none passed") << "\n";
      if (!ac.report) {
        for (const auto& line : ac.trace) s.text << "  " << line << "\n";
      }
    }
    if (ac.report) return *ac.report;
    if (ac.first_failure) return *ac.first_failure;
    throw Error(ErrorKind::Input, "empty search grid");
  }
  if (cfg.method == "same-sign") {
    return certify_same_sign(la, spec, require(cfg.c, "--c"), require(cfg.d, "--d"), s.copts);
  }
  if (cfg.method == "sublinear") {
    return certify_sublinear(la, spec, require(cfg.c, "--c"), require(cfg.M1, "--M1"),
                             cfg.M2.value_or(0.0), require(cfg.beta, "--beta"), s.copts);
  }
  if (cfg.method == "small-linear") {
    return certify_small_linear(la, spec, require(cfg.R, "--R"), require(cfg.M1, "--M1"),
                                cfg.M2.value_or(0.0), s.copts);
  }
  if (cfg.method == "landesman-lazer") {
    return certify_landesman_lazer(la, spec, require(cfg.g_plus, "--g-plus"),
                                   require(cfg.g_minus, "--g-minus"), cfg.R.value_or(1.0),
                                   s.copts);
  }
  throw Error(ErrorKind::Input, "unknown method '" + cfg.method + "'");
}

struct SolveOutcome {
  std::optional<SolveResult> result;
  int status = 0;
};

SolveOutcome certify_and_solve(Session& s, const LinearAnalysis& la, const ProblemSpec& spec) {
  SolveOutcome out;
  ConditionReport rep;
  if (spec.g().is_constant_zero()) {
    rep.method = "none (g vanishes)";
  } else {
    rep = certify(s, la, spec);
    print_report(s, rep);
    if (!rep.passed) {
      out.status = 1;
      return out;
    }
  }
  const BifurcationProblem bp = make_bifurcation_problem(la, spec, rep, s.sopts);
  out.result = solve(bp, s.sopts);
  print_solve(s, *out.result);
  if (!s.cfg.csv_path.empty()) write_csv(out.result->y, s.cfg.csv_path);
  const bool ok = out.result->recurrence_residual <= s.cfg.solve_tol &&
                  out.result->boundary_residual <= s.cfg.solve_tol;
  out.status = ok ? 0 : 3;
  return out;
}

int oracle_stage(Session& s, const ProblemSpec& spec, const SolveResult* warm_from) {
  const FullSystem fs(spec);
  NewtonOptions nopts;
  nopts.tol = s.cfg.solve_tol;
  const double box = s.cfg.box.value_or(10.0);
  const auto sols = multistart(fs, s.cfg.starts, box, s.cfg.seed, nopts);
  json rep = report_json(sols, fs);
  rep["starts"] = s.cfg.starts;
  rep["box"] = box;
  rep["seed"] = s.cfg.seed;
  int status = sols.empty() ? 1 : 0;
  if (s.human()) {
    s.text << "multistart: " << s.cfg.starts << " starts in [-" << num(box) << ", " << num(box)
           << "], seed " << s.cfg.seed << ": " << sols.size() << " distinct solutions\n";
    for (const auto& sol : sols) {
      s.text << "  start " << sol.start_index << ", " << sol.iterations << " iterations, residual "
             << num(sol.residual) << ": y = " << vec(sol.y) << "\n";
    }
  }
  if (warm_from) {
    const auto w = newton_solve(fs, warm_from->y, nopts);
    json wj{{"converged", w.has_value()}};
    if (w) {
      const double diff = (w->y - warm_from->y).cwiseAbs().maxCoeff();
      wj["iterations"] = w->iterations;
      wj["residual"] = w->residual;
      wj["distance_to_solver"] = diff;
      if (diff > 1e-9 || w->iterations > 3) status = 1;
      if (s.human()) {
        s.text << "warm start from the reduced solution: " << w->iterations
               << " Newton iterations, distance " << num(diff) << "\n";
      }
    } else {
      status = 1;
      if (s.human()) s.text << "warm start from the reduced solution did not converge\n";
    }
    rep["warm"] = wj;
  }
  s.doc["oracle"] = rep;
  return status;
}

int run_worked_example(Session& s) {
  const ProblemSpec base = worked_example_spec();
  const LinearAnalysis la = analyze(base, s.lopts);
  const auto checks = worked_example_golden_checks(la);
  const LogFamily lf = log_family(la, s.cfg.c.value_or(3.0), s.cfg.beta.value_or(0.5));
  const ProblemSpec spec = base.with_nonlinearity(lf.g);

  int status = 0;
  json golden = json::array();
  for (const auto& c : checks) {
    golden.push_back(json{{"name", c.name}, {"passed", c.passed}, {"error", c.error}});
    if (!c.passed) status = 1;
  }
  s.doc["golden"] = golden;
  s.doc["log_family"] = json{{"c", lf.c},   {"beta", lf.beta},   {"gamma", lf.gamma},
                             {"x_c", lf.x_c}, {"d", lf.d}, {"g", lf.g.str()}};
  const SignSets sets = sign_sets(la, s.copts.sign_tol, s.copts.ambiguity_factor);
  if (s.human()) {
    s.text << "Lambda = " << matrix(la.Lambda) << "\n";
    s.text << "O++ = " << list(sets.opp) << ", O-- = " << list(sets.omm) << ", O+- = "
           << list(sets.opm) << ", O-+ = " << list(sets.omp) << ", O0 = " << list(sets.o0) << "\n";
    for (const auto& c : checks) {
      s.text << "  " << (c.passed ? "✓ " : "✗ ") << c.name << " (error " << num(c.error)
             << ")\n";
    }
    s.text << "A_bar = " << num(la.A_bar) << "; log family c = " << num(lf.c) << ", beta = "
           << num(lf.beta) << ", gamma = " << num(lf.gamma) << ", d = " << num(lf.d) << "\n";
  }
  s.doc["analysis"] = report_json(la);

  const ConditionReport rep = certify_main(la, spec, lf.c, lf.d, Orientation::Standard, s.copts);
  print_report(s, rep);
  if (!rep.passed) return 1;
  const BifurcationProblem bp = make_bifurcation_problem(la, spec, rep, s.sopts);
  const SolveResult res = solve(bp, s.sopts);
  print_solve(s, res);
  if (!s.cfg.csv_path.empty()) write_csv(res.y, s.cfg.csv_path);
  if (res.recurrence_residual > s.cfg.solve_tol || res.boundary_residual > s.cfg.solve_tol) status = 3;

  const FullSystem fs(spec);
  NewtonOptions nopts;
  nopts.tol = s.cfg.solve_tol;
  const auto w = newton_solve(fs, res.y, nopts);
  json wj{{"converged", w.has_value()}};
  if (w) {
    const double diff = (w->y - res.y).cwiseAbs().maxCoeff();
    wj["iterations"] = w->iterations;
    wj["distance_to_solver"] = diff;
    if (diff > 1e-9 || w->iterations > 3) status = std::max(status, 1);
    if (s.human()) {
      s.text << "oracle warm start: " << w->iterations << " iterations, distance " << num(diff)
             << "\n";
    }
  } else {
    status = std::max(status, 1);
  }
  s.doc["oracle"] = json{{"warm", wj}};
  return status;
}

int dispatch(Session& s) {
  const RunConfig& cfg = s.cfg;
  validate(cfg);
  if (cfg.command == "example5") return run_worked_example(s);

  if (cfg.input_path.empty()) throw Error(ErrorKind::Input, "missing problem file");
  const ProblemSpec spec = load_problem(cfg.input_path);

  if (cfg.command == "oracle" && !cfg.warm) return oracle_stage(s, spec, nullptr);

  const LinearAnalysis la = analyze(spec, s.lopts);
  if (cfg.command == "analyze") {
    print_analysis(s, la);
    return 0;
  }
  if (cfg.command == "check") {
    const ConditionReport rep = certify(s, la, spec);
    print_report(s, rep);
    return rep.passed ? 0 : 1;
  }
  if (cfg.command == "solve") return certify_and_solve(s, la, spec).status;
  if (cfg.command == "oracle") {
    const SolveOutcome so = certify_and_solve(s, la, spec);
    if (!so.result) return so.status;
    return std::max(so.status, oracle_stage(s, spec, &*so.result));
  }
  if (cfg.command == "all") {
    print_analysis(s, la);
    const SolveOutcome so = certify_and_solve(s, la, spec);
    if (!so.result) return so.status;
    return std::max(so.status, oracle_stage(s, spec, &*so.result));
  }
  throw Error(ErrorKind::Input, "unknown command '" + cfg.command + "'");
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::ostringstream text;
  Session s(config, text);
  int status = 0;
  try {
    status = dispatch(s);
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    status = e.is_input_error() ? 2 : 3;
    s.doc["error"] = json{{"kind", to_string(e.kind())}, {"message", e.what()}};
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    status = 3;
    s.doc["error"] = json{{"kind", "Internal"}, {"message", e.what()}};
  }
  s.doc["command"] = config.command;
  s.doc["exit_code"] = status;

  const std::string payload = config.json ? dump(s.doc) + "\n" : text.str();
  if (config.out_path.empty()) {
    out << payload;
  } else {
    std::ofstream f(config.out_path);
    if (!f) {
      err << "error: InputError: cannot write '" << config.out_path << "'\n";
      return 2;
    }
    f << payload;
  }
  return status;
}

}  // namespace resbvp
