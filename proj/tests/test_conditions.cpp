#include <doctest.h>

#include <cmath>
#include <numbers>

#include "resbvp/conditions.hpp"
#include "resbvp/oracle.hpp"
#include "resbvp/worked_example.hpp"
#include "support.hpp"

using namespace resbvp;

namespace {

const LinearAnalysis& example_analysis() {
  static const LinearAnalysis la = analyze(worked_example_spec());
  return la;
}

ProblemSpec example_with(const std::string& g) { return worked_example_spec(Expr::parse(g)); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Input;
}

SturmLiouville dirichlet(int intervals, double lambda, const std::string& f) {
  SturmLiouville sl;
  sl.a = 0;
  sl.b = intervals - 1;
  sl.lambda = lambda;
  sl.f = Expr::parse(f);
  return sl;
}

double dirichlet_eigenvalue(int k, int intervals) {
  return 2.0 - 2.0 * std::cos(k * std::numbers::pi / intervals);
}

// First passing same-sign report over c = 1 and doubling d.
std::optional<ConditionReport> scan_same_sign(const LinearAnalysis& la, const ProblemSpec& spec) {
  for (double d = 2.0; d < 1e9; d *= 2.0) {
    ConditionReport rep = certify_same_sign(la, spec, 1.0, d);
    if (rep.passed) return rep;
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("sign sets of the worked example") {
  const SignSets s = sign_sets(example_analysis());
  CHECK(s.opp == std::vector<int>{2});
  CHECK(s.omm == std::vector<int>{3});
  CHECK(s.opm.empty());
  CHECK(s.omp.empty());
  CHECK(s.o0.empty());
  CHECK(s.o == std::vector<int>{2, 3});
  CHECK(s.c1());
}

TEST_CASE("sign sets partition the time indices") {
  for (int k = 0; k < 100; ++k) {
    const ProblemSpec spec = random_resonant_instance(4000 + k, 1 + k % 4, 3 + k % 10);
    const LinearAnalysis la = analyze(spec);
    const SignSets s = sign_sets(la);
    std::vector<int> seen(static_cast<std::size_t>(spec.N()), 0);
    for (const auto* set : {&s.opp, &s.opm, &s.omp, &s.omm, &s.o0, &s.ambiguous}) {
      for (int t : *set) seen[static_cast<std::size_t>(t)]++;
    }
    const double scale = s.psi_n.cwiseAbs().maxCoeff();
    for (int t = 0; t < spec.N(); ++t) {
      CHECK(seen[static_cast<std::size_t>(t)] <= 1);
      if (seen[static_cast<std::size_t>(t)] == 0) CHECK(std::abs(s.psi_n(t)) <= 1e-10 * scale);
    }
    for (int t : s.opp) CHECK((s.psi_n(t) > 0 && s.s_m(t) > 0));
    for (int t : s.opm) CHECK((s.psi_n(t) > 0 && s.s_m(t) < 0));
    for (int t : s.omp) CHECK((s.psi_n(t) < 0 && s.s_m(t) > 0));
    for (int t : s.omm) CHECK((s.psi_n(t) < 0 && s.s_m(t) < 0));
    CHECK(s.o.size() == s.opp.size() + s.opm.size() + s.omp.size() + s.omm.size());
  }
}

TEST_CASE("main conditions on the log family") {
  const LinearAnalysis& la = example_analysis();
  const LogFamily lf = log_family(la);
  const ProblemSpec spec = worked_example_spec(lf.g);
  const ConditionReport rep = certify_main(la, spec, lf.c, lf.d, Orientation::Standard);
  CHECK(rep.passed);
  CHECK(rep.verdict() == "PASS");
  const double gc = spec.g(2, lf.c);
  const double gmd = spec.g(3, -lf.d);
  CHECK(gc == doctest::Approx(lf.gamma * std::log1p(lf.c)));
  CHECK(gmd == doctest::Approx(lf.beta * std::log1p(lf.d)));
  const double psi2 = la.psi_n()(2);
  CHECK(rep.cert.J1 == doctest::Approx((gc - gmd) * psi2).epsilon(1e-12));
  CHECK(rep.cert.J2 == doctest::Approx((gmd - gc) * psi2).epsilon(1e-12));
  CHECK(rep.cert.J1 > 0.0);
  CHECK(rep.cert.J2 < 0.0);
  CHECK(rep.cert.g_sup_d == doctest::Approx(lf.gamma * std::log1p(lf.d)).epsilon(1e-12));

  const ConditionReport rev = certify_main(la, spec, lf.c, lf.d, Orientation::Reversed);
  CHECK_FALSE(rev.passed);
  CHECK(rev.failed == "C4");

  // Too small an outer radius breaks the growth inequality.
  const ConditionReport small = certify_main(la, spec, lf.c, 10.0, Orientation::Standard);
  CHECK(small.failed == "C3");

  CHECK(kind_of([&] { certify_main(la, spec, 5.0, 5.0, Orientation::Standard); }) == ErrorKind::Input);
  CHECK(kind_of([&] { certify_main(la, spec, 6.0, 5.0, Orientation::Standard); }) == ErrorKind::Input);
}

TEST_CASE("vanishing g cannot meet the strict inequalities") {
  const ConditionReport rep =
      certify_main(example_analysis(), example_with("0"), 1.0, 10.0, Orientation::Standard);
  CHECK_FALSE(rep.passed);
  CHECK(rep.failed == "C2-strictness");
  CHECK(rep.verdict() == "FAIL(C2-strictness)");
}

TEST_CASE("scaling g doubles the certificate constants exactly") {
  const LinearAnalysis& la = example_analysis();
  const char* gs[] = {"atan(x)", "x^3", "sin(x) + 0.1*x", "if(x < 0, -1, 2)"};
  for (const char* g : gs) {
    const ProblemSpec s1 = example_with(g);
    const ProblemSpec s2 = example_with(std::string("2*(") + g + ")");
    for (auto o : {Orientation::Standard, Orientation::Reversed}) {
      const ConditionReport r1 = certify_main(la, s1, 1.0, 50.0, o);
      const ConditionReport r2 = certify_main(la, s2, 1.0, 50.0, o);
      INFO(g);
      CHECK(r2.cert.g_sup_d == 2.0 * r1.cert.g_sup_d);
      CHECK(r2.cert.K1 == r1.cert.K1 * 2.0);
      CHECK(r2.cert.K2 == r1.cert.K2 * 2.0);
      CHECK(r2.cert.J1 == 2.0 * r1.cert.J1);
      CHECK(r2.cert.J2 == 2.0 * r1.cert.J2);
      CHECK(r2.checks.back().passed == r1.checks.back().passed);
    }
  }
}

TEST_CASE("basis rescaling leaves the verdicts unchanged") {
  const LinearAnalysis& la = example_analysis();
  const LogFamily lf = log_family(la);
  const ProblemSpec specs[] = {worked_example_spec(lf.g), example_with("atan(x)"), example_with("x^3"),
                               example_with("0")};
  for (const auto& spec : specs) {
    for (double mu_u : {0.25, 3.0}) {
      for (double mu_w : {0.5, 7.0}) {
        const LinearAnalysis r = rescale_basis(la, mu_u, mu_w);
        for (double d : {20.0, 500.0, lf.d}) {
          const ConditionReport a = certify_main(la, spec, 3.0, d, Orientation::Standard);
          const ConditionReport b = certify_main(r, spec, 3.0, d, Orientation::Standard);
          CHECK(a.verdict() == b.verdict());
          REQUIRE(a.checks.size() == b.checks.size());
          for (std::size_t i = 0; i < a.checks.size(); ++i) CHECK(a.checks[i].passed == b.checks[i].passed);
          CHECK(b.cert.J1 == doctest::Approx(mu_w * a.cert.J1));
          CHECK(b.cert.J2 == doctest::Approx(mu_w * a.cert.J2));
          CHECK(b.cert.s_max == doctest::Approx(mu_u * a.cert.s_max));
          CHECK(b.cert.s_min == doctest::Approx(mu_u * a.cert.s_min));
        }
      }
    }
  }
}

TEST_CASE("corrupted analyses") {
  LinearAnalysis zero_psi = example_analysis();
  zero_psi.Psi = zero_psi.Psi * 0.0;
  const SignSets empty = sign_sets(zero_psi);
  CHECK(empty.o.empty());
  CHECK(empty.c1());
  CHECK(kind_of([&] {
          certify_main(zero_psi, example_with("atan(x)"), 1.0, 10.0, Orientation::Standard);
        }) == ErrorKind::Degenerate);

  LinearAnalysis flat = example_analysis();
  flat.S[2](1) = 0.0;
  const SignSets s = sign_sets(flat);
  CHECK(s.o0 == std::vector<int>{2});
  CHECK_FALSE(s.c1());
  const ConditionReport rep = certify_main(flat, example_with("atan(x)"), 1.0, 10.0, Orientation::Standard);
  CHECK(rep.failed == "C1");

  LinearAnalysis blurred = example_analysis();
  blurred.S[2](1) = 1e-8;
  const SignSets b = sign_sets(blurred);
  CHECK(b.ambiguous == std::vector<int>{2});
  CHECK(certify_main(blurred, example_with("atan(x)"), 1.0, 10.0, Orientation::Standard).failed ==
        "C1-ambiguous");
}

TEST_CASE("same-sign criterion") {
  const int intervals = 9;
  const ProblemSpec spec =
      sturm_liouville_builder(dirichlet(intervals, dirichlet_eigenvalue(1, intervals),
                                        "sign(x)*abs(x)^(1/3)"));
  const LinearAnalysis la = analyze(spec);
  const auto rep = scan_same_sign(la, spec);
  REQUIRE(rep.has_value());
  CHECK(rep->method == "same-sign");

  const ProblemSpec positive = spec.with_nonlinearity(Expr::parse("x^2 + 1"));
  CHECK(certify_same_sign(la, positive, 1.0, 100.0).failed == "C3*");

  // The worked example is also sign aligned.
  const ConditionReport ex = certify_same_sign(example_analysis(), example_with("atan(x)"), 1.0, 1e4);
  CHECK(ex.passed);

  LinearAnalysis flat = example_analysis();
  flat.S[2](1) = 0.0;
  CHECK(certify_same_sign(flat, example_with("atan(x)"), 1.0, 1e4).failed == "C1*");

  // An instance whose products [Psi]_n [S]_m take both signs.
  bool found = false;
  for (int k = 0; k < 200 && !found; ++k) {
    const ProblemSpec r = random_resonant_instance(7000 + k, 2, 6);
    const LinearAnalysis lr = analyze(r);
    const SignSets s = sign_sets(lr);
    const bool mixed = (!s.opp.empty() || !s.omm.empty()) && (!s.opm.empty() || !s.omp.empty());
    if (!mixed) continue;
    found = true;
    CHECK(kind_of([&] {
            certify_same_sign(lr, r.with_nonlinearity(Expr::parse("atan(x)")), 1.0, 10.0);
          }) == ErrorKind::Inapplicable);
  }
  CHECK(found);
}

TEST_CASE("sublinear growth") {
  const LinearAnalysis& la = example_analysis();
  // With the computed norm bound the growth constant of 0.1 |x|^(1/2) is too large.
  CHECK(kind_of([&] {
          certify_sublinear(la, example_with("0.1*abs(x)^(1/2)*sign(x)"), 3.0, 0.1, 0.0, 0.5);
        }) == ErrorKind::Inapplicable);

  const ConditionReport rep =
      certify_sublinear(la, example_with("0.01*abs(x)^(1/2)*sign(x)"), 3.0, 0.01, 0.0, 0.5);
  CHECK(rep.passed);
  const double s_max = rep.cert.s_max, s_min = rep.cert.s_min;
  const double K1 = la.A_bar * 0.01;
  const double d_min = (3.0 * s_max + K1 * 0.5 * (s_max + s_min)) / (s_min - K1 * 0.5 * (s_max + s_min));
  CHECK(rep.values.at("d_min") == doctest::Approx(d_min).epsilon(1e-12));
  CHECK(rep.cert.d > d_min);

  // beta = 1 and K1 >= s_min / (s_min + s_max).
  const double M1 = s_min / ((s_min + s_max) * la.A_bar);
  CHECK(kind_of([&] { certify_sublinear(la, example_with("atan(x)"), 3.0, M1, 1.0, 1.0); }) ==
        ErrorKind::Inapplicable);

  // M1 = 0: the threshold no longer depends on beta and matches C3 with ||g||_d <= M2.
  const double M2 = std::numbers::pi / 2;
  const ConditionReport b1 = certify_sublinear(la, example_with("atan(x)"), 3.0, 0.0, M2, 0.3);
  const ConditionReport b2 = certify_sublinear(la, example_with("atan(x)"), 3.0, 0.0, M2, 0.9);
  CHECK(b1.values.at("d_min") == b2.values.at("d_min"));
  CHECK(b1.values.at("d_min") ==
        doctest::Approx((3.0 * s_max + la.A_bar * M2 * (s_max + s_min)) / s_min).epsilon(1e-12));

  // Envelope violated.
  const ConditionReport env = certify_sublinear(la, example_with("0.5*atan(x) + 0.02*x"), 3.0, 0.001, 0.1, 1.0);
  CHECK(env.failed == "C2**");
}

TEST_CASE("small linear growth") {
  const LinearAnalysis& la = example_analysis();
  const ConditionReport bounded = certify_small_linear(la, example_with("atan(x)"), 2.0, 0.0, 2.0);
  CHECK(bounded.passed);
  CHECK(bounded.values.at("growth_ratio") == 0.0);

  const SignSets s = sign_sets(la);
  const double s_max = s.s_m.cwiseAbs().maxCoeff();
  double s_min = INFINITY;
  for (int t : s.o) s_min = std::min(s_min, std::abs(s.s_m(t)));
  const double M1 = 1.5 * s_min / (la.A_bar * (s_max + s_min));
  CHECK(kind_of([&] { certify_small_linear(la, example_with("atan(x)"), 2.0, M1, 0.0); }) ==
        ErrorKind::Inapplicable);

  const ConditionReport lin = certify_small_linear(la, example_with("0.001*x + atan(x)"), 2.0, 0.001, 2.0);
  CHECK(lin.passed);
  CHECK(std::isfinite(lin.cert.d));
}

TEST_CASE("Landesman-Lazer criterion") {
  const LinearAnalysis& la = example_analysis();
  const double pi = std::numbers::pi;
  const ConditionReport rep =
      certify_landesman_lazer(la, example_with("atan(x)"), pi / 2, -pi / 2, 1.0);
  CHECK(rep.passed);
  const double psi2 = la.psi_n()(2);
  CHECK(rep.values.at("sum_psi_s_pos") == doctest::Approx(psi2));
  CHECK(rep.values.at("sum_psi_s_neg") == doctest::Approx(-psi2));
  CHECK(rep.values.at("L1") == doctest::Approx(pi * psi2));
  CHECK(rep.values.at("L2") == doctest::Approx(-pi * psi2));
  bool eps_tables = false;
  for (const auto& c : rep.checks) {
    if (c.name == "eps-tables") eps_tables = c.passed;
  }
  CHECK(eps_tables);

  const ConditionReport zero =
      certify_landesman_lazer(la, example_with("x/(1+x^2)"), 0.0, 0.0, 1.0);
  CHECK_FALSE(zero.passed);
  CHECK(zero.failed == "H4");

  CHECK(kind_of([&] {
          certify_landesman_lazer(la, example_with("atan(x) + 0.1*t"), pi / 2, -pi / 2, 1.0);
        }) == ErrorKind::Input);
  CHECK(kind_of([&] { certify_landesman_lazer(la, example_with("atan(x)"), 1.0, -1.0, 1.0); }) ==
        ErrorKind::Input);

  const ConditionReport reversed =
      certify_landesman_lazer(la, example_with("-atan(x)"), -pi / 2, pi / 2, 1.0);
  CHECK(reversed.passed);
  CHECK(reversed.cert.orientation == Orientation::Reversed);
}

TEST_CASE("automatic (c, d) search") {
  const LinearAnalysis& la = example_analysis();
  const LogFamily lf = log_family(la);
  const AutoCertificate found = auto_certificate(la, worked_example_spec(lf.g), default_c_grid(), 1e8);
  REQUIRE(found.report.has_value());
  CHECK(found.report->passed);
  // Any passing pair satisfies the growth inequality it reports.
  CHECK(found.report->cert.d > found.report->values.at("c3_rhs"));

  const AutoCertificate cubic = auto_certificate(la, example_with("x^3"), default_c_grid(), 1e8);
  CHECK_FALSE(cubic.report.has_value());
  bool saw_c3 = false;
  for (const auto& line : cubic.trace) saw_c3 = saw_c3 || line.find("FAIL(C3)") != std::string::npos;
  CHECK(saw_c3);

  const AutoCertificate one = auto_certificate(la, example_with("1"), default_c_grid(), 1e8);
  CHECK_FALSE(one.report.has_value());

  const AutoCertificate linear = auto_certificate(la, example_with("0.001*x"), default_c_grid(), 1e8);
  CHECK(linear.report.has_value());

  // Deterministic regardless of thread scheduling.
  const AutoCertificate again = auto_certificate(la, example_with("x^3"), default_c_grid(), 1e8);
  CHECK(again.trace == cubic.trace);
}

TEST_CASE("Sturm-Liouville builder") {
  const int intervals = 9;
  SturmLiouville sl = dirichlet(intervals, dirichlet_eigenvalue(1, intervals), "x");
  const ProblemSpec spec = sturm_liouville_builder(sl);
  CHECK(spec.n() == 2);
  CHECK(spec.m() == 2);
  CHECK(spec.N() == intervals);
  // Pure Dirichlet rows: one nonzero entry each.
  CHECK(spec.B().front()(0, 0) == 1.0);
  CHECK(spec.B().front().cwiseAbs().sum() == 1.0);
  CHECK(spec.B().back()(1, 0) == 1.0);
  CHECK(spec.B().back().cwiseAbs().sum() == 1.0);
  for (std::size_t k = 1; k + 1 < spec.B().size(); ++k) CHECK(spec.B()[k].isZero());

  for (int k = 1; k < intervals; ++k) {
    const ProblemSpec sk = sturm_liouville_builder(dirichlet(intervals, dirichlet_eigenvalue(k, intervals), "x"));
    CHECK(linear_nullity(sk).nullity == 1);
    CHECK_NOTHROW((void)analyze(sk));
  }
  const ProblemSpec off = sturm_liouville_builder(dirichlet(intervals, 0.5, "x"));
  CHECK(linear_nullity(off).nullity == 0);
  CHECK(kind_of([&] { (void)analyze(off); }) == ErrorKind::NotResonant);

  sl.p = Vec::Constant(1, -1.0);
  CHECK(kind_of([&] { (void)sturm_liouville_builder(sl); }) == ErrorKind::Input);
  sl.p = Vec::Ones(1);
  sl.a11 = sl.a12 = 0.0;
  CHECK(kind_of([&] { (void)sturm_liouville_builder(sl); }) == ErrorKind::Input);
}

TEST_CASE("Sturm-Liouville normal form reproduces the difference form") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    SturmLiouville sl;
    sl.a = 2;
    sl.b = 8;
    const int N = sl.b - sl.a + 1;
    sl.p = Vec(N + 1);
    sl.q = Vec(N);
    for (int i = 0; i <= N; ++i) sl.p(i) = pos(rng);
    for (int i = 0; i < N; ++i) sl.q(i) = uni(rng);
    sl.lambda = uni(rng);
    sl.a11 = uni(rng);
    sl.a12 = uni(rng);
    sl.a21 = uni(rng);
    sl.a22 = uni(rng);
    sl.f = Expr::parse("sin(x)");
    const ProblemSpec spec = sturm_liouville_builder(sl);
    Vec y(N + 2);
    for (int i = 0; i < y.size(); ++i) y(i) = uni(rng);
    const Vec r = recurrence_residual(spec, y);
    for (int s = 0; s < N; ++s) {
      // t = a+1+s; x(t-1) = y(s), x(t) = y(s+1), x(t+1) = y(s+2).
      const double pt = sl.p(s + 1), pm = sl.p(s);
      const double direct = pt * (y(s + 2) - y(s + 1)) - pm * (y(s + 1) - y(s)) +
                            (sl.q(s) + sl.lambda) * y(s + 1) - std::sin(y(s + 1));
      CHECK(pt * r(s) == doctest::Approx(direct).epsilon(1e-12));
    }
    const Vec bc = scalar_boundary_residual(spec, y);
    CHECK(bc(0) == doctest::Approx(sl.a11 * y(0) + sl.a12 * (y(1) - y(0))));
    CHECK(bc(1) == doctest::Approx(sl.a21 * y(N) + sl.a22 * (y(N + 1) - y(N))));
  }
}
