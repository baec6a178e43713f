#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "resbvp/core.hpp"
#include "resbvp/linear.hpp"

namespace resbvp {

struct ConditionOptions {
  /// Sign decisions: a value is zero when |v| <= sign_tol * max|v|.
  double sign_tol = 1e-10;
  /// Values between sign_tol and ambiguity_factor * sign_tol (relative) are
  /// neither clearly zero nor clearly signed.
  double ambiguity_factor = 1e4;
  /// Slack for the strict inequalities, scaled by (1 + ||g||_d).
  double strict_tol = 1e-9;
  /// Tolerance for J2 <= 0 <= J1, scaled by sum_O |[Psi]_n| (1 + ||g||_d).
  double c4_tol = 1e-12;
  int samples = 512;
  /// Landesman-Lazer: accepted distance between g far out and g(+-inf).
  double limit_tol = 1e-3;
  int max_doublings = 64;
};

/// Time indices t in {0..N-1} classified by the signs of [Psi(t)]_n and [S(t)]_m.
struct SignSets {
  std::vector<int> opp, opm, omp, omm, o0;
  std::vector<int> o;          // opp u opm u omp u omm, ascending
  std::vector<int> ambiguous;  // indices whose classification fell in the dead zone
  Vec psi_n;
  Vec s_m;

  bool c1() const { return o0.empty() && ambiguous.empty(); }
};

SignSets sign_sets(const LinearAnalysis& la, double sign_tol = 1e-10,
                   double ambiguity_factor = 1e4);

enum class Orientation { Standard, Reversed };
const char* to_string(Orientation o);

struct Certificate {
  double c = 0.0;
  double d = 0.0;
  Orientation orientation = Orientation::Standard;
  std::vector<int> indices;  // the set O; K1/K2 are aligned with it
  Vec K1;
  Vec K2;
  double J1 = 0.0;
  double J2 = 0.0;
  double s_max = 0.0;
  double s_min = 0.0;
  double g_sup_d = 0.0;  // sampled estimate of sup |g| over {0..N-1} x [-d, d]
  double A_bar = 0.0;
  double margin = 0.0;   // smallest strict-inequality slack observed
};

struct Check {
  std::string name;
  bool passed = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string detail;
};

struct ConditionReport {
  bool passed = false;
  std::string failed;   // first failing condition, empty on PASS
  std::string method;   // which criterion was checked
  Certificate cert;
  SignSets sets;
  std::vector<Check> checks;
  std::map<std::string, double> values;
  std::vector<std::string> notes;

  std::string verdict() const { return passed ? "PASS" : "FAIL(" + failed + ")"; }
};

/// Main existence check on (c, d) with the tight bounding tables (sampled
/// extremes of g on [c, d] and [-d, -c]). The strict inequalities are met by
/// moving the tables outwards by strict_tol (1 + ||g||_d), which C4 must absorb.
ConditionReport certify_main(const LinearAnalysis& la, const ProblemSpec& spec, double c,
                             double d, Orientation orientation,
                             const ConditionOptions& opts = {});

/// Same check with caller-supplied bounding tables K1/K2 over the set O; C2 is
/// then verified against sampled extremes of g.
ConditionReport certify_with_tables(const LinearAnalysis& la, const ProblemSpec& spec,
                                    double c, double d, Orientation orientation,
                                    const Vec& K1, const Vec& K2,
                                    const ConditionOptions& opts = {});

/// Sign-aligned case: [Psi]_n [S]_m of one sign, g of opposite signs on
/// [c, d] and [-d, -c]; zero bounding tables.
ConditionReport certify_same_sign(const LinearAnalysis& la, const ProblemSpec& spec, double c,
                                  double d, const ConditionOptions& opts = {});

/// Sublinear growth |g| <= M1 |x|^beta + M2: computes the smallest admissible d
/// and checks the remaining conditions there.
ConditionReport certify_sublinear(const LinearAnalysis& la, const ProblemSpec& spec, double c,
                                  double M1, double M2, double beta,
                                  const ConditionOptions& opts = {});

/// Small linear growth |g| <= M1 |x| + M2 with A_bar M1 (s_max+s_min)/s_min < 1:
/// doubles d from 2R until the growth inequality holds, then checks at c = R.
ConditionReport certify_small_linear(const LinearAnalysis& la, const ProblemSpec& spec,
                                     double R, double M1, double M2,
                                     const ConditionOptions& opts = {});

/// Bounded, t-independent g with limits g(+inf) = g_plus, g(-inf) = g_minus.
ConditionReport certify_landesman_lazer(const LinearAnalysis& la, const ProblemSpec& spec,
                                        double g_plus, double g_minus, double R,
                                        const ConditionOptions& opts = {});

struct AutoCertificate {
  std::optional<ConditionReport> report;
  /// Report of the first attempt in scan order, kept when nothing passes.
  std::optional<ConditionReport> first_failure;
  std::vector<std::string> trace;
};

/// Scans c over c_grid and doubles d from 2c up to d_cap, trying both
/// orientations; returns the first pass in grid order.
AutoCertificate auto_certificate(const LinearAnalysis& la, const ProblemSpec& spec,
                                 const std::vector<double>& c_grid, double d_cap,
                                 const ConditionOptions& opts = {});

std::vector<double> default_c_grid();

/// Discrete Sturm-Liouville problem
///
///     D(p(t-1) D x(t-1)) + q(t) x(t) + lambda x(t) = f(x(t)),  t = a+1..b+1
///     a11 x(a) + a12 D x(a) = 0,  a21 x(b+1) + a22 D x(b+1) = 0
///
/// with D the forward difference. p covers t = a..b+1 (length b-a+2) and q
/// covers t = a+1..b+1 (length b-a+1); a length-1 table is broadcast.
struct SturmLiouville {
  Vec p = Vec::Ones(1);
  Vec q = Vec::Zero(1);
  double lambda = 0.0;
  double a11 = 1.0, a12 = 0.0, a21 = 1.0, a22 = 0.0;
  int a = 0;
  int b = 0;
  Expr f;
};

/// Normal form with y(s) = x(a+s): y(s+2) + a_1(s) y(s+1) + a_0(s) y(s) = f(y(s+1))/p(a+1+s),
/// N = b-a+1, n = m = 2.
ProblemSpec sturm_liouville_builder(const SturmLiouville& sl);

}  // namespace resbvp
