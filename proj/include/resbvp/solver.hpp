#pragma once

#include <string>
#include <vector>

#include "resbvp/conditions.hpp"
#include "resbvp/core.hpp"
#include "resbvp/linear.hpp"

namespace resbvp {

struct SolverOptions {
  double solve_tol = 1e-10;
  int max_bisect = 200;
  /// Fixed-point defect target, relative to 1 + ||v||.
  double aux_tol = 1e-13;
  int max_iter = 500;
  double theta = 0.5;
  int samples = 512;
};

/// The reduced problem in (alpha, v): x = alpha S + v with v in Ker(P).
struct BifurcationProblem {
  LinearAnalysis la;
  ProblemSpec spec;
  Certificate cert;
  bool certified = false;
  double alpha_star = 0.0;  // (c + A ||g||_d) / s_min
  double r_star = 0.0;      // A ||g||_d
  double lipschitz = 0.0;   // estimated Lipschitz constant of g on [-d, d]
  double contraction_q = 0.0;
};

/// Builds the reduced problem from a condition report. An uncertified report
/// is accepted only for the degenerate g == 0 path of solve().
BifurcationProblem make_bifurcation_problem(const LinearAnalysis& la, const ProblemSpec& spec,
                                            const ConditionReport& report,
                                            const SolverOptions& opts = {});

struct AuxiliaryResult {
  GridFunction v;
  int iterations = 0;
  double defect = 0.0;
  std::string method;  // "iteration", "damped" or "newton"
  double observed_rate = 0.0;
};

/// p(alpha, v) = M_p (I - Q) F(alpha S + v).
GridFunction aux_map(const BifurcationProblem& bp, double alpha, const GridFunction& v);

/// Solves v = p(alpha, v). Plain iteration when the contraction estimate is
/// below one, otherwise damped iteration followed by Newton on the m-th
/// components. `warm` (optional) replaces the zero initial guess.
/// Throws Error(NoConvergence).
AuxiliaryResult auxiliary_fixed_point(const BifurcationProblem& bp, double alpha,
                                      const SolverOptions& opts = {},
                                      const GridFunction* warm = nullptr);

/// sum_i [Psi(i)]_n g(i, alpha [S(i)]_m + [v(i)]_m).
double bifurcation_value(const BifurcationProblem& bp, double alpha, const GridFunction& v);

struct BisectionStep {
  double alpha;
  double value;
};

struct SolveResult {
  double alpha = 0.0;
  GridFunction v;
  GridFunction x;
  ScalarTrajectory y;
  double recurrence_residual = 0.0;
  double boundary_residual = 0.0;
  int aux_iterations = 0;
  int bisection_steps = 0;
  double alpha_lo = 0.0, alpha_hi = 0.0, B_lo = 0.0, B_hi = 0.0;
  std::vector<BisectionStep> history;
  std::vector<std::string> notes;
};

/// Bisection on alpha in [-alpha*, alpha*] using the endpoint signs guaranteed
/// by a passing certificate. Throws Error(BoundarySignViolation | NoConvergence
/// | BisectionStall).
SolveResult solve(const BifurcationProblem& bp, const SolverOptions& opts = {});

}  // namespace resbvp
