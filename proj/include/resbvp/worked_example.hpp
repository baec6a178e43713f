#pragma once

#include <string>
#include <vector>

#include "resbvp/core.hpp"
#include "resbvp/linear.hpp"

namespace resbvp {

/// Second-order instance y(t+2) + y(t+1) + y(t) = g(t, y(t+1)), t = 0..7, with
/// the three-point conditions y(5) + y(8) + y(9) = 0 and y(2) + y(8) + y(9) = 0.
ProblemSpec worked_example_spec(Expr g = Expr());

/// Piecewise-logarithmic nonlinearity growing at different rates on the two
/// half-lines:
///
///     g(x) = beta ln(1+|x|)   on (-inf, -c]
///            gamma ln(1+x)    on [c, inf)
///
/// joined by quadratics on [-c, 0] and [0, c] that stay below beta ln(1+c)
/// and gamma ln(1+c) respectively. gamma is chosen from the norm bound so that
/// d = e^gamma (1+c) - 1 satisfies the growth inequality.
struct LogFamily {
  double c = 3.0;
  double beta = 0.5;
  double L = 0.0;      // ln(1+c)
  double ratio = 0.0;  // s_max / s_min
  double x_c = 0.0;    // largest root of e^x (1+c) - 1 - (c ratio + (1+ratio) A L x^2)
  double gamma = 0.0;
  double d = 0.0;
  Expr g;
};

LogFamily log_family(const LinearAnalysis& la, double c = 3.0, double beta = 0.5);

struct GoldenCheck {
  std::string name;
  bool passed = false;
  double error = 0.0;
};

/// Compares an analysis of worked_example_spec() with the known closed forms:
/// Lambda = [[-1,-2],[-1,-2]], S and Psi (in the basis u = (2,-1), w = (-1,1))
/// and the sign sets.
std::vector<GoldenCheck> worked_example_golden_checks(const LinearAnalysis& la);

}  // namespace resbvp
