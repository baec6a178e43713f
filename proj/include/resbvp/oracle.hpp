#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "resbvp/core.hpp"

namespace resbvp {

/// The BVP as N+n scalar equations in y(0..N+n-1): N recurrence residuals
/// followed by n boundary residuals.
class FullSystem {
 public:
  explicit FullSystem(ProblemSpec spec);

  int dim() const { return dim_; }
  const ProblemSpec& spec() const { return spec_; }

  Vec residual(const Vec& y) const;
  /// Exact in the linear part; central differences (step 1e-6 (1 + |y|)) for g.
  Mat jacobian(const Vec& y) const;
  /// Linear part only (g ignored).
  const Mat& linear_matrix() const { return linear_; }

 private:
  ProblemSpec spec_;
  int dim_;
  Mat linear_;
};

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 100;
};

struct NewtonResult {
  Vec y;
  int iterations = 0;
  double residual = 0.0;  // sup norm of R(y)
};

/// Damped Newton with Armijo backtracking on |R|^2; pseudo-inverse step when
/// the Jacobian is rank deficient. Empty on stall or iteration cap.
std::optional<NewtonResult> newton_solve(const FullSystem& fs, const Vec& y0,
                                         const NewtonOptions& opts = {});

struct MultistartSolution {
  Vec y;
  int start_index = 0;
  int iterations = 0;
  double residual = 0.0;
};

/// K Newton runs from uniform starts in [-box, box]^(N+n); start k draws from
/// its own generator seeded with (seed, k). Distinct solutions (sup distance
/// above 1e-6 (1 + scale)) in start order.
std::vector<MultistartSolution> multistart(const FullSystem& fs, int K, double box,
                                           std::uint64_t seed, const NewtonOptions& opts = {},
                                           int threads = 0);

struct Nullity {
  int nullity = 0;
  Mat basis;  // orthonormal columns
};

/// Null space of the homogeneous linear BVP assembled in the scalar unknowns.
Nullity linear_nullity(const ProblemSpec& spec, double rank_tol = kDefaultRankTol);

/// Random instance whose boundary map has rank exactly n-1 (one-dimensional
/// resonance); g is zero.
ProblemSpec random_resonant_instance(std::uint64_t seed, int n, int N);

/// Random instance with a nonsingular boundary map; g is zero.
ProblemSpec random_nonresonant_instance(std::uint64_t seed, int n, int N);

}  // namespace resbvp
