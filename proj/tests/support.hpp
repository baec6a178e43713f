#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "resbvp/core.hpp"
#include "resbvp/linear.hpp"

namespace testing {

using resbvp::GridFunction;
using resbvp::Mat;
using resbvp::Vec;

inline GridFunction random_grid(std::mt19937_64& rng, int dim, int len, double scale = 1.0) {
  std::uniform_real_distribution<double> uni(-scale, scale);
  GridFunction f(dim, len);
  for (int t = 0; t < len; ++t)
    for (int k = 0; k < dim; ++k) f[t](k) = uni(rng);
  return f;
}

inline double sup_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

inline double max_diff(const GridFunction& a, const GridFunction& b) {
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

// Dense (N+1)n x (N+1)n system for L x = h with sum_k B_k x(k) = 0, solved by
// complete orthogonal decomposition. Returns the least-squares residual.
inline double least_squares_residual(const resbvp::ProblemSpec& spec, const GridFunction& h) {
  const int n = spec.n();
  const int N = spec.N();
  Mat M = Mat::Zero(n * N + n, n * (N + 1));
  Vec rhs = Vec::Zero(n * N + n);
  for (int t = 0; t < N; ++t) {
    M.block(t * n, (t + 1) * n, n, n) = Mat::Identity(n, n);
    M.block(t * n, t * n, n, n) = -spec.companion(t);
    rhs.segment(t * n, n) = h[t];
  }
  for (int k = 0; k <= N; ++k) M.block(N * n, k * n, n, n) = spec.B()[static_cast<std::size_t>(k)];
  const Vec x = Eigen::CompleteOrthogonalDecomposition<Mat>(M).solve(rhs);
  return (M * x - rhs).norm() / std::max(1.0, rhs.norm());
}

// Random x with sum_k B_k x(k) = 0, by projecting onto the null space of the
// stacked boundary matrix.
inline GridFunction domain_element(const resbvp::ProblemSpec& spec, std::mt19937_64& rng) {
  const int n = spec.n();
  const int N = spec.N();
  Mat Bs(n, n * (N + 1));
  for (int k = 0; k <= N; ++k) Bs.block(0, k * n, n, n) = spec.B()[static_cast<std::size_t>(k)];
  Vec x = random_grid(rng, n, N + 1).stacked();
  x -= Eigen::CompleteOrthogonalDecomposition<Mat>(Bs).solve(Vec(Bs * x));
  return GridFunction::from_stacked(x, n);
}

}  // namespace testing
