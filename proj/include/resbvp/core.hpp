#pragma once

#include <Eigen/Dense>
#include <vector>

#include "resbvp/error.hpp"
#include "resbvp/expr.hpp"

namespace resbvp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Default relative singular-value threshold for rank decisions.
inline constexpr double kDefaultRankTol = 1e-10;

/// A sequence of n-vectors indexed by t = 0..size()-1, stored as the columns of
/// an n x size() matrix. The column-major storage doubles as the stacked
/// vector (x(0); x(1); ...) used by the assembled operators.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(int dim, int size) : values_(Mat::Zero(dim, size)) {}
  explicit GridFunction(Mat values) : values_(std::move(values)) {}

  static GridFunction from_stacked(const Vec& stacked, int dim);

  int dim() const { return static_cast<int>(values_.rows()); }
  int size() const { return static_cast<int>(values_.cols()); }

  auto operator[](int t) { return values_.col(t); }
  auto operator[](int t) const { return values_.col(t); }

  const Mat& values() const { return values_; }
  Mat& values() { return values_; }

  Vec stacked() const { return values_.reshaped(); }

  /// max_t |x(t)| with |.| the Euclidean norm.
  double norm() const;

  GridFunction operator+(const GridFunction& o) const { return GridFunction(values_ + o.values_); }
  GridFunction operator-(const GridFunction& o) const { return GridFunction(values_ - o.values_); }
  GridFunction operator*(double s) const { return GridFunction(values_ * s); }

 private:
  Mat values_;
};

/// y(0..N+n-1) of the scalar recurrence.
using ScalarTrajectory = Vec;

/// The boundary value problem
///
///     y(t+n) + a_{n-1}(t) y(t+n-1) + ... + a_0(t) y(t) = g(t, y(t+m-1)),  t = 0..N-1
///     sum_k sum_j b_ij(k) y(j+k) = 0,                                      i = 0..n-1
///
/// with (B_k)_ij = b_ij(k), all indices 0-based. Immutable after construction.
class ProblemSpec {
 public:
  /// `a` is n x N with a(j, t) = a_j(t); `B` holds N+1 matrices of size n x n.
  /// Throws Error(Input) when an invariant fails.
  ProblemSpec(int n, int N, int m, Mat a, std::vector<Mat> B, Expr g,
              double rank_tol = kDefaultRankTol);

  int n() const { return n_; }
  int N() const { return N_; }
  int m() const { return m_; }
  const Mat& a() const { return a_; }
  const std::vector<Mat>& B() const { return B_; }
  const Expr& g() const { return g_; }

  /// Companion matrix A(t), 0 <= t <= N-1.
  Mat companion(int t) const;

  /// g(t, x) at integer time t.
  double g(int t, double x) const { return g_(static_cast<double>(t), x); }

  ProblemSpec with_nonlinearity(Expr g) const;

 private:
  int n_, N_, m_;
  Mat a_;
  std::vector<Mat> B_;
  Expr g_;
};

/// True when the n x n(N+1) matrix [B_0, ..., B_N] has full row rank.
bool boundary_full_row_rank(const std::vector<Mat>& B, double rank_tol = kDefaultRankTol);

/// A(t) x + f(t, x) with f(t, x) = (0, ..., 0, g(t, x_m)).
Vec to_companion(const ProblemSpec& spec, int t, const Vec& x);

GridFunction scalar_to_grid(const ScalarTrajectory& y, const ProblemSpec& spec);

/// Inverse of scalar_to_grid. Throws Error(Input) when the overlapping entries
/// x(t+1)_j = x(t)_{j+1} disagree by more than tol * (1 + |x|).
ScalarTrajectory grid_to_scalar(const GridFunction& x, const ProblemSpec& spec,
                                double tol = 1e-12);

/// sum_k B_k x(k).
Vec boundary_residual(const ProblemSpec& spec, const GridFunction& x);

/// Residuals of the n scalar boundary conditions evaluated directly on y.
Vec scalar_boundary_residual(const ProblemSpec& spec, const ScalarTrajectory& y);

/// Residuals R_t(y) = y(t+n) + sum_j a_j(t) y(t+j) - g(t, y(t+m-1)), t = 0..N-1.
Vec recurrence_residual(const ProblemSpec& spec, const ScalarTrajectory& y);

}  // namespace resbvp
