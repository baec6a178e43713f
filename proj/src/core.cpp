#include "resbvp/core.hpp"

#include <cmath>
#include <string>

namespace resbvp {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "InputError";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::NotResonant: return "NotResonant";
    case ErrorKind::KernelTooLarge: return "KernelTooLarge";
    case ErrorKind::SingularPhi: return "SingularPhi";
    case ErrorKind::NotInImage: return "NotInImage";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::Inapplicable: return "Inapplicable";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::BoundarySignViolation: return "BoundarySignViolation";
    case ErrorKind::BisectionStall: return "BisectionStall";
  }
  return "Error";
}

GridFunction GridFunction::from_stacked(const Vec& stacked, int dim) {
  if (dim <= 0 || stacked.size() % dim != 0) {
    throw Error(ErrorKind::Input, "GridFunction::from_stacked: length not a multiple of dim");
  }
  return GridFunction(Mat(stacked.reshaped(dim, stacked.size() / dim)));
}

double GridFunction::norm() const {
  if (values_.cols() == 0) return 0.0;
  return values_.colwise().norm().maxCoeff();
}

namespace {

[[noreturn]] void bad_input(const std::string& what) { throw Error(ErrorKind::Input, what); }

}  // namespace

bool boundary_full_row_rank(const std::vector<Mat>& B, double rank_tol) {
  if (B.empty()) return false;
  const Eigen::Index n = B.front().rows();
  Mat aug(n, n * static_cast<Eigen::Index>(B.size()));
  for (std::size_t k = 0; k < B.size(); ++k) aug.middleCols(n * static_cast<Eigen::Index>(k), n) = B[k];
  Eigen::JacobiSVD<Mat> svd(aug);
  const Vec& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return false;
  return s(s.size() - 1) >= rank_tol * s(0);
}

ProblemSpec::ProblemSpec(int n, int N, int m, Mat a, std::vector<Mat> B, Expr g,
                         double rank_tol)
    : n_(n), N_(N), m_(m), a_(std::move(a)), B_(std::move(B)), g_(std::move(g)) {
  if (n_ < 1) bad_input("order n must be at least 1");
  if (N_ < 3) bad_input("horizon N must be at least 3");
  if (m_ < 1 || m_ > n_) bad_input("lag index m must satisfy 1 <= m <= n");
  if (a_.rows() != n_ || a_.cols() != N_) {
    bad_input("coefficient table must be n x N (got " + std::to_string(a_.rows()) + " x " +
              std::to_string(a_.cols()) + ")");
  }
  if (static_cast<int>(B_.size()) != N_ + 1) bad_input("need N+1 boundary matrices");
  for (const auto& Bk : B_) {
    if (Bk.rows() != n_ || Bk.cols() != n_) bad_input("boundary matrices must be n x n");
    if (!Bk.allFinite()) bad_input("boundary matrices must be finite");
  }
  if (!a_.allFinite()) bad_input("coefficients must be finite");
  for (int t = 0; t < N_; ++t) {
    if (a_(0, t) == 0.0) bad_input("a_0(" + std::to_string(t) + ") is zero");
  }
  if (!boundary_full_row_rank(B_, rank_tol)) {
    bad_input("boundary conditions are not independent ([B_0..B_N] lacks full row rank)");
  }
}

Mat ProblemSpec::companion(int t) const {
  if (t < 0 || t >= N_) bad_input("companion: time index out of range");
  Mat A = Mat::Zero(n_, n_);
  for (int i = 0; i + 1 < n_; ++i) A(i, i + 1) = 1.0;
  for (int j = 0; j < n_; ++j) A(n_ - 1, j) = -a_(j, t);
  return A;
}

ProblemSpec ProblemSpec::with_nonlinearity(Expr g) const {
  ProblemSpec copy = *this;
  copy.g_ = std::move(g);
  return copy;
}

Vec to_companion(const ProblemSpec& spec, int t, const Vec& x) {
  if (t < 0 || t >= spec.N()) bad_input("to_companion: time index out of range");
  if (x.size() != spec.n()) bad_input("to_companion: state has wrong dimension");
  Vec out = spec.companion(t) * x;
  out(spec.n() - 1) += spec.g(t, x(spec.m() - 1));
  return out;
}

GridFunction scalar_to_grid(const ScalarTrajectory& y, const ProblemSpec& spec) {
  const int n = spec.n();
  const int N = spec.N();
  if (y.size() != N + n) bad_input("scalar_to_grid: trajectory must have length N+n");
  GridFunction x(n, N + 1);
  for (int t = 0; t <= N; ++t) x[t] = y.segment(t, n);
  return x;
}

ScalarTrajectory grid_to_scalar(const GridFunction& x, const ProblemSpec& spec, double tol) {
  const int n = spec.n();
  const int N = spec.N();
  if (x.dim() != n || x.size() != N + 1) bad_input("grid_to_scalar: grid has wrong shape");
  const double scale = 1.0 + x.norm();
  for (int t = 0; t < N; ++t) {
    for (int j = 0; j + 1 < n; ++j) {
      if (std::abs(x[t + 1](j) - x[t](j + 1)) > tol * scale) {
        bad_input("grid_to_scalar: overlap inconsistency at t=" + std::to_string(t) +
                  ", component " + std::to_string(j));
      }
    }
  }
  ScalarTrajectory y(N + n);
  for (int t = 0; t <= N; ++t) y(t) = x[t](0);
  for (int j = 1; j < n; ++j) y(N + j) = x[N](j);
  return y;
}

Vec boundary_residual(const ProblemSpec& spec, const GridFunction& x) {
  Vec r = Vec::Zero(spec.n());
  for (int k = 0; k <= spec.N(); ++k) r += spec.B()[static_cast<std::size_t>(k)] * x[k];
  return r;
}

Vec scalar_boundary_residual(const ProblemSpec& spec, const ScalarTrajectory& y) {
  const int n = spec.n();
  if (y.size() != spec.N() + n) bad_input("scalar_boundary_residual: wrong length");
  Vec r = Vec::Zero(n);
  for (int k = 0; k <= spec.N(); ++k) {
    const Mat& Bk = spec.B()[static_cast<std::size_t>(k)];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) r(i) += Bk(i, j) * y(j + k);
    }
  }
  return r;
}

Vec recurrence_residual(const ProblemSpec& spec, const ScalarTrajectory& y) {
  const int n = spec.n();
  const int N = spec.N();
  if (y.size() != N + n) bad_input("recurrence_residual: wrong length");
  Vec r(N);
  for (int t = 0; t < N; ++t) {
    double s = y(t + n);
    for (int j = 0; j < n; ++j) s += spec.a()(j, t) * y(t + j);
    r(t) = s - spec.g(t, y(t + spec.m() - 1));
  }
  return r;
}

}  // namespace resbvp
