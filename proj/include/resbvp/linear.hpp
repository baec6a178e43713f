#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "resbvp/core.hpp"

namespace resbvp {

struct LinearOptions {
  double rank_tol = kDefaultRankTol;
  /// Relative consistency tolerance used by right_inverse.
  double image_tol = 1e-8;
  /// Random probes for the lower estimate of the operator norm.
  int norm_probes = 1000;
  std::uint64_t probe_seed = 20240601;
};

/// Everything about the linear part of the problem that the reduction needs.
/// Built once by analyze() and immutable afterwards.
struct LinearAnalysis {
  int n = 0;
  int N = 0;
  int m = 0;

  std::vector<Mat> A;        // companion matrices A(0..N-1)
  std::vector<Mat> Phi;      // principal fundamental matrix, Phi(0..N)
  std::vector<Mat> PhiInv;   // Phi(t)^{-1}
  Mat Lambda;                // sum_i B_i Phi(i)
  Vec lambda_singular_values;
  Mat lambda_pinv;           // pseudo-inverse with the one-dimensional kernel dropped
  double kernel_threshold = 0.0;

  Vec u;                     // basis of Ker(Lambda)
  Vec w;                     // basis of Ker(Lambda^T)
  Mat V;                     // orthogonal projection onto Ker(Lambda)
  GridFunction S;            // S(t) = Phi(t) u, t = 0..N
  GridFunction Psi;          // adjoint weights, t = 0..N-1
  double psi_norm_sq = 0.0;  // sum_t |Psi(t)|^2

  /// Matrix of M_p (I - Q) acting on stacked Z elements: n(N+1) x nN.
  Mat mp_iq;
  double A_bar = 0.0;        // upper bound on the operator norm of M_p (I - Q)
  double A_probe = 0.0;      // lower estimate from random probes

  double max_phi_condition = 1.0;
  std::vector<std::string> warnings;

  /// [Psi(t)]_n for t = 0..N-1.
  Vec psi_n() const { return Psi.values().row(n - 1).transpose(); }
  /// [S(t)]_m for t = 0..N-1.
  Vec s_m() const { return S.values().row(m - 1).head(N).transpose(); }
};

/// Builds the analysis. Throws Error(SingularPhi | NotResonant | KernelTooLarge).
///
/// u and w are unit vectors. u has its first nonzero entry positive; w is
/// oriented so that sum_t [Psi(t)]_n [S(t)]_m >= 0 (falling back to
/// first-nonzero-positive when that sum vanishes).
LinearAnalysis analyze(const ProblemSpec& spec, const LinearOptions& opts = {});

/// Copy with u scaled by mu_u and w by mu_w (S, Psi and psi_norm_sq follow).
/// The projections and the norm bound are basis independent and are kept.
LinearAnalysis rescale_basis(const LinearAnalysis& la, double mu_u, double mu_w);

/// (L x)(t) = x(t+1) - A(t) x(t).
GridFunction apply_L(const LinearAnalysis& la, const GridFunction& x);

struct ImageMembership {
  bool member = false;
  double defect = 0.0;
};

/// defect = |sum_i Psi(i)^T h(i)| / max(1, ||h||).
ImageMembership image_membership(const LinearAnalysis& la, const GridFunction& h,
                                 double tol = 1e-10);

GridFunction project_P(const LinearAnalysis& la, const GridFunction& x);
GridFunction project_Q(const LinearAnalysis& la, const GridFunction& h);

/// M_p h: the unique x with L x = h, P x = 0 and sum_k B_k x(k) = 0.
/// Throws Error(NotInImage) when h is not in the image of L.
GridFunction right_inverse(const LinearAnalysis& la, const ProblemSpec& spec,
                           const GridFunction& h, double image_tol = 1e-8);

struct NormBound {
  double upper = 0.0;        // max_t sum_s sigma_max(M_{t,s})
  double probe_lower = 0.0;  // max over random unit probes of ||M h||
};

/// Bounds the operator norm of M_p (I - Q) from Z to X under the
/// sup-of-Euclidean norms.
NormBound norm_bound(const LinearAnalysis& la, int probes = 1000,
                     std::uint64_t seed = 20240601);

/// The assembled M_p (I - Q) applied to h.
GridFunction apply_mp_iq(const LinearAnalysis& la, const GridFunction& h);

}  // namespace resbvp
