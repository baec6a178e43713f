#include "resbvp/linear.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace resbvp {

namespace {

double spectral_norm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  if (M.rows() == 1 || M.cols() == 1) return M.norm();
  return Eigen::JacobiSVD<Mat>(M).singularValues()(0);
}

// Flips v so that its first entry with magnitude above tol * |v| is positive.
void first_nonzero_positive(Vec& v) {
  const double tol = 1e-12 * v.norm();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) > tol) {
      if (v(k) < 0) v = -v;
      return;
    }
  }
}

void require_length(const GridFunction& f, int dim, int len, const char* what) {
  if (f.dim() != dim || f.size() != len) {
    throw Error(ErrorKind::Input, std::string(what) + ": grid function has wrong shape");
  }
}

}  // namespace

LinearAnalysis analyze(const ProblemSpec& spec, const LinearOptions& opts) {
  LinearAnalysis la;
  const int n = la.n = spec.n();
  const int N = la.N = spec.N();
  la.m = spec.m();

  la.A.reserve(static_cast<std::size_t>(N));
  la.Phi.assign(static_cast<std::size_t>(N + 1), Mat::Identity(n, n));
  la.PhiInv.assign(static_cast<std::size_t>(N + 1), Mat::Identity(n, n));
  for (int t = 0; t < N; ++t) {
    const double coeff_scale = std::max(1.0, spec.a().col(t).cwiseAbs().maxCoeff());
    if (std::abs(spec.a()(0, t)) <= opts.rank_tol * coeff_scale) {
      throw Error(ErrorKind::SingularPhi,
                  "A(" + std::to_string(t) + ") is numerically singular (a_0 ~ 0)");
    }
    la.A.push_back(spec.companion(t));
    const auto ut = static_cast<std::size_t>(t);
    la.Phi[ut + 1] = la.A[ut] * la.Phi[ut];
    Eigen::PartialPivLU<Mat> lu(la.A[ut]);
    la.PhiInv[ut + 1] = la.PhiInv[ut] * lu.inverse();

    const Vec sv = Eigen::JacobiSVD<Mat>(la.Phi[ut + 1]).singularValues();
    const double cond = sv(0) / sv(sv.size() - 1);
    la.max_phi_condition = std::max(la.max_phi_condition, cond);
  }
  if (!(la.max_phi_condition <= 1e12)) {
    la.warnings.push_back("fundamental matrix condition number " +
                          std::to_string(la.max_phi_condition) + " exceeds 1e12");
  }

  la.Lambda = Mat::Zero(n, n);
  double term_scale = 0.0;
  for (int i = 0; i <= N; ++i) {
    const Mat term = spec.B()[static_cast<std::size_t>(i)] * la.Phi[static_cast<std::size_t>(i)];
    la.Lambda += term;
    term_scale += spectral_norm(term);
  }

  Eigen::JacobiSVD<Mat> svd(la.Lambda, Eigen::ComputeFullU | Eigen::ComputeFullV);
  la.lambda_singular_values = svd.singularValues();
  const double smax = la.lambda_singular_values(0);
  la.kernel_threshold = opts.rank_tol * std::max(smax, term_scale);
  int kernel_dim = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (la.lambda_singular_values(i) < la.kernel_threshold) ++kernel_dim;
  }
  if (kernel_dim == 0) {
    throw Error(ErrorKind::NotResonant,
                "the linear problem is not resonant: smallest singular value of Lambda is " +
                    std::to_string(la.lambda_singular_values(n - 1)));
  }
  if (kernel_dim > 1) {
    throw Error(ErrorKind::KernelTooLarge,
                "kernel of Lambda has dimension " + std::to_string(kernel_dim) +
                    "; only one-dimensional kernels are supported");
  }

  la.u = svd.matrixV().col(n - 1);
  la.w = svd.matrixU().col(n - 1);
  la.u.normalize();
  la.w.normalize();
  first_nonzero_positive(la.u);

  la.lambda_pinv = Mat::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    la.lambda_pinv += svd.matrixV().col(i) * svd.matrixU().col(i).transpose() /
                      la.lambda_singular_values(i);
  }
  la.V = la.u * la.u.transpose();

  la.S = GridFunction(n, N + 1);
  for (int t = 0; t <= N; ++t) la.S[t] = la.Phi[static_cast<std::size_t>(t)] * la.u;

  auto build_psi = [&] {
    la.Psi = GridFunction(n, N);
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
    for (int t = N - 1; t >= 0; --t) {
      const auto i = static_cast<std::size_t>(t + 1);
      r += la.w.transpose() * spec.B()[i] * la.Phi[i];
      la.Psi[t] = (r * la.PhiInv[i]).transpose();
    }
  };
  build_psi();

  const Vec pn = la.psi_n();
  const Vec sm = la.s_m();
  const double overlap = pn.dot(sm);
  if (std::abs(overlap) > 1e-12 * pn.norm() * sm.norm()) {
    if (overlap < 0) {
      la.w = -la.w;
      la.Psi = la.Psi * -1.0;
    }
  } else {
    const Vec before = la.w;
    first_nonzero_positive(la.w);
    if (la.w != before) build_psi();
  }
  la.psi_norm_sq = la.Psi.values().squaredNorm();
  if (!(la.psi_norm_sq > 0.0)) {
    throw Error(ErrorKind::Degenerate, "adjoint weights Psi vanish identically");
  }

  // Assemble M_p (I - Q) column by column on the canonical basis of Z.
  la.mp_iq = Mat::Zero(n * (N + 1), n * N);
  for (int s = 0; s < N; ++s) {
    for (int k = 0; k < n; ++k) {
      GridFunction e(n, N);
      e[s](k) = 1.0;
      const GridFunction h = e - project_Q(la, e);
      la.mp_iq.col(s * n + k) = right_inverse(la, spec, h, opts.image_tol).stacked();
    }
  }
  const NormBound nb = norm_bound(la, opts.norm_probes, opts.probe_seed);
  la.A_bar = nb.upper;
  la.A_probe = nb.probe_lower;
  return la;
}

LinearAnalysis rescale_basis(const LinearAnalysis& la, double mu_u, double mu_w) {
  LinearAnalysis out = la;
  out.u *= mu_u;
  out.S = la.S * mu_u;
  out.w *= mu_w;
  out.Psi = la.Psi * mu_w;
  out.psi_norm_sq = la.psi_norm_sq * mu_w * mu_w;
  return out;
}

GridFunction apply_L(const LinearAnalysis& la, const GridFunction& x) {
  require_length(x, la.n, la.N + 1, "apply_L");
  GridFunction out(la.n, la.N);
  for (int t = 0; t < la.N; ++t) out[t] = x[t + 1] - la.A[static_cast<std::size_t>(t)] * x[t];
  return out;
}

ImageMembership image_membership(const LinearAnalysis& la, const GridFunction& h, double tol) {
  require_length(h, la.n, la.N, "image_membership");
  const double pairing = (la.Psi.values().array() * h.values().array()).sum();
  const double defect = std::abs(pairing) / std::max(1.0, h.norm());
  return {defect <= tol, defect};
}

GridFunction project_P(const LinearAnalysis& la, const GridFunction& x) {
  require_length(x, la.n, la.N + 1, "project_P");
  const Vec x0 = la.V * x[0];
  GridFunction out(la.n, la.N + 1);
  for (int t = 0; t <= la.N; ++t) out[t] = la.Phi[static_cast<std::size_t>(t)] * x0;
  return out;
}

GridFunction project_Q(const LinearAnalysis& la, const GridFunction& h) {
  require_length(h, la.n, la.N, "project_Q");
  const double pairing = (la.Psi.values().array() * h.values().array()).sum();
  return la.Psi * (pairing / la.psi_norm_sq);
}

GridFunction right_inverse(const LinearAnalysis& la, const ProblemSpec& spec,
                           const GridFunction& h, double image_tol) {
  require_length(h, la.n, la.N, "right_inverse");
  const int n = la.n;
  const int N = la.N;
  // Particular sums c(t) = sum_{i<t} Phi^{-1}(i+1) h(i).
  GridFunction c(n, N + 1);
  for (int t = 1; t <= N; ++t) c[t] = c[t - 1] + la.PhiInv[static_cast<std::size_t>(t)] * h[t - 1];

  Vec rhs = Vec::Zero(n);
  double scale = 0.0;
  for (int i = 1; i <= N; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Vec term = spec.B()[ui] * (la.Phi[ui] * c[i]);
    rhs -= term;
    scale += spec.B()[ui].norm() * la.Phi[ui].norm() * c[i].norm();
  }
  const Vec x0 = la.lambda_pinv * rhs;
  const double residual = (la.Lambda * x0 - rhs).norm();
  if (residual > image_tol * scale) {
    throw Error(ErrorKind::NotInImage,
                "right_inverse: right-hand side is not in the image of L (consistency residual " +
                    std::to_string(residual) + ")");
  }
  GridFunction x(n, N + 1);
  for (int t = 0; t <= N; ++t) x[t] = la.Phi[static_cast<std::size_t>(t)] * (x0 + c[t]);
  return x;
}

NormBound norm_bound(const LinearAnalysis& la, int probes, std::uint64_t seed) {
  const int n = la.n;
  const int N = la.N;
  NormBound out;
  for (int t = 0; t <= N; ++t) {
    double row = 0.0;
    for (int s = 0; s < N; ++s) row += spectral_norm(la.mp_iq.block(t * n, s * n, n, n));
    out.upper = std::max(out.upper, row);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int p = 0; p < probes; ++p) {
    GridFunction h(n, N);
    for (int s = 0; s < N; ++s) {
      Vec d(n);
      do {
        for (int k = 0; k < n; ++k) d(k) = normal(rng);
      } while (d.norm() == 0.0);
      h[s] = d / d.norm();
    }
    out.probe_lower = std::max(out.probe_lower, apply_mp_iq(la, h).norm());
  }
  return out;
}

GridFunction apply_mp_iq(const LinearAnalysis& la, const GridFunction& h) {
  require_length(h, la.n, la.N, "apply_mp_iq");
  return GridFunction::from_stacked(la.mp_iq * h.stacked(), la.n);
}

}  // namespace resbvp
