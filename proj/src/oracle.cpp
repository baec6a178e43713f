#include "resbvp/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace resbvp {

FullSystem::FullSystem(ProblemSpec spec)
    : spec_(std::move(spec)), dim_(spec_.N() + spec_.n()), linear_(Mat::Zero(dim_, dim_)) {
  const int n = spec_.n();
  const int N = spec_.N();
  for (int t = 0; t < N; ++t) {
    linear_(t, t + n) = 1.0;
    for (int j = 0; j < n; ++j) linear_(t, t + j) += spec_.a()(j, t);
  }
  for (int k = 0; k <= N; ++k) {
    const Mat& Bk = spec_.B()[static_cast<std::size_t>(k)];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) linear_(N + i, j + k) += Bk(i, j);
    }
  }
}

Vec FullSystem::residual(const Vec& y) const {
  if (y.size() != dim_) throw Error(ErrorKind::Input, "FullSystem: wrong vector length");
  Vec r = linear_ * y;
  const int m = spec_.m();
  for (int t = 0; t < spec_.N(); ++t) r(t) -= spec_.g(t, y(t + m - 1));
  return r;
}

Mat FullSystem::jacobian(const Vec& y) const {
  Mat J = linear_;
  const int m = spec_.m();
  for (int t = 0; t < spec_.N(); ++t) {
    const double x = y(t + m - 1);
    const double h = 1e-6 * (1.0 + std::abs(x));
    J(t, t + m - 1) -= (spec_.g(t, x + h) - spec_.g(t, x - h)) / (2.0 * h);
  }
  return J;
}

namespace {

double sup_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

std::optional<NewtonResult> newton_solve(const FullSystem& fs, const Vec& y0,
                                         const NewtonOptions& opts) {
  Vec y = y0;
  Vec r;
  try {
    r = fs.residual(y);
  } catch (const DomainError&) {
    return std::nullopt;
  }
  for (int it = 0; it <= opts.max_iter; ++it) {
    if (!r.allFinite()) return std::nullopt;
    if (sup_norm(r) <= opts.tol) return NewtonResult{y, it, sup_norm(r)};
    if (it == opts.max_iter) break;

    Mat J;
    try {
      J = fs.jacobian(y);
    } catch (const DomainError&) {
      return std::nullopt;
    }
    Eigen::ColPivHouseholderQR<Mat> qr(J);
    const Vec step = qr.rank() == J.rows()
                         ? Vec(qr.solve(-r))
                         : Vec(Eigen::CompleteOrthogonalDecomposition<Mat>(J).solve(-r));

    const double f0 = 0.5 * r.squaredNorm();
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 50; ++k) {
      try {
        const Vec trial = y + lambda * step;
        const Vec rt = fs.residual(trial);
        // Armijo on f = |R|^2 / 2 with directional derivative -2f.
        if (rt.allFinite() && 0.5 * rt.squaredNorm() <= (1.0 - 2e-4 * lambda) * f0) {
          y = trial;
          r = rt;
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
      }
      lambda *= 0.5;
    }
    if (!accepted) return std::nullopt;
  }
  return std::nullopt;
}

std::vector<MultistartSolution> multistart(const FullSystem& fs, int K, double box,
                                           std::uint64_t seed, const NewtonOptions& opts,
                                           int threads) {
  if (K < 1) throw Error(ErrorKind::Input, "multistart needs at least one start");
  std::vector<std::optional<NewtonResult>> runs(static_cast<std::size_t>(K));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < K; k = next++) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(k)};
      std::mt19937_64 rng(seq);
      std::uniform_real_distribution<double> uni(-box, box);
      Vec y0(fs.dim());
      for (int i = 0; i < fs.dim(); ++i) y0(i) = uni(rng);
      runs[static_cast<std::size_t>(k)] = newton_solve(fs, y0, opts);
    }
  };
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, K);
  std::vector<std::thread> pool;
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::vector<MultistartSolution> out;
  for (int k = 0; k < K; ++k) {
    const auto& run = runs[static_cast<std::size_t>(k)];
    if (!run) continue;
    const bool seen = std::any_of(out.begin(), out.end(), [&](const MultistartSolution& s) {
      const double scale = std::max(sup_norm(s.y), sup_norm(run->y));
      return sup_norm(s.y - run->y) <= 1e-6 * (1.0 + scale);
    });
    if (!seen) out.push_back({run->y, k, run->iterations, run->residual});
  }
  return out;
}

Nullity linear_nullity(const ProblemSpec& spec, double rank_tol) {
  const FullSystem fs(spec);
  Eigen::JacobiSVD<Mat> svd(fs.linear_matrix(), Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double threshold = rank_tol * std::max(s(0), 1.0);
  Nullity out;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) < threshold) ++out.nullity;
  }
  out.basis = svd.matrixV().rightCols(out.nullity);
  return out;
}

namespace {

Mat random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = normal(rng);
  Eigen::HouseholderQR<Mat> qr(G);
  return qr.householderQ() * Mat::Identity(n, n);
}

ProblemSpec random_instance(std::uint64_t seed, int n, int N, int kernel_dim) {
  if (n < 1 || N < 3) throw Error(ErrorKind::Input, "random instance needs n >= 1, N >= 3");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> lag(1, n);

  for (;;) {
    Mat a(n, N);
    for (int t = 0; t < N; ++t) {
      a(0, t) = (coin(rng) ? 1.0 : -1.0) * mag(rng);
      for (int j = 1; j < n; ++j) a(j, t) = uni(rng);
    }
    std::vector<Mat> Phi(static_cast<std::size_t>(N + 1), Mat::Identity(n, n));
    for (int t = 0; t < N; ++t) {
      Mat A = Mat::Zero(n, n);
      for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
      for (int j = 0; j < n; ++j) A(n - 1, j) = -a(j, t);
      Phi[static_cast<std::size_t>(t + 1)] = A * Phi[static_cast<std::size_t>(t)];
    }
    std::vector<Mat> B(static_cast<std::size_t>(N + 1));
    Mat partial = Mat::Zero(n, n);
    for (int i = 0; i < N; ++i) {
      Mat Bi(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) Bi(r, c) = uni(rng);
      B[static_cast<std::size_t>(i)] = Bi;
      partial += Bi * Phi[static_cast<std::size_t>(i)];
    }
    const Mat W = random_orthogonal(n, rng);
    const Mat V = random_orthogonal(n, rng);
    Vec sigma(n);
    for (int i = 0; i < n; ++i) sigma(i) = i < n - kernel_dim ? mag(rng) : 0.0;
    const Mat target = W * sigma.asDiagonal() * V.transpose();
    B[static_cast<std::size_t>(N)] =
        (target - partial) * Phi[static_cast<std::size_t>(N)].partialPivLu().inverse();
    const int m = lag(rng);
    if (!boundary_full_row_rank(B)) continue;
    return ProblemSpec(n, N, m, std::move(a), std::move(B), Expr());
  }
}

}  // namespace

ProblemSpec random_resonant_instance(std::uint64_t seed, int n, int N) {
  return random_instance(seed, n, N, 1);
}

ProblemSpec random_nonresonant_instance(std::uint64_t seed, int n, int N) {
  return random_instance(seed, n, N, 0);
}

}  // namespace resbvp
