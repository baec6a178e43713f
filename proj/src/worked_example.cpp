#include "resbvp/worked_example.hpp"

#include <cmath>
#include <cstdio>

#include "resbvp/conditions.hpp"

namespace resbvp {

ProblemSpec worked_example_spec(Expr g) {
  const int n = 2;
  const int N = 8;
  Mat a = Mat::Ones(n, N);
  std::vector<Mat> B(N + 1, Mat::Zero(n, n));
  B[2] << 0, 0, 1, 0;
  B[5] << 1, 0, 0, 0;
  B[8] << 1, 1, 1, 1;
  return ProblemSpec(n, N, 2, std::move(a), std::move(B), std::move(g));
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

LogFamily log_family(const LinearAnalysis& la, double c, double beta) {
  if (!(c > std::exp(1.0) - 1.0)) throw Error(ErrorKind::Input, "log family needs ln(1+c) > 1");
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorKind::Input, "log family needs 0 < beta < 1");
  LogFamily lf;
  lf.c = c;
  lf.beta = beta;
  lf.L = std::log1p(c);

  const SignSets sets = sign_sets(la);
  double s_min = INFINITY;
  for (int t : sets.o) s_min = std::min(s_min, std::abs(sets.s_m(t)));
  lf.ratio = sets.s_m.cwiseAbs().maxCoeff() / s_min;

  const double A = la.A_bar;
  auto f = [&](double x) {
    return std::exp(x) * (1.0 + c) - 1.0 - (c * lf.ratio + (1.0 + lf.ratio) * A * lf.L * x * x);
  };
  // f is eventually positive; locate the last sign change on a fine grid.
  double last_nonpos = 0.0;
  const double h = 1e-3;
  for (double x = 0.0; x <= 200.0; x += h) {
    if (f(x) <= 0.0) last_nonpos = x;
  }
  double lo = last_nonpos, hi = last_nonpos + h;
  for (int k = 0; k < 200 && hi - lo > 1e-14 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) <= 0.0 ? lo : hi) = mid;
  }
  lf.x_c = hi;
  lf.gamma = std::max(lf.x_c, lf.L / (lf.L - 1.0)) + 0.25;
  lf.d = std::exp(lf.gamma) * (1.0 + c) - 1.0;

  const std::string C = num(c), Lb = num(lf.L), B = num(beta), G = num(lf.gamma);
  const std::string text = "if(x <= -" + C + ", " + B + "*ln(1+abs(x)), if(x <= 0, " + Lb +
                           "*(" + B + "/2)*(1+(x/" + C + ")^2), if(x <= " + C + ", " + Lb +
                           "*(" + B + "/2+(" + G + "-" + B + "/2)*(x/" + C + ")^2), " + G +
                           "*ln(1+x))))";
  lf.g = Expr::parse(text);
  return lf;
}

std::vector<GoldenCheck> worked_example_golden_checks(const LinearAnalysis& la) {
  std::vector<GoldenCheck> out;
  Mat lambda(2, 2);
  lambda << -1, -2, -1, -2;
  const double lerr = (la.Lambda - lambda).cwiseAbs().maxCoeff();
  out.push_back({"Lambda", lerr <= 1e-12, lerr});

  Vec u_ref(2), w_ref(2);
  u_ref << 2, -1;
  w_ref << -1, 1;
  const double mu_u = u_ref.dot(la.u) / la.u.squaredNorm();
  const double mu_w = w_ref.dot(la.w) / la.w.squaredNorm();
  const double uerr = (la.u * mu_u - u_ref).norm();
  const double werr = (la.w * mu_w - w_ref).norm();
  out.push_back({"kernel basis", uerr <= 1e-12, uerr});
  out.push_back({"cokernel basis", werr <= 1e-12, werr});
  const LinearAnalysis scaled = rescale_basis(la, mu_u, mu_w);

  double serr = 0.0;
  for (int t = 0; t <= 8; ++t) {
    Vec ref(2);
    switch (t % 3) {
      case 0: ref << 2, -1; break;
      case 1: ref << -1, -1; break;
      default: ref << -1, 2; break;
    }
    serr = std::max(serr, (Vec(scaled.S[t]) - ref).cwiseAbs().maxCoeff());
  }
  out.push_back({"S table", serr <= 1e-12, serr});

  double perr = 0.0;
  for (int t = 0; t < 8; ++t) {
    Vec ref = Vec::Zero(2);
    if (t == 2) ref << 1, 1;
    if (t == 3) ref << 0, -1;
    if (t == 4) ref << -1, 0;
    perr = std::max(perr, (Vec(scaled.Psi[t]) - ref).cwiseAbs().maxCoeff());
  }
  out.push_back({"Psi table", perr <= 1e-12, perr});

  const SignSets s = sign_sets(la);
  const bool sets_ok = s.opp == std::vector<int>{2} && s.omm == std::vector<int>{3} &&
                       s.opm.empty() && s.omp.empty() && s.o0.empty() && s.ambiguous.empty();
  out.push_back({"sign sets", sets_ok, sets_ok ? 0.0 : 1.0});
  return out;
}

}  // namespace resbvp
