#include "resbvp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace resbvp {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// F(x)(t) = (0, ..., 0, g(t, [x(t)]_m)), t = 0..N-1.
GridFunction nonlinear_term(const BifurcationProblem& bp, const GridFunction& x) {
  const int n = bp.la.n;
  const int m = bp.la.m;
  GridFunction F(n, bp.la.N);
  for (int t = 0; t < bp.la.N; ++t) F[t](n - 1) = bp.spec.g(t, x[t](m - 1));
  return F;
}

GridFunction along_kernel(const BifurcationProblem& bp, double alpha) { return bp.la.S * alpha; }

double sup_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct Residuals {
  ScalarTrajectory y;
  double recurrence = 0.0;
  double boundary = 0.0;
};

// Worst of the scalar residuals of y and the grid-form residuals of x, so an
// x off the companion structure cannot pass.
Residuals residuals_of(const BifurcationProblem& bp, const GridFunction& x) {
  Residuals r;
  r.y = grid_to_scalar(x, bp.spec, INFINITY);
  const GridFunction grid = apply_L(bp.la, x) - nonlinear_term(bp, x);
  r.recurrence = std::max(sup_abs(recurrence_residual(bp.spec, r.y)), grid.values().cwiseAbs().maxCoeff());
  r.boundary = std::max(sup_abs(scalar_boundary_residual(bp.spec, r.y)),
                        sup_abs(boundary_residual(bp.spec, x)));
  return r;
}

// Newton on z = [v]_m restricted to t = 0..N-1: z = R G(alpha s + z), where R
// collects the rows of M_p (I - Q) feeding the m-th components.
bool reduced_newton(const BifurcationProblem& bp, double alpha, Vec& z, double tol,
                    int max_iter, int& iterations) {
  const int n = bp.la.n;
  const int N = bp.la.N;
  const int m = bp.la.m;
  Mat R(N, N);
  for (int t = 0; t < N; ++t) {
    for (int s = 0; s < N; ++s) R(t, s) = bp.la.mp_iq(t * n + (m - 1), s * n + (n - 1));
  }
  const Vec sm = bp.la.s_m();
  auto G = [&](const Vec& zz) {
    Vec out(N);
    for (int t = 0; t < N; ++t) out(t) = bp.spec.g(t, alpha * sm(t) + zz(t));
    return out;
  };
  auto defect = [&](const Vec& zz) { return Vec(zz - R * G(zz)); };

  Vec phi = defect(z);
  for (int it = 0; it < max_iter; ++it) {
    if (sup_abs(phi) <= tol * (1.0 + sup_abs(z))) {
      iterations += it;
      return true;
    }
    Mat J = Mat::Identity(N, N);
    for (int s = 0; s < N; ++s) {
      const double xs = alpha * sm(s) + z(s);
      const double h = 1e-6 * (1.0 + std::abs(xs));
      const double dg = (bp.spec.g(s, xs + h) - bp.spec.g(s, xs - h)) / (2.0 * h);
      J.col(s) -= R.col(s) * dg;
    }
    Eigen::ColPivHouseholderQR<Mat> qr(J);
    Vec step = qr.rank() == N ? Vec(qr.solve(-phi))
                              : Vec(Eigen::CompleteOrthogonalDecomposition<Mat>(J).solve(-phi));
    const double f0 = phi.squaredNorm();
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      try {
        const Vec trial = z + lambda * step;
        const Vec pt = defect(trial);
        if (pt.squaredNorm() <= (1.0 - 1e-4 * lambda) * f0 || pt.squaredNorm() == 0.0) {
          z = trial;
          phi = pt;
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      iterations += it + 1;
      return sup_abs(phi) <= tol * (1.0 + sup_abs(z));
    }
  }
  iterations += max_iter;
  return sup_abs(phi) <= tol * (1.0 + sup_abs(z));
}

}  // namespace

BifurcationProblem make_bifurcation_problem(const LinearAnalysis& la, const ProblemSpec& spec,
                                            const ConditionReport& report,
                                            const SolverOptions& opts) {
  BifurcationProblem bp{la, spec, report.cert, report.passed};
  const Certificate& c = report.cert;
  if (c.s_min > 0.0) {
    bp.alpha_star = (c.c + la.A_bar * c.g_sup_d) / c.s_min;
    bp.r_star = la.A_bar * c.g_sup_d;
  }
  if (c.d > 0.0) {
    std::vector<int> ts(static_cast<std::size_t>(spec.N()));
    std::iota(ts.begin(), ts.end(), 0);
    bp.lipschitz = lipschitz_estimate(spec.g(), ts, -c.d, c.d, opts.samples);
  }
  bp.contraction_q = la.A_bar * bp.lipschitz;
  return bp;
}

GridFunction aux_map(const BifurcationProblem& bp, double alpha, const GridFunction& v) {
  return apply_mp_iq(bp.la, nonlinear_term(bp, along_kernel(bp, alpha) + v));
}

AuxiliaryResult auxiliary_fixed_point(const BifurcationProblem& bp, double alpha,
                                      const SolverOptions& opts, const GridFunction* warm) {
  AuxiliaryResult res;
  GridFunction v = warm ? *warm : GridFunction(bp.la.n, bp.la.N + 1);
  auto converged = [&](const GridFunction& cur, const GridFunction& next) {
    return (next - cur).norm() <= opts.aux_tol * (1.0 + next.norm());
  };

  const bool contracting = bp.contraction_q < 1.0;
  const double theta = contracting ? 1.0 : opts.theta;
  res.method = contracting ? "iteration" : "damped";
  const int budget = contracting ? opts.max_iter : std::min(opts.max_iter, 50);
  double prev_step = -1.0;
  for (int k = 0; k < budget; ++k) {
    const GridFunction p = aux_map(bp, alpha, v);
    const GridFunction next = v * (1.0 - theta) + p * theta;
    const double step = (next - v).norm();
    if (prev_step > 0.0 && step > 0.0) res.observed_rate = std::max(res.observed_rate, step / prev_step);
    prev_step = step;
    const bool done = converged(v, p);
    v = next;
    res.iterations = k + 1;
    if (done) {
      res.v = v;
      res.defect = (aux_map(bp, alpha, v) - v).norm();
      return res;
    }
  }

  if (!contracting) {
    res.method = "newton";
    const int m = bp.la.m;
    Vec z(bp.la.N);
    for (int t = 0; t < bp.la.N; ++t) z(t) = v[t](m - 1);
    if (!z.allFinite() || v.norm() > 10.0 * (1.0 + bp.r_star)) z.setZero();
    if (warm && v.norm() > 10.0 * (1.0 + bp.r_star)) {
      for (int t = 0; t < bp.la.N; ++t) z(t) = (*warm)[t](m - 1);
    }
    int its = 0;
    const bool ok = reduced_newton(bp, alpha, z, 0.1 * opts.aux_tol, opts.max_iter, its);
    res.iterations += its;
    if (ok) {
      GridFunction x = along_kernel(bp, alpha);
      for (int t = 0; t < bp.la.N; ++t) x[t](m - 1) += z(t);
      v = apply_mp_iq(bp.la, nonlinear_term(bp, x));
      // One polishing pass of the fixed-point map on the full grid.
      v = aux_map(bp, alpha, v);
      res.v = v;
      res.defect = (aux_map(bp, alpha, v) - v).norm();
      if (res.defect <= 10.0 * opts.aux_tol * (1.0 + v.norm())) return res;
    }
  }
  if (warm) {
    AuxiliaryResult again = auxiliary_fixed_point(bp, alpha, opts, nullptr);
    again.iterations += res.iterations;
    return again;
  }
  throw Error(ErrorKind::NoConvergence,
              "auxiliary fixed point did not converge at alpha=" + fmt(alpha) + " after " +
                  std::to_string(res.iterations) + " iterations");
}

double bifurcation_value(const BifurcationProblem& bp, double alpha, const GridFunction& v) {
  const Vec pn = bp.la.psi_n();
  const Vec sm = bp.la.s_m();
  const int m = bp.la.m;
  double B = 0.0;
  for (int i = 0; i < bp.la.N; ++i) B += pn(i) * bp.spec.g(i, alpha * sm(i) + v[i](m - 1));
  return B;
}

SolveResult solve(const BifurcationProblem& bp, const SolverOptions& opts) {
  SolveResult out;
  const int n = bp.la.n;
  const int N = bp.la.N;

  auto finish = [&](double alpha, const GridFunction& v) {
    out.alpha = alpha;
    out.v = v;
    out.x = along_kernel(bp, alpha) + v;
    const Residuals r = residuals_of(bp, out.x);
    out.y = r.y;
    out.recurrence_residual = r.recurrence;
    out.boundary_residual = r.boundary;
  };

  if (bp.spec.g().is_constant_zero() || (bp.cert.d > 0.0 && bp.cert.g_sup_d == 0.0)) {
    finish(0.0, GridFunction(n, N + 1));
    out.notes.push_back("g vanishes: trivial solution");
    return out;
  }
  if (!bp.certified) {
    throw Error(ErrorKind::Input, "solve requires a passing certificate");
  }

  const double as = bp.alpha_star;
  const double sgn = bp.cert.orientation == Orientation::Standard ? 1.0 : -1.0;
  AuxiliaryResult aux_hi = auxiliary_fixed_point(bp, as, opts);
  AuxiliaryResult aux_lo = auxiliary_fixed_point(bp, -as, opts);
  out.aux_iterations = aux_hi.iterations + aux_lo.iterations;
  const double lo = -as, hi = as;
  const double B_hi = bifurcation_value(bp, hi, aux_hi.v);
  const double B_lo = bifurcation_value(bp, lo, aux_lo.v);
  out.alpha_lo = lo;
  out.alpha_hi = hi;
  out.B_lo = B_lo;
  out.B_hi = B_hi;
  out.history.push_back({lo, B_lo});
  out.history.push_back({hi, B_hi});
  if (!(sgn * B_hi > 0.0 && sgn * B_lo < 0.0)) {
    if (B_hi == 0.0 || B_lo == 0.0) {
      const bool at_hi = B_hi == 0.0;
      finish(at_hi ? hi : lo, at_hi ? aux_hi.v : aux_lo.v);
      return out;
    }
    throw Error(ErrorKind::BoundarySignViolation,
                "B(alpha*) = " + fmt(B_hi) + " and B(-alpha*) = " + fmt(B_lo) +
                    " contradict the certified " + to_string(bp.cert.orientation) +
                    " orientation");
  }
  if (aux_hi.method != "iteration" || aux_lo.method != "iteration") {
    out.notes.push_back("auxiliary equation is not a contraction; v_alpha follows the "
                        "continuation branch from the bracket endpoints");
  }

  const double abs_psi = bp.la.psi_n().cwiseAbs().sum();
  const double B_tol = opts.solve_tol * (1.0 + abs_psi * bp.cert.g_sup_d);
  const GridFunction cold(n, N + 1);
  std::string stall;

  auto accept = [&](double a, const GridFunction& v, double lo, double hi) {
    finish(a, v);
    if (out.recurrence_residual > opts.solve_tol || out.boundary_residual > opts.solve_tol) {
      return false;
    }
    out.alpha_lo = lo;
    out.alpha_hi = hi;
    return true;
  };

  // One bisection pass. With `continuation` each auxiliary solve starts from
  // the nearer bracket end; otherwise every solve starts from v = 0.
  auto bisect = [&](bool continuation) {
    double lo = -as, hi = as;
    double B_lo = out.history[0].value, B_hi = out.history[1].value;
    GridFunction v_lo = aux_lo.v, v_hi = aux_hi.v;
    for (int step = 0; step < opts.max_bisect; ++step) {
      const double mid = 0.5 * (lo + hi);
      const GridFunction* start = &cold;
      if (continuation) start = std::abs(mid - lo) <= std::abs(hi - mid) ? &v_lo : &v_hi;
      const AuxiliaryResult aux = auxiliary_fixed_point(bp, mid, opts, start);
      out.aux_iterations += aux.iterations;
      const double Bm = bifurcation_value(bp, mid, aux.v);
      out.history.push_back({mid, Bm});
      out.bisection_steps++;

      if (std::abs(Bm) <= B_tol && accept(mid, aux.v, lo, hi)) return true;
      if (hi - lo < 1e-14 * as) {
        // B can jump across the collapsed bracket when the auxiliary equation
        // has several fixed points; retry the bracket points on other branches.
        const GridFunction* starts[] = {&cold, &v_lo, &v_hi};
        for (double a : {mid, lo, hi}) {
          for (const GridFunction* s0 : starts) {
            AuxiliaryResult alt;
            try {
              alt = auxiliary_fixed_point(bp, a, opts, s0);
            } catch (const Error&) {
              continue;
            }
            out.aux_iterations += alt.iterations;
            if (std::abs(bifurcation_value(bp, a, alt.v)) <= B_tol && accept(a, alt.v, lo, hi)) {
              out.notes.push_back("B is discontinuous at the root; solution taken from another "
                                  "branch of the auxiliary equation");
              return true;
            }
          }
        }
        stall = "bracket collapsed at alpha=" + fmt(mid) + " with B=" + fmt(Bm);
        return false;
      }
      if ((Bm > 0.0) == (B_hi > 0.0)) {
        hi = mid;
        B_hi = Bm;
        v_hi = aux.v;
      } else {
        lo = mid;
        B_lo = Bm;
        v_lo = aux.v;
      }
      out.B_lo = B_lo;
      out.B_hi = B_hi;
    }
    stall = "bisection cap reached";
    return false;
  };

  if (bisect(true)) return out;
  const std::string first = stall;
  if (aux_hi.method != "iteration" || aux_lo.method != "iteration") {
    out.notes.push_back("continuation pass stalled (" + first + "); restarted with v = 0 "
                        "initial guesses");
    out.history.resize(2);
    if (bisect(false)) return out;
  }
  throw Error(ErrorKind::BisectionStall, first + (stall == first ? "" : "; cold pass: " + stall));
}

}  // namespace resbvp
