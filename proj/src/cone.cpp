// Cone-chart dynamics of the reduced flow: fixed points and linearizations,
// the closed-form heteroclinic orbit, the h0 shooting that realizes the
// one-parameter family, the linearization along the abelian solutions, and a
// Lyapunov-Perron iteration for the stable manifold as a cross-check on the
// shooting.

#include "g2inst/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "g2inst/io.hpp"
#include "g2inst/su2.hpp"

namespace g2inst {

Vec4 autonomous_F(const Vec4& z) {
  const double f = z[0], fp = z[1], g = z[2], h = z[3];
  return Vec4(2.0 * fp * (2.0 - 3.0 * h + 0.5 * g) + 2.0 * f * (g - 1.0),
              2.0 * f * (2.0 - 3.0 * h - 0.5 * g) - 2.0 * fp * (g + 1.0),
              6.0 * (f * f - fp * fp - g),
              2.0 * h - fp * fp - f * f - 4.0 * f * fp);
}

Mat4 autonomous_DF(const Vec4& z) {
  const double f = z[0], fp = z[1], g = z[2], h = z[3];
  Mat4 J;
  J << 2.0 * (g - 1.0), 2.0 * (2.0 - 3.0 * h + 0.5 * g), fp + 2.0 * f, -6.0 * fp,
      2.0 * (2.0 - 3.0 * h - 0.5 * g), -2.0 * (g + 1.0), -f - 2.0 * fp, -6.0 * f,
      12.0 * f, -12.0 * fp, -6.0, 0.0,
      -2.0 * f - 4.0 * fp, -2.0 * fp - 4.0 * f, 0.0, 2.0;
  return J;
}

Vec4 nonautonomous_G(const Vec4& z, double tau, double r0) {
  const double f = z[0], fp = z[1], g = z[2], h = z[3];
  const double amp = 36.0 * std::sqrt(3.0) * r0 * r0 * r0 * std::exp(-3.0 * tau);
  return amp * Vec4(fp * (h - 1.0 - 0.5 * g), f * (h + 0.5 * g - 1.0),
                    fp * fp - f * f + g, 0.5 * (fp * fp + f * f) - h);
}

Vec4 fixed_point(ConeFixedPoint which) {
  switch (which) {
    case ConeFixedPoint::origin:
      return Vec4::Zero();
    case ConeFixedPoint::plus:
      return Vec4(1.0 / 3.0, 1.0 / 3.0, 0.0, 1.0 / 3.0);
    case ConeFixedPoint::minus:
      return Vec4(-1.0 / 3.0, -1.0 / 3.0, 0.0, 1.0 / 3.0);
  }
  throw std::logic_error("unreachable");
}

FixedPointRecord linearize(ConeFixedPoint which) {
  FixedPointRecord rec;
  rec.which = which;
  rec.z = fixed_point(which);
  rec.DF = autonomous_DF(rec.z);

  Eigen::EigenSolver<Mat4> es(rec.DF);
  if (es.info() != Eigen::Success) throw EigenSolveFailure("cone fixed point eigensolve failed");
  const Eigen::Vector4cd ev = es.eigenvalues();
  for (int i = 0; i < 4; ++i)
    if (std::abs(ev(i).imag()) > 1e-12)
      throw EigenSolveFailure("cone fixed point has a complex eigenvalue");

  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(),
            [&](int i, int k) { return ev(i).real() > ev(k).real(); });
  for (int i = 0; i < 4; ++i) {
    rec.eigenvalues(i) = ev(order[static_cast<size_t>(i)]).real();
    rec.eigenvectors.col(i) =
        es.eigenvectors().col(order[static_cast<size_t>(i)]).real();
    if (rec.eigenvalues(i) < 0.0)
      rec.stable.push_back(i);
    else
      rec.unstable.push_back(i);
  }

  // Finite-difference cross-check of the analytic Jacobian.
  const double eps = 1e-6;
  Mat4 fd;
  for (int k = 0; k < 4; ++k) {
    Vec4 zp = rec.z, zm = rec.z;
    zp[k] += eps;
    zm[k] -= eps;
    fd.col(k) = (autonomous_F(zp) - autonomous_F(zm)) / (2.0 * eps);
  }
  rec.fd_error = (fd - rec.DF).cwiseAbs().maxCoeff();
  return rec;
}

Vec4 heteroclinic_oracle(double tau, int sign) {
  const double w = 1.0 / (3.0 + std::exp(-2.0 * tau));
  const double s = (sign >= 0) ? 1.0 : -1.0;
  return Vec4(s * w, s * w, 0.0, w);
}

// ---------------------------------------------------------------------------
// Shooting

const char* to_string(ShotClass c) {
  switch (c) {
    case ShotClass::converged_plus:
      return "converged_plus";
    case ShotClass::converged_minus:
      return "converged_minus";
    case ShotClass::diverged_up:
      return "diverged_up";
    case ShotClass::diverged_down:
      return "diverged_down";
    case ShotClass::undecided:
      return "undecided";
  }
  return "?";
}

ShotOutcome classify_trajectory(const ConnectionTrajectory& traj, double eps_conv,
                                double escape_norm) {
  ShotOutcome out;
  const Vec4 zp = fixed_point(ConeFixedPoint::plus);
  const Vec4 zm = fixed_point(ConeFixedPoint::minus);
  double dp = std::numeric_limits<double>::infinity(), dm = dp;
  size_t ip = 0, im = 0;
  for (size_t i = 0; i < traj.zs.size(); ++i) {
    const Vec4 z = pack(traj.zs[i]);
    const double ddp = (z - zp).norm(), ddm = (z - zm).norm();
    if (ddp < dp) {
      dp = ddp;
      ip = i;
    }
    if (ddm < dm) {
      dm = ddm;
      im = i;
    }
  }

  const bool escaped = traj.exit == ConnectionTrajectory::Exit::escaped ||
                       pack(traj.zs.back()).cwiseAbs().maxCoeff() >= escape_norm;
  if (escaped) {
    const double h_end = traj.run.y_end(3);
    out.escape_sign = (h_end > 0.0) ? 1 : (h_end < 0.0 ? -1 : 0);
  }

  std::ostringstream note;
  if (std::min(dp, dm) < eps_conv) {
    const bool plus = dp <= dm;
    out.cls = plus ? ShotClass::converged_plus : ShotClass::converged_minus;
    out.distance = plus ? dp : dm;
    out.exit_tau = traj.tau(plus ? ip : im);
    note << "entered the " << (plus ? "z+" : "z-") << " ball, closest approach " << out.distance;
    if (escaped) note << "; escaped later at tau = " << std::log(traj.t_end);
  } else if (out.escape_sign != 0) {
    out.cls = (out.escape_sign > 0) ? ShotClass::diverged_up : ShotClass::diverged_down;
    out.exit_tau = std::log(traj.t_end);
    out.distance = std::min(dp, dm);
    note << "escaped with h " << (out.escape_sign > 0 ? "> 0" : "< 0");
  } else {
    out.cls = ShotClass::undecided;
    out.distance = std::min(dp, dm);
    out.exit_tau = traj.tau(dp <= dm ? ip : im);
    note << "no ball entry and no escape before the horizon";
  }

  // Largest increase of g between consecutive recorded states in the far
  // field t >= r0 (where g should decay monotonically to 0), measured up to
  // the closest approach for runs that eventually peel off and escape.
  const size_t i_stop = (out.cls == ShotClass::converged_plus ||
                         out.cls == ShotClass::converged_minus)
                            ? (dp <= dm ? ip : im)
                            : (traj.zs.empty() ? 0 : traj.zs.size() - 1);
  double viol = 0.0;
  for (size_t i = 0; i + 1 <= i_stop; ++i) {
    if (traj.ts[i] < traj.params.r0) continue;
    viol = std::max(viol, traj.zs[i + 1].g - traj.zs[i].g);
  }
  out.g_monotone_violation = viol;
  out.note = note.str();
  return out;
}

namespace {

struct ShotRun {
  ConnectionTrajectory traj;
  ShotOutcome out;
};

ShotRun run_shot(double f0, double h0, double tau_end, const MetricProfile& profile,
                 const ShootOptions& opt, double t0) {
  IntegrateOptions iopt;
  iopt.rtol = opt.rtol;
  iopt.atol = opt.atol;
  iopt.escape_norm = opt.escape_norm;
  ShotRun r;
  r.traj = integrate_from_local(BundleIndex{1, 1, 1}, LocalData{f0, h0}, profile, t0,
                                std::exp(tau_end), opt.series_N, iopt);
  r.out = classify_trajectory(r.traj, opt.eps_conv, opt.escape_norm);
  return r;
}

}  // namespace

ShootResult shoot_h0(double f0, const MetricProfile& profile, const ShootOptions& opt,
                     int jobs) {
  const MetricParams& p = profile.params();
  const double t0 = (opt.t0 > 0.0) ? opt.t0 : 1e-3 * p.r0;
  if (opt.scan_points < 2) throw std::invalid_argument("h0 scan needs at least two points");

  // Scan for a sign change of the escape direction.
  std::vector<double> hs(static_cast<size_t>(opt.scan_points));
  for (int i = 0; i < opt.scan_points; ++i)
    hs[static_cast<size_t>(i)] =
        opt.scan_lo + (opt.scan_hi - opt.scan_lo) * i / (opt.scan_points - 1);
  std::vector<int> signs(hs.size(), 0);
  io::parallel_for(static_cast<int>(hs.size()), std::max(jobs, 1), [&](int i) {
    signs[static_cast<size_t>(i)] =
        run_shot(f0, hs[static_cast<size_t>(i)], opt.tau_end, profile, opt, t0).out.escape_sign;
  });

  int ilo = -1, ihi = -1, last = -1;
  for (size_t i = 0; i < signs.size(); ++i) {
    if (signs[i] == 0) continue;
    if (last >= 0 && signs[static_cast<size_t>(last)] * signs[i] < 0) {
      ilo = last;
      ihi = static_cast<int>(i);
      break;
    }
    last = static_cast<int>(i);
  }
  if (ilo < 0) {
    std::ostringstream msg;
    msg << "no sign change of the escape direction for f0 = " << f0 << " over h0 in ["
        << opt.scan_lo << ", " << opt.scan_hi << "]";
    throw NoBracket(msg.str());
  }

  double lo = hs[static_cast<size_t>(ilo)], hi = hs[static_cast<size_t>(ihi)];
  const int sign_lo = signs[static_cast<size_t>(ilo)];

  ShootResult res;
  res.f0 = f0;
  int bis = 0;
  while (true) {
    if (opt.tol_h0 > 0.0 && (hi - lo) <= opt.tol_h0) break;
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;  // floating-point floor
    ShotRun r = run_shot(f0, mid, opt.tau_end, profile, opt, t0);
    double te = opt.tau_end;
    int tries = 0;
    while (r.out.escape_sign == 0 && r.out.cls == ShotClass::undecided &&
           tries < opt.max_retries) {
      te += 6.0;
      r = run_shot(f0, mid, te, profile, opt, t0);
      ++tries;
    }
    ++bis;
    if (r.out.escape_sign == 0) {
      if (r.out.cls == ShotClass::converged_plus || r.out.cls == ShotClass::converged_minus) {
        // Direct hit: the midpoint run stays in the convergence ball.
        res.h0 = mid;
        res.outcome = r.out;
        res.bisections = bis;
        res.bracket = {lo, hi};
        res.trajectory = std::move(r.traj);
        return res;
      }
      std::ostringstream msg;
      msg << "h0 bisection stalled at f0 = " << f0 << ", h0 = " << mid
          << ": no escape and no ball entry after extending the horizon to tau = " << te;
      throw NoConvergence(msg.str());
    }
    if (r.out.escape_sign == sign_lo)
      lo = mid;
    else
      hi = mid;
  }

  ShotRun fin = run_shot(f0, lo, opt.tau_end, profile, opt, t0);
  res.h0 = lo;
  res.outcome = fin.out;
  res.bisections = bis;
  res.bracket = {lo, hi};
  res.trajectory = std::move(fin.traj);
  return res;
}

std::vector<SweepRow> family_sweep(const std::vector<double>& f0_grid,
                                   const MetricProfile& profile, const ShootOptions& opt,
                                   int jobs) {
  std::vector<SweepRow> rows(f0_grid.size());
  const MetricParams& p = profile.params();
  io::parallel_for(static_cast<int>(f0_grid.size()),
                   jobs == 0 ? io::hardware_jobs() : jobs, [&](int i) {
    const ShootResult r = shoot_h0(f0_grid[static_cast<size_t>(i)], profile, opt, 1);
    SweepRow& row = rows[static_cast<size_t>(i)];
    row.f0 = r.f0;
    row.h0 = r.h0;
    row.cls = r.outcome.cls;
    row.exit_tau = r.outcome.exit_tau;
    row.distance = r.outcome.distance;
    double worst = 0.0;
    for (size_t k = 0; k < r.trajectory.ts.size(); ++k) {
      const double t = r.trajectory.ts[k];
      const InvariantConnection c = embed_reduced(r.trajectory.zs[k]);
      const ConnectionState zd = r.trajectory.state_dot(t);
      const InvariantConnection cd = embed_reduced(zd);
      worst = std::max(worst, curvature_norm(c, cd, profile.at(t), p));
    }
    row.max_curvature = worst;
  });
  return rows;
}

double far_field_translate_distance(const ConnectionTrajectory& traj, int sign, double t_end,
                                    double decades) {
  if (traj.ts.size() < 2) throw NumericError("trajectory too short for a far-field window");
  double t_hi = traj.ts.back();
  if (t_end <= 0.0) {
    const ShotOutcome oc = classify_trajectory(traj);
    if (oc.cls == ShotClass::converged_plus || oc.cls == ShotClass::converged_minus)
      t_hi = std::exp(oc.exit_tau);
  } else {
    t_hi = std::min(t_end, t_hi);
  }
  const double t_lo = t_hi * std::pow(10.0, -decades);
  if (t_lo <= traj.ts.front())
    throw NumericError("trajectory does not span the requested far-field window");
  const double tau_a = std::log(t_lo), tau_b = std::log(t_hi);
  const double h_a = traj.state(t_lo).h;
  if (!(h_a > 0.0 && h_a < 1.0 / 3.0)) return std::numeric_limits<double>::infinity();
  const double sigma = tau_a + 0.5 * std::log(1.0 / h_a - 3.0);
  double sup = 0.0;
  const int n = 201;
  for (int i = 0; i < n; ++i) {
    const double tau = tau_a + (tau_b - tau_a) * i / (n - 1);
    const double t = std::min(std::exp(tau), t_hi);
    const Vec4 z = pack(traj.state(t));
    sup = std::max(sup, (z - heteroclinic_oracle(tau - sigma, sign)).cwiseAbs().maxCoeff());
  }
  return sup;
}

// ---------------------------------------------------------------------------
// Linearization along the abelian solutions

Mat4 stage2_linearization(const MetricProfile& profile, double t, double g_val) {
  const MetricParams& p = profile.params();
  const MetricSample s = profile.at(t);
  const CoefficientTriple k = coefficients(s, p, Channel::m_channel);
  const double da2 = s.da * s.da;
  const double den1 = 2.0 * da2 * s.da * s.db * s.db;
  const double den2 = 2.0 * da2 * da2 * s.db;
  const double Pt = k.Phi / den1, St = k.Psi / den1, Ct = k.Chi / den1;
  const double Ph = k.Phi / den2, Sh = k.Psi / den2;
  const double g = g_val;
  Mat4 A = Mat4::Zero();
  A(0, 0) = Ct * (g - 1.0);
  A(0, 1) = Pt + 0.5 * g * (Pt + St);
  A(1, 0) = Pt - 0.5 * g * (Pt + St);
  A(1, 1) = -Ct * (g + 1.0);
  A(2, 2) = Sh - Ph;
  A(3, 3) = Ph + Sh;
  return A;
}

std::pair<double, double> stage2_region_functionals(const MetricProfile& profile, double t,
                                                    double g_val) {
  const MetricParams& p = profile.params();
  const MetricSample s = profile.at(t);
  const CoefficientTriple k = coefficients(s, p, Channel::m_channel);
  const double den1 = 2.0 * s.da * s.da * s.da * s.db * s.db;
  const double Pt = k.Phi / den1, St = k.Psi / den1, Ct = k.Chi / den1;
  const double S1 = 3.0 * Pt + 0.5 * g_val * (8.0 * Ct - 5.0 * (Pt + St));
  const double S2 = -g_val * (Pt + St + 2.0 * Ct);
  return {S1, S2};
}

// ---------------------------------------------------------------------------
// Lyapunov-Perron iteration

namespace {

struct SpectralData {
  Vec4 lambda;   // descending
  Mat4 V;        // integer eigenvector columns matching lambda
  Mat4 Vinv;
  std::vector<int> stable, unstable;
};

SpectralData spectral_data(ConeFixedPoint which) {
  SpectralData sd;
  switch (which) {
    case ConeFixedPoint::origin:
      sd.lambda = Vec4(2.0, 2.0, -6.0, -6.0);
      sd.V << 1, 0, 1, 0,
              1, 0, -1, 0,
              0, 0, 0, 1,
              0, 1, 0, 0;
      break;
    case ConeFixedPoint::plus:
      sd.lambda = Vec4(4.0, -2.0, -2.0, -8.0);
      sd.V << -1, 1, 1, -1,
              -1, 1, -1, 1,
              0, 0, 2, 4,
              2, 1, 0, 0;
      break;
    case ConeFixedPoint::minus:
      sd.lambda = Vec4(4.0, -2.0, -2.0, -8.0);
      sd.V << 1, -1, -1, 1,
              1, -1, 1, -1,
              0, 0, 2, 4,
              2, 1, 0, 0;
      break;
  }
  sd.Vinv = sd.V.inverse();
  for (int i = 0; i < 4; ++i)
    (sd.lambda(i) < 0.0 ? sd.stable : sd.unstable).push_back(i);
  return sd;
}

// e^{sA} restricted to the chosen spectral columns.
Mat4 propagator(const SpectralData& sd, double s, const std::vector<int>& cols) {
  Mat4 E = Mat4::Zero();
  for (int i : cols) E(i, i) = std::exp(sd.lambda(i) * s);
  return sd.V * E * sd.Vinv;
}

}  // namespace

ManifoldSample stable_manifold_iteration(ConeFixedPoint which, const Vec4& stable_component,
                                         double tau0, const ManifoldOptions& opt) {
  const SpectralData sd = spectral_data(which);
  const Vec4 zfp = fixed_point(which);
  const Mat4 A = autonomous_DF(zfp);

  const int n = opt.grid_points;
  const double dtau = opt.grid_length / (n - 1);
  std::vector<double> taus(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) taus[static_cast<size_t>(i)] = tau0 + i * dtau;

  auto correction = opt.correction;
  if (!correction) {
    const double r0 = opt.r0;
    correction = [r0](const Vec4& z, double tau) { return nonautonomous_G(z, tau, r0); };
  }

  // Project the prescribed component onto the stable subspace so that the
  // boundary term contains no unstable contamination.
  const Vec4 xs = propagator(sd, 0.0, sd.stable) * stable_component;

  std::vector<Vec4> x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    x[static_cast<size_t>(i)] = propagator(sd, taus[static_cast<size_t>(i)] - tau0, sd.stable) * xs;

  ManifoldSample out;
  double prev_diff = 0.0;
  for (int it = 0; it < opt.max_iter; ++it) {
    // Nonlinear load at the current iterate.
    std::vector<Vec4> load(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      const Vec4& xi = x[static_cast<size_t>(i)];
      const Vec4 z = zfp + xi;
      load[static_cast<size_t>(i)] =
          autonomous_F(z) - A * xi + correction(z, taus[static_cast<size_t>(i)]);
    }
    double diff = 0.0;
    std::vector<Vec4> xn(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      Vec4 acc = propagator(sd, taus[static_cast<size_t>(i)] - tau0, sd.stable) * xs;
      for (int k = 0; k < n; ++k) {
        const double w = (k == 0 || k == n - 1) ? 0.5 * dtau : dtau;
        const double s = taus[static_cast<size_t>(i)] - taus[static_cast<size_t>(k)];
        const Mat4 K = (s > 0.0) ? propagator(sd, s, sd.stable)
                                 : -propagator(sd, s, sd.unstable);
        acc += w * (K * load[static_cast<size_t>(k)]);
      }
      xn[static_cast<size_t>(i)] = acc;
      diff = std::max(diff, (acc - x[static_cast<size_t>(i)]).cwiseAbs().maxCoeff());
    }
    x.swap(xn);
    out.iterations = it + 1;
    if (it > 0 && prev_diff > 0.0) {
      const double gamma = diff / prev_diff;
      out.gamma.push_back(gamma);
      if (gamma > 1.0 && diff > 1e3 * opt.fp_tol) {
        std::ostringstream msg;
        msg << "stable-manifold iteration expanded (gamma = " << gamma << ") at tau0 = " << tau0;
        throw NoContraction(msg.str());
      }
    }
    prev_diff = diff;
    if (diff < opt.fp_tol) {
      out.converged = true;
      break;
    }
  }
  out.state_tau0 = zfp + x[0];
  return out;
}

std::function<Vec4(const Vec4&, double)> profile_pullback_correction(
    const MetricProfile& profile) {
  const MetricProfile* prof = &profile;
  return [prof](const Vec4& z, double tau) {
    const double t = std::exp(tau);
    const ConnectionState zd = reduced_rhs(unpack_state(z), prof->at(t), prof->params());
    return t * pack(zd) - autonomous_F(z);
  };
}

}  // namespace g2inst
