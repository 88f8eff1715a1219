// End-to-end verification.  Each check recomputes one headline result and
// holds it to a tolerance pinned right here; the shared tuned profile is
// built once up front and its cost billed to the metric check.

#include "g2inst/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "g2inst/cone.hpp"
#include "g2inst/instanton.hpp"
#include "g2inst/io.hpp"
#include "g2inst/metric.hpp"
#include "g2inst/ode.hpp"
#include "g2inst/reference.hpp"
#include "g2inst/sivp.hpp"
#include "g2inst/su2.hpp"
#include "g2inst/types.hpp"

namespace g2inst::verify {
namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<size_t>(n));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i)
    g[static_cast<size_t>(i)] = std::exp(llo + (lhi - llo) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

template <class Body>
CheckResult timed(const std::string& name, Body&& body) {
  CheckResult r;
  r.name = name;
  const auto start = Clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

// Artifacts threaded through the checks: the tuned profile feeds most of
// them, the family sweep feeds the parity and manifold checks.
struct Shared {
  MetricParams p{1, 1, 1.0, 1.0};
  double beta_ac = 0.0;
  std::unique_ptr<IntegratedProfile> prof;
  DecayFit fit{};
  double setup_seconds = 0.0;
  std::vector<ShootResult> family;  // refined f0 grid, ascending
};

// 1. Fixed-point linearizations of the cone flow against frozen integer
// data: Jacobian entries, eigenvalue multisets, and a set of eigenvectors.
CheckResult check_fixed_points() {
  return timed("cone fixed-point linearizations", [](CheckResult& r) {
    struct Frozen {
      ConeFixedPoint which;
      double DF[4][4];
      double eig[4];   // descending
      double vec[4][4];  // eigenvector columns matching eig
      int n_unstable;
    };
    static const Frozen data[3] = {
        {ConeFixedPoint::origin,
         {{-2, 4, 0, 0}, {4, -2, 0, 0}, {0, 0, -6, 0}, {0, 0, 0, 2}},
         {2, 2, -6, -6},
         {{1, 0, 1, 0}, {1, 0, -1, 0}, {0, 0, 0, 1}, {0, 1, 0, 0}},
         2},
        {ConeFixedPoint::plus,
         {{-2, 2, 1, -2}, {2, -2, -1, -2}, {4, -4, -6, 0}, {-2, -2, 0, 2}},
         {4, -2, -2, -8},
         {{-1, 1, 1, -1}, {-1, 1, -1, 1}, {0, 0, 2, 4}, {2, 1, 0, 0}},
         1},
        {ConeFixedPoint::minus,
         {{-2, 2, -1, 2}, {2, -2, 1, 2}, {-4, 4, -6, 0}, {2, 2, 0, 2}},
         {4, -2, -2, -8},
         {{1, -1, -1, 1}, {1, -1, 1, -1}, {0, 0, 2, 4}, {2, 1, 0, 0}},
         1}};
    double worst = 0.0, fd_worst = 0.0;
    for (const Frozen& fz : data) {
      const FixedPointRecord rec = linearize(fz.which);
      Mat4 DF;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) DF(i, j) = fz.DF[i][j];
      worst = std::max(worst, (rec.DF - DF).cwiseAbs().maxCoeff());
      for (int k = 0; k < 4; ++k)
        worst = std::max(worst, std::abs(rec.eigenvalues[k] - fz.eig[k]));
      for (int k = 0; k < 4; ++k) {
        Vec4 v;
        for (int i = 0; i < 4; ++i) v[i] = fz.vec[i][k];
        worst = std::max(worst, (rec.DF * v - fz.eig[k] * v).cwiseAbs().maxCoeff());
      }
      if (static_cast<int>(rec.unstable.size()) != fz.n_unstable)
        throw NumericError("unstable index count mismatch");
      fd_worst = std::max(fd_worst, rec.fd_error);
    }
    r.measured = worst;
    r.tolerance = 1e-10;
    r.pass = worst <= r.tolerance && fd_worst <= 1e-5;
    r.detail = "3 Jacobians entrywise, eigenvalue multisets, 12 frozen eigenvectors; fd gap " +
               fmt(fd_worst);
  });
}

// 2. The closed-form heteroclinic w = 1/(3 + e^(-2 tau)) solves the cone
// flow: integrate from tau = -8 and track the formula to tau = 8.  The orbit
// limits on z+-, whose lambda = 4 unstable mode amplifies any midfield error
// by e^(4 (8 - tau)) ~ 1e10, so double-precision stepping bottoms out near
// 1e-6 regardless of tolerance.  The field is quadratic, so instead advance
// its Taylor recurrence in __float128 (order 28, step 1/8, well inside the
// convergence radius pi/2 set by 3 + e^(-2 tau) = 0) and pin each step's
// linear coefficient to autonomous_F so the integration cannot drift from
// the library field.
CheckResult check_heteroclinic() {
  return timed("explicit heteroclinic orbit", [](CheckResult& r) {
    using quad = __float128;
    constexpr int K = 28;       // series order per step
    constexpr int steps = 128;  // tau in [-8, 8], step 1/8
    double worst = 0.0, tie = 0.0;
    for (int sign : {+1, -1}) {
      const Vec4 z0 = heteroclinic_oracle(-8.0, sign);
      std::array<quad, 4> y{z0[0], z0[1], z0[2], z0[3]};
      for (int step = 0; step < steps; ++step) {
        // c[k][i]: order-k coefficient of component i about the step start.
        std::array<std::array<quad, 4>, K + 1> c;
        c[0] = y;
        const auto conv = [&c](int a, int b, int k) {
          quad s = 0;
          for (int i = 0; i <= k; ++i) s += c[i][a] * c[k - i][b];
          return s;
        };
        for (int k = 0; k < K; ++k) {
          const quad ff = conv(0, 0, k), pp = conv(1, 1, k), fxp = conv(0, 1, k);
          const quad fg = conv(0, 2, k), fh = conv(0, 3, k);
          const quad pg = conv(1, 2, k), ph = conv(1, 3, k);
          const quad inv = quad(1) / (k + 1);
          c[k + 1] = {(4 * c[k][1] - 6 * ph + pg + 2 * fg - 2 * c[k][0]) * inv,
                      (4 * c[k][0] - 6 * fh - fg - 2 * pg - 2 * c[k][1]) * inv,
                      (6 * (ff - pp - c[k][2])) * inv,
                      (2 * c[k][3] - pp - ff - 4 * fxp) * inv};
        }
        Vec4 yd, F1;
        for (int i = 0; i < 4; ++i) {
          yd[i] = static_cast<double>(c[0][i]);
          F1[i] = static_cast<double>(c[1][i]);
        }
        tie = std::max(tie, (autonomous_F(yd) - F1).cwiseAbs().maxCoeff());
        for (int s = 1; s <= 4; ++s) {
          const quad dt = quad(s) / 32;
          std::array<quad, 4> v = c[K];
          for (int k = K - 1; k >= 0; --k)
            for (int i = 0; i < 4; ++i) v[i] = c[k][i] + dt * v[i];
          if (s == 4) y = v;
          const double tau = -8.0 + (4 * step + s) / 32.0;
          const Vec4 z{static_cast<double>(v[0]), static_cast<double>(v[1]),
                       static_cast<double>(v[2]), static_cast<double>(v[3])};
          worst = std::max(worst, (z - heteroclinic_oracle(tau, sign)).cwiseAbs().maxCoeff());
        }
      }
    }
    r.measured = worst;
    r.tolerance = 1e-8;
    r.pass = worst <= r.tolerance && tie <= 1e-12;
    r.detail = "both signs, 512 samples on tau in [-8, 8] vs w = 1/(3 + e^(-2 tau)); field tie " +
               fmt(tie);
  });
}

// 3. The abelian closed forms solve the reduced flow on the tuned profile.
// The residual is measured twice: by the library and by an independent
// in-place recomputation that exposes the Phi nudge (so a nonzero nudge
// demonstrably flips this check).
CheckResult check_abelian(const Shared& sh, const VerifyOptions& opt) {
  return timed("abelian closed forms solve the flow", [&](CheckResult& r) {
    const MetricProfile& prof = *sh.prof;
    const MetricParams& p = sh.p;
    const AbelianSolution ab(1, 1.0, prof, 120.0, 1e-12);
    double worst = 0.0;
    for (double t : log_grid(1e-3, 1e2, 200)) {
      const double lib = ab.flow_residual(t);
      const MetricSample s = prof.at(t);
      CoefficientTriple k = coefficients(s, p, Channel::m_channel);
      k.Phi += opt.coefficient_nudge;
      const ConnectionState z = ab.state(t), zd = ab.state_derivative(t);
      const double den1 = 2.0 * s.da * s.da * s.da * s.db * s.db;
      const double den2 = 2.0 * s.da * s.da * s.da * s.da * s.db;
      const double rf = (z.fp * (1.0 - z.h + 0.5 * z.g) * k.Phi + z.f * (z.g - 1.0) * k.Chi +
                         z.fp * (0.5 * z.g + z.h) * k.Psi) /
                            den1 -
                        zd.f;
      const double rfp = (z.f * (1.0 - 0.5 * z.g - z.h) * k.Phi - z.fp * (z.g + 1.0) * k.Chi +
                          z.f * (z.h - 0.5 * z.g) * k.Psi) /
                             den1 -
                         zd.fp;
      const double rg = ((z.f * z.f - z.fp * z.fp - z.g) * (k.Phi - k.Psi)) / den2 - zd.g;
      const double rh = ((z.h - 0.5 * (z.fp * z.fp) - 0.5 * (z.f * z.f)) * (k.Phi + k.Psi) -
                         2.0 * z.f * z.fp * k.Chi) /
                            den2 -
                        zd.h;
      const double dup = std::max({std::abs(rf), std::abs(rfp), std::abs(rg), std::abs(rh)});
      worst = std::max({worst, lib, dup});
    }
    r.measured = worst;
    r.tolerance = 1e-6;
    r.pass = worst <= r.tolerance;
    std::ostringstream d;
    d << "j = 1, h0 = 1, 200 log samples on [1e-3, 1e2]";
    if (opt.coefficient_nudge != 0.0) d << "; Phi nudged by " << opt.coefficient_nudge;
    r.detail = d.str();
  });
}

// 4. Solvability of the local recursion: the determinant sequence must be
// exactly h^3 (h + 2 nu), and the downstream state must not depend on where
// the series hands off to the stepper.
CheckResult check_local_solver(const Shared& sh) {
  return timed("local solvability determinants + handoff", [&](CheckResult& r) {
    double det_err = 0.0, res_worst = 0.0;
    for (int nu = 1; nu <= 4; ++nu) {
      const BundleIndex idx{1, 1, 2 * nu - 1};
      const SingularIVP ivp = local_family(idx, {0.3, 0.1}, sh.p);
      const ConditionReport rep = check_conditions(ivp, 20, 1e-10, false);
      res_worst = std::max(res_worst, rep.residual_norm);
      if (!rep.pass) throw NumericError("solvability conditions rejected");
      for (int h = 1; h <= rep.H; ++h) {
        const double expected = static_cast<double>(h) * h * h * (h + 2 * nu);
        det_err = std::max(det_err, std::abs(rep.dets[static_cast<size_t>(h - 1)] - expected));
      }
    }
    const BundleIndex idx{1, 1, 1};
    const LocalData d{0.25, 0.05};
    IntegrateOptions iopt;
    iopt.rtol = 1e-12;
    iopt.atol = 1e-14;
    const auto t1 = integrate_from_local(idx, d, *sh.prof, 1e-3, 2.0, 8, iopt);
    const auto t2 = integrate_from_local(idx, d, *sh.prof, 5e-4, 2.0, 8, iopt);
    if (t1.exit != ConnectionTrajectory::Exit::reached_end ||
        t2.exit != ConnectionTrajectory::Exit::reached_end)
      throw NumericError("handoff trajectory did not reach t = 2");
    const ConnectionState za = t1.state(2.0), zb = t2.state(2.0);
    const double shift = std::max({std::abs(za.f - zb.f), std::abs(za.fp - zb.fp),
                                   std::abs(za.g - zb.g), std::abs(za.h - zb.h)});
    r.measured = shift;
    r.tolerance = 1e-6;
    r.pass = det_err == 0.0 && shift <= r.tolerance;
    r.detail = "dets equal h^3 (h + 2 nu) exactly, nu = 1..4, H = 20 (gap " + fmt(det_err) +
               "); recursion residual " + fmt(res_worst) + "; t0 vs t0/2 shift " + fmt(shift);
  });
}

// 5. The tuned profile is asymptotically conical: far-field band of the
// normalized coefficients, fitted decay exponent of the difference channel,
// and the ordering/positivity audit.
CheckResult check_metric(const Shared& sh) {
  CheckResult r = timed("asymptotically conical metric tuning", [&](CheckResult& rr) {
    const IntegratedProfile& prof = *sh.prof;
    const double T = prof.t_max();
    const MetricSample far = prof.at(T);
    const double scale = 54.0 / std::sqrt(3.0);
    const double band = std::max(std::abs(scale * far.a / (T * T * T) - 1.0),
                                 std::abs(scale * far.b / (T * T * T) - 1.0));
    const double nu_inf = 0.5 * (std::sqrt(145.0) + 7.0);
    const double nu_rel = std::abs(sh.fit.nu_fit - nu_inf) / nu_inf;
    const InequalityAudit audit = audit_inequalities(prof);
    double min_margin = kInf;
    for (const AuditRow& row : audit.rows) min_margin = std::min(min_margin, row.min_margin);
    rr.measured = band;
    rr.tolerance = 1e-3;
    rr.pass = band <= rr.tolerance && nu_rel <= 0.02 && audit.all_pass;
    std::ostringstream d;
    d << "beta = " << io::fmt17(sh.beta_ac) << "; cone band " << fmt(band) << " at t = " << T
      << "; decay exponent " << fmt(sh.fit.nu_fit) << " vs " << fmt(nu_inf) << " (rel "
      << fmt(nu_rel) << "); " << audit.rows.size() << " inequality rows, min margin "
      << fmt(min_margin);
    rr.detail = d.str();
  });
  r.seconds += sh.setup_seconds;  // tuning + profile construction happen once up front
  return r;
}

// 6. The one-parameter family: every f0 on the grid shoots to a solution
// converging to z+, g decays monotonically in the far field, the curvature
// stays bounded, h0(f0) is continuous under grid refinement, and the
// mirrored family converges to z- under the sign gauge.
CheckResult check_family(Shared& sh, const VerifyOptions& opt) {
  return timed("instanton family sweep", [&](CheckResult& r) {
    const IntegratedProfile& prof = *sh.prof;
    const MetricParams& p = sh.p;
    const std::vector<double> grid{0.02, 0.035, 0.05, 0.075, 0.1, 0.15, 0.2, 0.25, 0.3};
    const ShootOptions sopt;  // defaults: bisect h0 to the fp floor
    std::vector<ShootResult> shots(grid.size());
    io::parallel_for(static_cast<int>(grid.size()), opt.jobs, [&](int i) {
      shots[static_cast<size_t>(i)] = shoot_h0(grid[static_cast<size_t>(i)], prof, sopt, 1);
    });

    double worst_dist = 0.0, worst_mono = 0.0, worst_curv = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
      const ShootResult& s = shots[i];
      if (s.outcome.cls != ShotClass::converged_plus)
        throw NumericError("f0 = " + io::fmt17(grid[i]) + " classified " +
                           to_string(s.outcome.cls));
      worst_dist = std::max(worst_dist, s.outcome.distance);
      worst_mono = std::max(worst_mono, s.outcome.g_monotone_violation);
      double curv = 0.0;
      for (size_t k = 0; k < s.trajectory.ts.size(); ++k) {
        const double t = s.trajectory.ts[k];
        curv = std::max(curv, curvature_norm(embed_reduced(s.trajectory.zs[k]),
                                             embed_reduced(s.trajectory.state_dot(t)),
                                             prof.at(t), p));
      }
      worst_curv = std::max(worst_curv, curv);
    }

    // Continuity of h0(f0): the largest adjacent difference must shrink when
    // midpoints are inserted (indices 0, 2, 4, 6, 8 form the coarse grid).
    double d_coarse = 0.0, d_fine = 0.0;
    for (size_t i = 0; i + 2 < grid.size(); i += 2)
      d_coarse = std::max(d_coarse, std::abs(shots[i + 2].h0 - shots[i].h0));
    for (size_t i = 0; i + 1 < grid.size(); ++i)
      d_fine = std::max(d_fine, std::abs(shots[i + 1].h0 - shots[i].h0));

    // h0 values from an independent prototype of the same shooting pipeline;
    // the discriminator depends on stepper tolerances, so agreement is held
    // to 1e-4 only.
    const double cross[5] = {0.011825584596954, 0.029376729740761, 0.058159291557968,
                             0.114115265756845, 0.168121182546020};
    double cross_gap = 0.0;
    for (size_t k = 0; k < 5; ++k)
      cross_gap = std::max(cross_gap, std::abs(shots[2 * k].h0 - cross[k]));

    // Mirror: f0 -> -f0 conjugates (f, f') by the sign gauge, lands on z-.
    const ShootResult& plus01 = shots[4];  // f0 = 0.1
    const ShootResult minus01 = shoot_h0(-0.1, prof, sopt, 1);
    if (minus01.outcome.cls != ShotClass::converged_minus)
      throw NumericError(std::string("mirrored shot classified ") +
                         to_string(minus01.outcome.cls));
    double mirror = std::abs(minus01.h0 - plus01.h0);
    const size_t nst = std::min(plus01.trajectory.zs.size(), minus01.trajectory.zs.size());
    for (size_t k = 0; k < nst; ++k) {
      const ConnectionState zp = plus01.trajectory.zs[k];
      const ConnectionState zm = sign_gauge(minus01.trajectory.zs[k]);
      mirror = std::max({mirror, std::abs(zp.f - zm.f), std::abs(zp.fp - zm.fp),
                         std::abs(zp.g - zm.g), std::abs(zp.h - zm.h)});
    }

    sh.family = std::move(shots);
    r.measured = worst_dist;
    r.tolerance = 1e-3;
    r.pass = worst_dist <= r.tolerance && worst_mono <= 1e-10 && worst_curv <= 50.0 &&
             d_fine < d_coarse && d_fine <= 0.75 * d_coarse && cross_gap <= 1e-4 &&
             mirror <= 1e-10;
    std::ostringstream d;
    d << "9 f0 in [0.02, 0.3] all converged_plus; dist " << fmt(worst_dist) << "; g-monotone "
      << fmt(worst_mono) << "; sup |F_A| " << fmt(worst_curv) << "; refinement "
      << fmt(d_fine) << " vs " << fmt(d_coarse) << "; cross gap " << fmt(cross_gap)
      << "; mirror gap " << fmt(mirror);
    r.detail = d.str();
  });
}

// 7. The six-equation equivariant flow restricted to the embedded reduced
// states reproduces the four-equation flow, and the algebraic constraint is
// preserved along the way.
CheckResult check_general_vs_reduced(const Shared& sh, const VerifyOptions& opt) {
  return timed("full vs reduced equivariant flow", [&](CheckResult& r) {
    const IntegratedProfile& prof = *sh.prof;
    const MetricParams& p = sh.p;
    std::mt19937 rng(opt.seed);
    std::uniform_real_distribution<double> Uf(-0.3, 0.3), Ug(0.5, 1.5), Uh(-0.25, 0.25);
    double worst = 0.0, worst_con = 0.0;
    // Random reduced data can blow up in finite time; draw until three
    // states stay bounded through t = 10 (deterministic given the seed).
    int used = 0, skipped = 0;
    for (int attempt = 0; used < 3; ++attempt) {
      if (attempt >= 12) throw NumericError("fewer than 3 of 12 draws bounded through t = 10");
      const ConnectionState z0{Uf(rng), Uf(rng), Ug(rng), Uh(rng)};
      IntegrateOptions iopt;
      iopt.rtol = 1e-12;
      iopt.atol = 1e-14;
      const auto red = integrate_connection(z0, 0.5, 10.0, prof, 1, iopt);
      if (red.exit != ConnectionTrajectory::Exit::reached_end) {
        ++skipped;
        continue;
      }
      ++used;
      using D18 = Dopri5<18>;
      D18::Options o;
      o.rtol = 1e-12;
      o.atol = 1e-14;
      o.store_dense = true;
      const auto gen = D18::integrate(
          [&](double t, const D18::Vec& y, D18::Vec& dy) {
            dy = general_rhs(InvariantConnection::unpack(y), prof.at(t), p).pack();
          },
          0.5, embed_reduced(z0).pack(), 10.0, o);
      if (gen.exit != D18::Exit::reached_end) throw NumericError("full run did not reach t = 10");
      for (double t : log_grid(0.5, 10.0, 60)) {
        const ConnectionState a = red.state(t);
        const InvariantConnection c = InvariantConnection::unpack(gen.sample(t));
        const ConnectionState b = extract_reduced(c);
        worst = std::max({worst, std::abs(a.f - b.f), std::abs(a.fp - b.fp),
                          std::abs(a.g - b.g), std::abs(a.h - b.h)});
        worst_con = std::max(worst_con, constraint_residual(c, prof.at(t)));
      }
    }
    r.measured = std::max(worst, worst_con);
    r.tolerance = 1e-8;
    r.pass = r.measured <= r.tolerance;
    r.detail = "3 bounded seeded states on [0.5, 10] (" + std::to_string(skipped) +
               " blow-ups redrawn): sup state gap " + fmt(worst) + ", sup constraint " +
               fmt(worst_con);
  });
}

// 8. Parity of the local series (all u-chart components even in t, g(0) = j)
// for every swept family member, and the frozen leading-exponent table.
CheckResult check_parity(const Shared& sh) {
  return timed("parity and leading exponents", [&](CheckResult& r) {
    std::vector<LocalData> seeds;
    if (sh.family.empty())
      seeds.push_back({0.1, 0.0581591461295496});  // representative member
    else
      for (const ShootResult& s : sh.family) seeds.push_back({s.f0, s.h0});
    double worst = 0.0;
    for (const LocalData& d : seeds) {
      const SingularIVP ivp = local_family({1, 1, 1}, d, sh.p);
      const SeriesSolution sol = series_coefficients(ivp, 8);
      const ParityReport rep = parity_check({1, 1, 1}, sol);
      if (!rep.pass) throw NumericError("parity violated at f0 = " + io::fmt17(d.f0));
      worst = std::max(worst, rep.max_violation);
    }
    struct Row {
      int m, n, j, o12;
      Parity p12;
      int o12p;
      Parity p12p;
    };
    static const Row rows[] = {
        {1, 1, 1, 0, Parity::even, 1, Parity::odd},
        {1, 1, 3, 1, Parity::odd, 2, Parity::even},
        {1, 1, 5, 2, Parity::even, 3, Parity::odd},
        {1, 2, 2, 0, Parity::even, 1, Parity::odd},
        {1, 2, 5, 1, Parity::odd, 2, Parity::even},
        {1, 2, 8, 2, Parity::even, 3, Parity::odd},
    };
    for (const Row& row : rows) {
      const ExponentTable e = expected_parity({row.m, row.n, row.j});
      if (e.ord_12 != row.o12 || e.par_12 != row.p12 || e.ord_12p != row.o12p ||
          e.par_12p != row.p12p)
        throw NumericError("exponent table mismatch at (m, n, j) = (" + std::to_string(row.m) +
                           ", " + std::to_string(row.n) + ", " + std::to_string(row.j) + ")");
    }
    r.measured = worst;
    r.tolerance = 1e-12;
    r.pass = worst <= r.tolerance;
    r.detail = std::to_string(seeds.size()) +
               " series + 6 exponent rows; worst forbidden coefficient " + fmt(worst);
  });
}

// 9. Along the abelian background the h-direction is an invariant line of
// the linearized flow, and the two sign functionals keep their signs.
CheckResult check_invariant_line(const Shared& sh) {
  return timed("invariant line of the linearized flow", [&](CheckResult& r) {
    const IntegratedProfile& prof = *sh.prof;
    const MetricParams& p = sh.p;
    const double r3 = std::pow(p.r0, 3), r6 = r3 * r3;
    const auto g_abelian = [&](double t) {
      const double b = prof.at(t).b;
      return 4.0 * r6 / ((b + r3) * (b + r3));  // j = 1
    };
    double leak = 0.0, fd_gap = 0.0;
    double s1_min = kInf, s2_max = -kInf;
    for (double t : log_grid(1e-3, 1e2, 61)) {
      const MetricSample s = prof.at(t);
      const double g_ab = g_abelian(t);
      const Mat4 A = stage2_linearization(prof, t, g_ab);
      leak = std::max({leak, std::abs(A(0, 3)), std::abs(A(1, 3)), std::abs(A(2, 3))});
      const ConnectionState z0{0.0, 0.0, g_ab, 0.0};
      Mat4 J;
      const double eps = 1e-6;
      for (int c = 0; c < 4; ++c) {
        Vec4 zp = pack(z0), zm = pack(z0);
        zp[c] += eps;
        zm[c] -= eps;
        J.col(c) = (pack(reduced_rhs(unpack_state(zp), s, p)) -
                    pack(reduced_rhs(unpack_state(zm), s, p))) /
                   (2.0 * eps);
      }
      leak = std::max({leak, std::abs(J(0, 3)), std::abs(J(1, 3)), std::abs(J(2, 3))});
      fd_gap = std::max(fd_gap,
                        (J - A).cwiseAbs().maxCoeff() / std::max(1.0, A.cwiseAbs().maxCoeff()));
      const auto [S1, S2] = stage2_region_functionals(prof, t, g_ab);
      s1_min = std::min(s1_min, S1);
      s2_max = std::max(s2_max, S2);
    }
    Dopri5<4>::Options o;
    o.rtol = 1e-12;
    o.atol = 1e-14;
    const auto run = Dopri5<4>::integrate(
        [&](double t, const Vec4& x, Vec4& dx) {
          dx = stage2_linearization(prof, t, g_abelian(t)) * x;
        },
        1.0, Vec4(0, 0, 0, 1), 100.0, o);
    if (run.exit != Dopri5<4>::Exit::reached_end)
      throw NumericError("linearized propagation did not finish");
    const double prop_leak = std::max({std::abs(run.y_end[0]), std::abs(run.y_end[1]),
                                       std::abs(run.y_end[2])}) /
                             std::abs(run.y_end[3]);
    r.measured = std::max(leak, prop_leak);
    r.tolerance = 1e-10;
    r.pass = r.measured <= r.tolerance && fd_gap <= 1e-5 && s1_min > 0.0 && s2_max < 0.0;
    std::ostringstream d;
    d << "A e_h || e_h leak " << fmt(leak) << ", propagated leak " << fmt(prop_leak)
      << ", fd Jacobian gap " << fmt(fd_gap) << "; S1 >= " << fmt(s1_min) << ", S2 <= "
      << fmt(s2_max) << " on 61 samples";
    r.detail = d.str();
  });
}

// 10. The stable-manifold integral equation reconstructs the shot family
// member from its stable component alone, with contraction improving as the
// anchoring time grows.
CheckResult check_manifold(const Shared& sh) {
  return timed("stable-manifold cross-check", [&](CheckResult& r) {
    const IntegratedProfile& prof = *sh.prof;
    const ShootResult* shot = nullptr;
    for (const ShootResult& s : sh.family)
      if (s.f0 == 0.1) shot = &s;
    if (!shot) throw NumericError("family sweep entry f0 = 0.1 missing");

    const Vec4 zplus = fixed_point(ConeFixedPoint::plus);
    const FixedPointRecord rec = linearize(ConeFixedPoint::plus);
    const Mat4 Vinv = rec.eigenvectors.inverse();
    Mat4 Ps = Mat4::Zero();
    for (int k : rec.stable) Ps += rec.eigenvectors.col(k) * Vinv.row(k);

    // Beyond the profile window switch to the shifted cone chart: with
    // t z'(t) = (t/(t+c0)) (t+c0) z'(t) the correction becomes
    // (t/(t+c0) - 1) F(z) + G(z, log(t+c0)) up to O(e^(-3 tau) / t) terms.
    const double c0 = sh.fit.c0, r0 = sh.p.r0;
    const double t_switch = 0.95 * prof.t_max();
    const auto pull = profile_pullback_correction(prof);
    ManifoldOptions mo;
    mo.r0 = r0;
    mo.fp_tol = 1e-13;
    mo.correction = [&pull, c0, r0, t_switch](const Vec4& z, double tau) {
      const double t = std::exp(tau);
      if (t <= t_switch) return pull(z, tau);
      return Vec4((t / (t + c0) - 1.0) * autonomous_F(z) +
                  nonautonomous_G(z, std::log(t + c0), r0));
    };

    // Anchor at tau0 = 8, 8.5, 9: the shot trajectory itself carries an
    // unstable component ~ ulp(h0) e^(4 tau) left over from the bisection
    // floor, which crosses 1e-3 near tau0 = 9.5, so larger anchors measure
    // the shot, not the reconstruction.
    double worst = 0.0, prev_gamma = kInf;
    bool gammas_decreasing = true;
    std::ostringstream d;
    d << "f0 = 0.1;";
    for (double tau0 : {8.0, 8.5, 9.0}) {
      const Vec4 z_sh = pack(shot->trajectory.state(std::exp(tau0)));
      const Vec4 xs = Ps * (z_sh - zplus);
      const ManifoldSample ms = stable_manifold_iteration(ConeFixedPoint::plus, xs, tau0, mo);
      if (!ms.converged) throw NumericError("manifold iteration did not converge");
      const double diff = (ms.state_tau0 - z_sh).cwiseAbs().maxCoeff();
      worst = std::max(worst, diff);
      // The leading gamma entries are a tau0-independent transient of the
      // sweep kernel; the geometric mean over the whole iteration is the
      // per-sweep contraction rate.
      double gamma = 0.0;
      if (!ms.gamma.empty()) {
        double s = 0.0;
        for (double g : ms.gamma) s += std::log(g);
        gamma = std::exp(s / static_cast<double>(ms.gamma.size()));
      }
      if (!(gamma < prev_gamma)) gammas_decreasing = false;
      prev_gamma = gamma;
      d << " tau0 " << tau0 << ": gap " << fmt(diff) << ", gamma " << fmt(gamma) << ";";
    }
    r.measured = worst;
    r.tolerance = 1e-3;
    r.pass = worst <= r.tolerance && gammas_decreasing;
    if (!gammas_decreasing) d << " contraction factors not decreasing";
    r.detail = d.str();
  });
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& opt) {
  Shared sh;
  std::string setup_error;
  const auto setup0 = Clock::now();
  try {
    sh.beta_ac = tune_beta_ac(sh.p);
    sh.p.beta = sh.beta_ac;
    sh.prof = std::make_unique<IntegratedProfile>(integrate_ac_profile(sh.p));
    sh.fit = fit_difference_decay(*sh.prof);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  sh.setup_seconds = std::chrono::duration<double>(Clock::now() - setup0).count();

  const auto with_profile = [&](const char* name, const std::function<CheckResult()>& f) {
    if (setup_error.empty()) return f();
    CheckResult r;
    r.name = name;
    r.pass = false;
    r.detail = "profile setup failed: " + setup_error;
    return r;
  };

  std::vector<CheckResult> rows;
  rows.push_back(check_fixed_points());
  rows.push_back(check_heteroclinic());
  rows.push_back(with_profile("abelian closed forms solve the flow",
                              [&] { return check_abelian(sh, opt); }));
  rows.push_back(with_profile("local solvability determinants + handoff",
                              [&] { return check_local_solver(sh); }));
  rows.push_back(with_profile("asymptotically conical metric tuning",
                              [&] { return check_metric(sh); }));
  if (!opt.quick)
    rows.push_back(with_profile("instanton family sweep", [&] { return check_family(sh, opt); }));
  rows.push_back(with_profile("full vs reduced equivariant flow",
                              [&] { return check_general_vs_reduced(sh, opt); }));
  rows.push_back(with_profile("parity and leading exponents",
                              [&] { return check_parity(sh); }));
  rows.push_back(with_profile("invariant line of the linearized flow",
                              [&] { return check_invariant_line(sh); }));
  if (!opt.quick)
    rows.push_back(with_profile("stable-manifold cross-check", [&] { return check_manifold(sh); }));
  return rows;
}

std::string render_table(const std::vector<CheckResult>& rows) {
  std::ostringstream out;
  size_t w = 0;
  for (const CheckResult& r : rows) w = std::max(w, r.name.size());
  size_t npass = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    const CheckResult& r = rows[i];
    npass += r.pass ? 1u : 0u;
    char head[160];
    std::snprintf(head, sizeof head, "%2zu  %-*s  %s  %9.3g / %-9.3g  %7.2fs  ", i + 1,
                  static_cast<int>(w), r.name.c_str(), r.pass ? "PASS" : "FAIL", r.measured,
                  r.tolerance, r.seconds);
    out << head << r.detail << "\n";
  }
  out << npass << "/" << rows.size() << " checks passed\n";
  return out.str();
}

}  // namespace g2inst::verify
