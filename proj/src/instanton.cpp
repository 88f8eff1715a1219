// Invariant instanton flow: six-component general system, the local solution
// family at the singular orbit as a singular initial value problem in the
// desingularized chart u = (f t^(1-nu), f' t^(-nu), g, h), trajectory
// integration over a metric profile, and parity bookkeeping.

#include "g2inst/instanton.hpp"

#include <cmath>
#include <sstream>

namespace g2inst {

InvariantConnection general_rhs(const InvariantConnection& c, const MetricSample& s,
                                const MetricParams& p) {
  if (s.db == 0.0 || s.da == 0.0)
    throw SingularTime("invariant flow evaluated at a degenerate frame sample");
  const CoefficientTriple km = coefficients(s, p, Channel::m_channel);
  const CoefficientTriple kn = coefficients(s, p, Channel::n_channel);
  const double da2 = s.da * s.da;
  const double den1 = 2.0 * da2 * s.da * s.db * s.db;  // 2 a'^3 b'^2
  const double den2 = 2.0 * da2 * da2 * s.db;          // 2 a'^4 b'
  const auto& A = c.alpha;
  const auto& Ap = c.alphaP;

  InvariantConnection d;
  d.alpha[0] = ((Ap[0] - bracket(Ap[1], Ap[2])) * km.Phi - bracket(A[1], Ap[2]) * km.Chi +
                bracket(Ap[1], A[2]) * km.Psi + (bracket(A[1], A[2]) - A[0]) * kn.Chi) /
               den1;
  d.alpha[1] = ((Ap[1] - bracket(Ap[2], Ap[0])) * km.Phi - bracket(Ap[2], A[0]) * km.Chi +
                bracket(A[2], Ap[0]) * km.Psi + (bracket(A[2], A[0]) - A[1]) * kn.Chi) /
               den1;
  d.alpha[2] = ((Ap[2] - bracket(Ap[0], Ap[1])) * km.Phi -
                (bracket(A[0], Ap[1]) + bracket(Ap[0], A[1])) * km.Chi +
                (A[2] - bracket(A[0], A[1])) * kn.Psi) /
               den2;
  d.alphaP[0] = ((A[0] - bracket(A[1], A[2])) * kn.Phi - bracket(Ap[1], A[2]) * kn.Chi +
                 bracket(A[1], Ap[2]) * kn.Psi + (bracket(Ap[1], Ap[2]) - Ap[0]) * km.Chi) /
                den1;
  d.alphaP[1] = ((A[1] - bracket(A[2], A[0])) * kn.Phi - bracket(A[2], Ap[0]) * kn.Chi +
                 bracket(Ap[2], A[0]) * kn.Psi + (bracket(Ap[2], Ap[0]) - Ap[1]) * km.Chi) /
                den1;
  d.alphaP[2] = ((A[2] - bracket(A[0], A[1])) * kn.Phi -
                 (bracket(Ap[0], A[1]) + bracket(A[0], Ap[1])) * kn.Chi +
                 (Ap[2] - bracket(Ap[0], Ap[1])) * km.Psi) /
                den2;
  return d;
}

void validate(const BundleIndex& idx) {
  if (idx.m <= 0 || idx.n <= 0) throw WrongBundle("orbit indices must be positive");
  const int j = std::abs(idx.j);
  if ((j - idx.n) % (idx.m + idx.n) != 0) {
    std::ostringstream msg;
    msg << "bundle label j = " << idx.j << " violates the congruence j = n mod (m + n) for (m, n) = ("
        << idx.m << ", " << idx.n << ")";
    throw WrongBundle(msg.str());
  }
}

Eigen::Vector4d local_u0(const BundleIndex& idx, const LocalData& d, const MetricParams& p) {
  validate(idx);
  const int nu = idx.nu();
  const double b3 = p.beta * p.beta * p.beta;
  const double fp1 =
      (b3 * (1.0 - 2.0 * d.h0) + 1.0 - nu) / (4.0 * nu * p.r0 * p.beta * p.beta);
  return Eigen::Vector4d(d.f0, fp1 * d.f0, 2.0 * nu - 1.0, d.h0);
}

ConnectionState u_to_state(const Eigen::Vector4d& u, double t, int nu) {
  ConnectionState z;
  z.f = u(0) * std::pow(t, nu - 1);
  z.fp = u(1) * std::pow(t, nu);
  z.g = u(2);
  z.h = u(3);
  return z;
}

SingularIVP local_family(const BundleIndex& idx, const LocalData& d, const MetricParams& p,
                         int metric_order) {
  validate(idx);
  validate(p);
  if (idx.m != 1 || idx.n != 1 || p.m != 1 || p.n != 1)
    throw std::invalid_argument("local solution chart implemented for the (1, 1) geometry");
  if (idx.j < 1 || idx.j % 2 == 0)
    throw WrongBundle("local solution chart needs a positive odd bundle label");

  const int nu = idx.nu();
  const double r0 = p.r0, beta = p.beta;
  const double b3 = beta * beta * beta;
  const double cden = 4.0 * r0 * beta * beta;

  const SeriesProfile metric = near_orbit_series(p, metric_order, SeriesSource::flow_recursion);
  const std::vector<double> ca = metric.a_coefficients();
  const std::vector<double> cb = metric.b_coefficients();

  SingularIVP ivp;
  ivp.dim = 4;
  ivp.y0 = local_u0(idx, d, p);

  // Singular part: only the chi/(2t) pole and the constant parts of
  // Phi/(2 a'^3 b'^2), Psi/(2 a'^3 b'^2) survive at t = 0.
  ivp.m_minus1 = [nu, b3, cden](const Eigen::VectorXd& u) {
    Eigen::VectorXd v(4);
    v(0) = (0.5 * (u(2) + 1.0) - nu) * u(0);
    v(1) = (-0.5 * (u(2) + 1.0) - nu) * u(1) +
           (1.0 - u(2) + 2.0 * b3 * (1.0 - 2.0 * u(3))) / cden * u(0);
    v(2) = 0.0;
    v(3) = 0.0;
    return v;
  };

  // Exact Jacobian of the singular part at the seed; its solvability
  // determinants are det(h Id - J) = h^3 (h + 2 nu), an exact integer
  // polynomial under cofactor expansion.
  {
    const Eigen::Vector4d u0 = ivp.y0;
    const double c0 = (2.0 - 2.0 * nu + 2.0 * b3 * (1.0 - 2.0 * d.h0)) / cden;
    Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
    J(0, 2) = 0.5 * u0(0);
    J(1, 0) = c0;
    J(1, 1) = -2.0 * nu;
    J(1, 2) = -0.5 * u0(1) - u0(0) / cden;
    J(1, 3) = -u0(0) * beta / r0;
    ivp.jacobian = J;
  }

  auto full_rhs = [nu, p](const auto& tt, const auto& u, const auto& a, const auto& b,
                          const auto& da, const auto& db) {
    using S = std::decay_t<decltype(a)>;
    MetricSampleT<S> s;
    s.t = tt;
    s.a = a;
    s.b = b;
    s.da = da;
    s.db = db;
    ConnectionStateT<S> z;
    z.f = mul_tpow(u[0], tt, nu - 1);
    z.fp = mul_tpow(u[1], tt, nu);
    z.g = u[2];
    z.h = u[3];
    const ConnectionStateT<S> zd = reduced_rhs(z, s, p);
    // R = t du/dt, regular at t = 0 term by term:
    //   R_f  = f_dot t^(2-nu) + (1-nu) u_f,  R_f' = f'_dot t^(1-nu) - nu u_f',
    //   R_g  = t g_dot,                      R_h  = t h_dot.
    std::array<S, 4> R;
    R[0] = mul_tpow(zd.f, tt, 2 - nu) + (1.0 - nu) * u[0];
    R[1] = mul_tpow(zd.fp, tt, 1 - nu) + (-static_cast<double>(nu)) * u[1];
    R[2] = mul_tpow(zd.g, tt, 1);
    R[3] = mul_tpow(zd.h, tt, 1);
    return R;
  };

  ivp.m_tail = [full_rhs, mm = ivp.m_minus1, ca, cb](double t, const Eigen::VectorXd& u) {
    const double a = [&] {
      double v = 0.0;
      for (size_t k = ca.size(); k-- > 0;) v = v * t + ca[k];
      return v;
    }();
    const double b = [&] {
      double v = 0.0;
      for (size_t k = cb.size(); k-- > 0;) v = v * t + cb[k];
      return v;
    }();
    const double da = [&] {
      double v = 0.0;
      for (size_t k = ca.size(); k-- > 1;) v = v * t + k * ca[k];
      return v;
    }();
    const double db = [&] {
      double v = 0.0;
      for (size_t k = cb.size(); k-- > 1;) v = v * t + k * cb[k];
      return v;
    }();
    std::array<double, 4> u_arr = {u(0), u(1), u(2), u(3)};
    const std::array<double, 4> R = full_rhs(t, u_arr, a, b, da, db);
    const Eigen::VectorXd sing = mm(u);
    Eigen::VectorXd v(4);
    for (int i = 0; i < 4; ++i) v(i) = (R[i] - sing(i)) / t;
    return v;
  };

  // Jet path.  The b'^2 reciprocal and the t-power shifts cost the
  // worst-case truncation bookkeeping several orders, so all inputs are
  // rebuilt at a padded truncation; coefficients of the padded tail never
  // influence the extracted orders because every term of R is a regular
  // series whose order-h coefficient involves u-coefficients of order <= h.
  ivp.rhs_total = [full_rhs, ca, cb](const Jet& t, const std::vector<Jet>& u) {
    const int pad = 10;
    const int K = t.trunc() + pad;
    const Jet tt = Jet::variable(K);
    std::array<Jet, 4> uu;
    for (int i = 0; i < 4; ++i) {
      std::vector<double> coef(u[i].trunc(), 0.0);
      for (int e = 0; e < u[i].trunc(); ++e) coef[e] = u[i].coeff(e);
      uu[i] = Jet::series(coef, K);
    }
    const Jet a = Jet::series(ca, K);
    const Jet b = Jet::series(cb, K);
    const std::array<Jet, 4> R = full_rhs(tt, uu, a, b, a.derivative(), b.derivative());
    return std::vector<Jet>(R.begin(), R.end());
  };

  return ivp;
}

// ---------------------------------------------------------------------------
// Trajectories

ConnectionState ConnectionTrajectory::state(double t) const {
  const Eigen::Vector4d y = run.sample(t);
  return ConnectionState{y(0), y(1), y(2), y(3)};
}

ConnectionState ConnectionTrajectory::state_dot(double t) const {
  const Eigen::Vector4d y = run.sample_derivative(t);
  return ConnectionState{y(0), y(1), y(2), y(3)};
}

ConnectionTrajectory integrate_connection(const ConnectionState& z0, double t0, double T_max,
                                          const MetricProfile& profile, int j,
                                          const IntegrateOptions& opt) {
  const MetricParams& p = profile.params();
  ConnectionTrajectory traj;
  traj.params = p;
  traj.j = j;
  traj.t0 = t0;

  auto rhs = [&profile, &p](double t, const Eigen::Vector4d& y, Eigen::Vector4d& dy) {
    ConnectionStateT<double> z{y(0), y(1), y(2), y(3)};
    const ConnectionState zd = reduced_rhs(z, profile.at(t), p);
    dy << zd.f, zd.fp, zd.g, zd.h;
  };

  Dopri5<4>::Options oo;
  oo.rtol = opt.rtol;
  oo.atol = opt.atol;
  oo.store_dense = opt.store_dense;

  const double esc = opt.escape_norm;
  std::vector<Dopri5<4>::Event> events(1);
  events[0] = {[esc](double, const Eigen::Vector4d& y) {
                 return esc - y.cwiseAbs().maxCoeff();
               },
               -1, true};

  Eigen::Vector4d y0(z0.f, z0.fp, z0.g, z0.h);
  traj.run = Dopri5<4>::integrate(rhs, t0, y0, T_max, oo, events);
  traj.t_end = traj.run.t_end;
  traj.ts = traj.run.ts;
  traj.zs.reserve(traj.run.ys.size());
  for (const auto& y : traj.run.ys)
    traj.zs.push_back(ConnectionState{y(0), y(1), y(2), y(3)});

  switch (traj.run.exit) {
    case Dopri5<4>::Exit::reached_end:
      traj.exit = ConnectionTrajectory::Exit::reached_end;
      break;
    case Dopri5<4>::Exit::event_stop:
      traj.exit = ConnectionTrajectory::Exit::escaped;
      break;
    case Dopri5<4>::Exit::step_failure:
      traj.exit = ConnectionTrajectory::Exit::step_failure;
      break;
    case Dopri5<4>::Exit::max_steps:
      throw NumericError("connection integration exceeded the step budget");
  }
  return traj;
}

ConnectionTrajectory integrate_from_local(const BundleIndex& idx, const LocalData& d,
                                          const MetricProfile& profile, double t0,
                                          double T_max, int series_N,
                                          const IntegrateOptions& opt) {
  const SingularIVP ivp = local_family(idx, d, profile.params());
  check_conditions(ivp);
  const SeriesSolution sol = series_coefficients(ivp, series_N);
  const Eigen::VectorXd u = handoff(sol, t0);
  const ConnectionState z0 = u_to_state(u, t0, idx.nu());
  return integrate_connection(z0, t0, T_max, profile, idx.j, opt);
}

// ---------------------------------------------------------------------------
// Parity

ExponentTable expected_parity(const BundleIndex& idx) {
  validate(idx);
  const int j = std::abs(idx.j);
  const int s = idx.m + idx.n;
  ExponentTable tab;
  tab.ord_12 = std::abs(j - idx.n) / s;
  tab.par_12 = (tab.ord_12 % 2 == 0) ? Parity::even : Parity::odd;
  tab.ord_12p = (j + idx.m) / s;
  tab.par_12p = (tab.ord_12p % 2 == 0) ? Parity::even : Parity::odd;
  return tab;
}

ParityReport parity_check(const BundleIndex& idx, const SeriesSolution& sol) {
  ParityReport rep;
  rep.expected = expected_parity(idx);
  double worst = 0.0;
  for (int i = 0; i < sol.dim; ++i) {
    double peak = 0.0;
    for (int h = 0; h <= sol.N; ++h) peak = std::max(peak, std::abs(sol.c[h](i)));
    if (peak == 0.0) continue;
    for (int h = 1; h <= sol.N; h += 2)
      worst = std::max(worst, std::abs(sol.c[h](i)) / peak);
  }
  // The chart value of g at the orbit must be the bundle label.
  worst = std::max(worst, std::abs(sol.c[0](2) - idx.j));
  rep.max_violation = worst;
  rep.pass = worst < 1e-12;
  return rep;
}

}  // namespace g2inst
