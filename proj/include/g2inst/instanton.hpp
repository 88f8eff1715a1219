#pragma once
// The invariant instanton ODE system over a metric profile: the general
// six-matrix form, its reduction to four scalar functions (f, f', g, h)
// when m = n, the singular initial value problem of the local solutions at
// the singular orbit, trajectory integration over a profile, and the
// parity/leading-exponent bookkeeping of the series there.

#include <functional>
#include <memory>
#include <vector>

#include "g2inst/metric.hpp"
#include "g2inst/ode.hpp"
#include "g2inst/sivp.hpp"
#include "g2inst/su2.hpp"
#include "g2inst/types.hpp"

namespace g2inst {

// Reduced flow (valid for m = n), with the coefficient triple (Phi, Psi, Chi)
// of the m-channel:
//   2 a'^3 b'^2 f_dot  = f'(1 - h + g/2) Phi + f (g - 1) Chi + f'(g/2 + h) Psi
//   2 a'^3 b'^2 fp_dot = f (1 - g/2 - h) Phi - f'(g + 1) Chi + f (h - g/2) Psi
//   2 a'^4 b'  g_dot   = (f^2 - f'^2 - g)(Phi - Psi)
//   2 a'^4 b'  h_dot   = (h - f'^2/2 - f^2/2)(Phi + Psi) - 2 f f' Chi
// Throws SingularTime on the double path when b' = 0 (the t = 0 pole).
template <class S>
ConnectionStateT<S> reduced_rhs(const ConnectionStateT<S>& z, const MetricSampleT<S>& s,
                                const MetricParams& p);

// The full invariant system for six su(2) components; mixed channels enter
// through the coefficient triples of both m and n directions.  State layout
// matches InvariantConnection::pack().
InvariantConnection general_rhs(const InvariantConnection& c, const MetricSample& s,
                                const MetricParams& p);

// Bundle label: the integer j of the isotropy character.  On the m = n = 1
// geometry the invariant setup requires j odd; nu = (j + 1)/2 is the leading
// exponent parameter of the local solutions.
struct BundleIndex {
  int m = 1;
  int n = 1;
  int j = 1;
  int nu() const { return (j + 1) / 2; }
};

// Congruence check: (j - n) must be divisible by (m + n) (equivalently
// (j + m)); throws WrongBundle otherwise.  Negative j mirrors to -j.
void validate(const BundleIndex& idx);

// Free parameters of the local solution family at the singular orbit.
struct LocalData {
  double f0 = 0.0;
  double h0 = 0.0;
};

// Singular initial value problem of the local solutions in the desingularized
// variables u = (f t^(1-nu), f' t^(-nu), g, h) over the near-orbit metric
// series.  The returned problem carries the exact Jacobian of its singular
// part, whose solvability determinants are h^3 (h + 2 nu).
SingularIVP local_family(const BundleIndex& idx, const LocalData& d, const MetricParams& p,
                         int metric_order = 24);

// Initial u-state of the family: (f0, fp1 * f0, 2 nu - 1, h0) with
// fp1 = (beta^3 (1 - 2 h0) + 1 - nu) / (4 nu r0 beta^2).
Eigen::Vector4d local_u0(const BundleIndex& idx, const LocalData& d, const MetricParams& p);

// Conversion between the u-chart and the reduced state at time t > 0.
ConnectionState u_to_state(const Eigen::Vector4d& u, double t, int nu);

// ---------------------------------------------------------------------------
// Trajectories

struct ConnectionTrajectory {
  MetricParams params;
  int j = 1;
  double t0 = 0.0, t_end = 0.0;
  std::vector<double> ts;             // accepted step times
  std::vector<ConnectionState> zs;    // states at the accepted times
  Dopri5<4>::Result run;              // dense representation (store_dense on)
  enum class Exit { reached_end, escaped, step_failure } exit = Exit::reached_end;

  ConnectionState state(double t) const;       // dense sample
  ConnectionState state_dot(double t) const;   // dense derivative sample
  double tau(size_t i) const { return std::log(ts[i]); }
};

struct IntegrateOptions {
  double rtol = 1e-11;
  double atol = 1e-12;
  double escape_norm = 1e6;  // terminal when max |z_i| exceeds this
  bool store_dense = true;
};

// Integrates the reduced system from (t0, z0) over the profile until T_max,
// escape, or stepper failure.
ConnectionTrajectory integrate_connection(const ConnectionState& z0, double t0, double T_max,
                                          const MetricProfile& profile, int j,
                                          const IntegrateOptions& opt = IntegrateOptions());

// Convenience: local series handoff at t0 followed by integration.  The
// series order N and handoff tolerance are those of the engine defaults.
ConnectionTrajectory integrate_from_local(const BundleIndex& idx, const LocalData& d,
                                          const MetricProfile& profile, double t0,
                                          double T_max, int series_N = 8,
                                          const IntegrateOptions& opt = IntegrateOptions());

// ---------------------------------------------------------------------------
// Parity and leading exponents at the singular orbit

enum class Parity { even, odd };

struct ExponentTable {
  int ord_12;       // leading t-exponent of the A_12-type entries (f)
  Parity par_12;
  int ord_12p;      // leading t-exponent of the A_12'-type entries (f')
  Parity par_12p;
};

// Leading exponents |j - n|/(m + n) and (j + m)/(m + n) with parities given
// by the parity of the quotient; throws WrongBundle when the congruence
// fails.
ExponentTable expected_parity(const BundleIndex& idx);

struct ParityReport {
  ExponentTable expected;
  double max_violation = 0.0;  // largest forbidden-parity coefficient (relative)
  bool pass = false;
};

// Checks a computed u-series against the expected parity: all components of
// the u-chart must be even in t, and g must take the value 2 nu - 1 = j at
// t = 0.
ParityReport parity_check(const BundleIndex& idx, const SeriesSolution& sol);

// ---------------------------------------------------------------------------
// Implementation of the templated reduced flow

template <class S>
ConnectionStateT<S> reduced_rhs(const ConnectionStateT<S>& z, const MetricSampleT<S>& s,
                                const MetricParams& p) {
  if (p.m != p.n)
    throw std::invalid_argument("reduced flow requires m = n");
  if constexpr (std::is_same_v<S, double>) {
    if (s.db == 0.0)
      throw SingularTime("reduced flow evaluated at the t = 0 pole (b' = 0)");
  }
  const CoefficientTripleT<S> k = coefficients(s, p, Channel::m_channel);
  const S da2 = s.da * s.da;
  const S den1 = 2.0 * da2 * s.da * (s.db * s.db);   // 2 a'^3 b'^2
  const S den2 = 2.0 * da2 * da2 * s.db;             // 2 a'^4 b'
  ConnectionStateT<S> zdot;
  zdot.f = (z.fp * (1.0 - z.h + 0.5 * z.g) * k.Phi + z.f * (z.g - 1.0) * k.Chi +
            z.fp * (0.5 * z.g + z.h) * k.Psi) /
           den1;
  zdot.fp = (z.f * (1.0 - 0.5 * z.g - z.h) * k.Phi - z.fp * (z.g + 1.0) * k.Chi +
             z.f * (z.h - 0.5 * z.g) * k.Psi) /
            den1;
  zdot.g = ((z.f * z.f - z.fp * z.fp - z.g) * (k.Phi - k.Psi)) / den2;
  zdot.h = ((z.h - 0.5 * (z.fp * z.fp) - 0.5 * (z.f * z.f)) * (k.Phi + k.Psi) -
            2.0 * z.f * z.fp * k.Chi) /
           den2;
  return zdot;
}

}  // namespace g2inst
