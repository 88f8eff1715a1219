#pragma once
// Closed-form reference solutions of the reduced system used as oracles:
// the two irreducible flat connections, the abelian family (f = f' = 0)
// solved by quadrature over a profile, the canonical-connection limit at
// infinity, and the discrete symmetries of the reduced flow.

#include <array>
#include <memory>

#include "g2inst/metric.hpp"
#include "g2inst/ode.hpp"
#include "g2inst/types.hpp"

namespace g2inst {

// The two irreducible flat connections in reduced coordinates:
// (f, f', g, h) = (+-1, 0, 1, 1/2).
std::array<ConnectionState, 2> flat_states();

// Canonical invariant connection of a bundle with character j: (0, 0, j, 0).
ConnectionState canonical_state(int j);

// Limit of the converging instanton family at infinity: (1/3, 1/3, 0, 1/3)
// in the cone chart.
ConnectionState limit_state();

// Discrete symmetries of the reduced flow: the involution swapping the two
// homogeneous directions and the sign gauge transformation.
inline ConnectionState involution(const ConnectionState& z) {
  return {z.fp, z.f, -z.g, z.h};
}
inline ConnectionState sign_gauge(const ConnectionState& z) {
  return {-z.f, -z.fp, z.g, z.h};
}

// Abelian solutions over a profile (m = n = 1): g is closed-form,
//   g(t) = 4 j r0^6 / (b + r0^3)^2,
// and h solves h' / h = 2 b' (b - r0^3) / (4 a^2 - (b - r0^3)^2), integrated
// as a cumulative quadrature I(t) with the series value on the first panel,
//   I(t0) = (b2^2 / (2 a1^2)) t0^2 + O(t0^4),   h = h0 exp(I).
class AbelianSolution {
 public:
  AbelianSolution(int j, double h0, const MetricProfile& profile, double t_max,
                  double rtol = 1e-11);

  double g(double t) const;
  double h(double t) const;
  ConnectionState state(double t) const;             // (0, 0, g, h)
  ConnectionState state_derivative(double t) const;  // (0, 0, g', h')

  // Residual |reduced_rhs(state) - state_derivative| at time t.
  double flow_residual(double t) const;

  int j() const { return j_; }
  double h0() const { return h0_; }
  double quadrature_start() const { return tq_; }

 private:
  double integrand(double t) const;  // throws DenominatorVanishes

  int j_;
  double h0_;
  const MetricProfile* profile_;
  double tq_, t_max_;
  Dopri5<1>::Result quad_;
};

}  // namespace g2inst
