#pragma once
// Dynamical-systems view of the reduced flow at infinity.  In the cone chart
// with rescaled time tau = log t the system splits as
//   dz/dtau = F(z) + G(z, tau),
// where F is the autonomous cone flow with hyperbolic fixed points z0 = 0 and
// z+- = (+-1/3, +-1/3, 0, 1/3), and G is the exponentially decaying
// correction of the asymptotically conical metric.  This module provides the
// fixed-point linearizations, the closed-form heteroclinic orbit, trajectory
// classification, the h0-shooting and family sweep that realize the
// one-parameter instanton family, the linearization along the abelian
// solutions used by the second shooting stage, and a Lyapunov-Perron
// iteration for the stable manifold of z+ as an independent cross-check.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "g2inst/instanton.hpp"
#include "g2inst/metric.hpp"
#include "g2inst/types.hpp"

namespace g2inst {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

inline Vec4 pack(const ConnectionState& z) { return Vec4(z.f, z.fp, z.g, z.h); }
inline ConnectionState unpack_state(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

// Autonomous cone flow:
//   f_dot  = 2 f'(2 - 3h + g/2) + 2 f (g - 1)
//   fp_dot = 2 f (2 - 3h - g/2) - 2 f'(g + 1)
//   g_dot  = 6 (f^2 - f'^2 - g)
//   h_dot  = 2 h - f'^2 - f^2 - 4 f f'
Vec4 autonomous_F(const Vec4& z);
Mat4 autonomous_DF(const Vec4& z);

// Leading metric correction, exponentially small in tau:
//   G(z, tau) = 36 sqrt(3) r0^3 e^(-3 tau) *
//               (f'(h - 1 - g/2), f (h + g/2 - 1), f'^2 - f^2 + g,
//                f'^2/2 + f^2/2 - h)
Vec4 nonautonomous_G(const Vec4& z, double tau, double r0);

enum class ConeFixedPoint { origin, plus, minus };

Vec4 fixed_point(ConeFixedPoint which);

struct FixedPointRecord {
  ConeFixedPoint which;
  Vec4 z;
  Mat4 DF;                 // analytic Jacobian
  Vec4 eigenvalues;        // descending
  Mat4 eigenvectors;       // columns matching the eigenvalues
  std::vector<int> stable, unstable;  // column indices by eigenvalue sign
  double fd_error;         // max entrywise gap to a finite-difference Jacobian
};

// Analytic Jacobian with eigendecomposition and a finite-difference
// cross-check; throws EigenSolveFailure if the decomposition fails.
FixedPointRecord linearize(ConeFixedPoint which);

// Closed-form heteroclinic orbit from z0 to z(sign): with
// w(tau) = 1/(3 + e^(-2 tau)), the orbit is (s w, s w, 0, w), s = +-1.
Vec4 heteroclinic_oracle(double tau, int sign);

// ---------------------------------------------------------------------------
// Shooting

enum class ShotClass { converged_plus, converged_minus, diverged_up, diverged_down, undecided };

const char* to_string(ShotClass c);

struct ShotOutcome {
  ShotClass cls = ShotClass::undecided;
  int escape_sign = 0;      // sign of h at the escape event, 0 without one
  double exit_tau = 0.0;    // escape time, or the argmin of the target distance
  double distance = 0.0;    // minimal distance to the matched fixed point
  double g_monotone_violation = 0.0;  // largest increase of g in the far field
  std::string note;
};

// Classification of a trajectory: converged_plus/minus when it enters the
// eps_conv ball of z+ or z-, diverged_up/down by the sign of h at escape,
// undecided otherwise (with the closest-approach distance recorded).
ShotOutcome classify_trajectory(const ConnectionTrajectory& traj, double eps_conv = 1e-3,
                                double escape_norm = 1e6);

struct ShootOptions {
  double t0 = 0.0;          // 0: 1e-3 * r0
  double tau_end = 12.0;    // horizon in tau = log t
  double rtol = 1e-11;
  double atol = 1e-12;
  double eps_conv = 1e-3;
  double escape_norm = 1e6;
  double tol_h0 = 0.0;      // bracket width target; 0: bisect to the fp floor
  int series_N = 8;
  int scan_points = 17;
  double scan_lo = -0.5, scan_hi = 0.5;
  int max_retries = 1;      // tau_end extensions on undecided midpoints
};

struct ShootResult {
  double f0 = 0.0;
  double h0 = 0.0;            // tuned value
  ShotOutcome outcome;        // of the final run at h0
  int bisections = 0;
  std::pair<double, double> bracket{0.0, 0.0};  // final bracket
  ConnectionTrajectory trajectory;              // the final run
};

// Scans scan_points values of h0 in [scan_lo, scan_hi] for a sign change of
// the escape direction (NoBracket if none), then bisects until the bracket
// width reaches tol_h0 (NoConvergence if classification stalls).  jobs > 1
// parallelizes the initial scan.
ShootResult shoot_h0(double f0, const MetricProfile& profile,
                     const ShootOptions& opt = ShootOptions(), int jobs = 1);

struct SweepRow {
  double f0 = 0.0, h0 = 0.0;
  ShotClass cls = ShotClass::undecided;
  double exit_tau = 0.0, distance = 0.0;
  double max_curvature = 0.0;  // sup of |F_A| along the trajectory
};

// Shoots every f0 in the grid (parallel across grid entries; jobs = 0 uses
// the hardware count).
std::vector<SweepRow> family_sweep(const std::vector<double>& f0_grid,
                                   const MetricProfile& profile,
                                   const ShootOptions& opt = ShootOptions(), int jobs = 0);

// C0 distance, over the decade of t ending at t_end (0: the closest approach
// to the target, outcome.exit_tau of the classification), to the
// tau-translate of the heteroclinic oracle anchored at the window start
// (solving w(tau_a - sigma) = h(tau_a) for the shift sigma).  Returns
// infinity when the anchor is outside the convergent regime 0 < h < 1/3.
// The window must end at or before the closest approach: past it the
// leftover unstable component of a bisected shot grows like e^(4 tau) and
// the trajectory leaves the heteroclinic for good.
double far_field_translate_distance(const ConnectionTrajectory& traj, int sign,
                                    double t_end = 0.0, double decades = 1.0);

// ---------------------------------------------------------------------------
// Linearization along the abelian solutions (second shooting stage)

// Jacobian of the reduced t-flow at the abelian state (0, 0, g, 0): with
// Phi~ = Phi/(2 a'^3 b'^2), likewise Psi~, Chi~, and Phi^ = Phi/(2 a'^4 b'),
// likewise Psi^:
//   [ Chi~ (g-1)              Phi~ + (g/2)(Phi~+Psi~)   0            0        ]
//   [ Phi~ - (g/2)(Phi~+Psi~) -Chi~ (g+1)               0            0        ]
//   [ 0                       0                         Psi^ - Phi^  0        ]
//   [ 0                       0                         0            Phi^+Psi^]
Mat4 stage2_linearization(const MetricProfile& profile, double t, double g_val);

// The two sign functionals controlling the comparison argument:
//   S1 = 3 Phi~ + (g/2)(8 Chi~ - 5 (Phi~ + Psi~))   (positive on the profile)
//   S2 = -g (Phi~ + Psi~ + 2 Chi~)                  (negative on the profile)
std::pair<double, double> stage2_region_functionals(const MetricProfile& profile, double t,
                                                    double g_val);

// ---------------------------------------------------------------------------
// Lyapunov-Perron iteration for the stable manifold of z+-

struct ManifoldOptions {
  double grid_length = 15.0;
  int grid_points = 601;
  int max_iter = 60;
  double fp_tol = 1e-12;
  double r0 = 1.0;
  // Nonautonomous correction g(z, tau); defaults to nonautonomous_G with r0.
  std::function<Vec4(const Vec4&, double)> correction;
};

struct ManifoldSample {
  Vec4 state_tau0;            // full state on the manifold at tau0
  std::vector<double> gamma;  // successive contraction factors
  int iterations = 0;
  bool converged = false;
};

// Solves the integral equation for the stable manifold of the fixed point:
// on x = z - z_fp, x(tau) = e^((tau-tau0)A) xs + integral of the split
// propagator against F(z_fp + x) - A x + G, with xs the prescribed stable
// component at tau0.  Throws NoContraction if the iteration expands.
ManifoldSample stable_manifold_iteration(ConeFixedPoint which, const Vec4& stable_component,
                                         double tau0,
                                         const ManifoldOptions& opt = ManifoldOptions());

// Correction term measured from an actual profile instead of the model
// expansion: g(z, tau) = t * reduced_rhs(z, profile.at(t)) - F(z) at t = e^tau.
std::function<Vec4(const Vec4&, double)> profile_pullback_correction(
    const MetricProfile& profile);

}  // namespace g2inst
