#pragma once
// Series engine for initial value problems with a regular singular point at
// t = 0:
//   t y' = M_{-1}(y) + t M(t, y),  y(0) = y0,  M_{-1}(y0) = 0.
// A unique analytic solution exists when h*Id - dM_{-1}(y0) is invertible
// for every integer h >= 1; the coefficients then satisfy the recursion
//   (h*Id - dM_{-1}(y0)) c_h = [t^h] R(t, y_{h-1}(t)),
// with R(t, y) = M_{-1}(y) + t M(t, y) and y_{h-1} the polynomial truncation
// through order h-1.  The order-h coefficient of R is read off by running
// the right-hand side on jets, so the recursion reuses the same templated
// formulas as the double-precision evaluation.

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "g2inst/jet.hpp"
#include "g2inst/types.hpp"

namespace g2inst {

struct SingularIVP {
  int dim = 0;
  // Singular part M_{-1}(y).
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> m_minus1;
  // Regular part M(t, y) for t > 0.
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> m_tail;
  // Full right-hand side R(t, y) = M_{-1}(y) + t M(t, y) on jets.  The first
  // argument is always the identity jet, which fixes the truncation order;
  // the y entries are polynomials sharing that order.
  std::function<std::vector<Jet>(const Jet&, const std::vector<Jet>&)> rhs_total;
  Eigen::VectorXd y0;
  // Exact Jacobian dM_{-1}(y0) when available; otherwise check_conditions
  // falls back to central finite differences.
  std::optional<Eigen::MatrixXd> jacobian;
};

struct ConditionReport {
  double residual_norm = 0.0;        // |M_{-1}(y0)|
  Eigen::MatrixXd jacobian;          // dM_{-1}(y0) actually used
  bool jacobian_exact = false;
  int H = 0;
  std::vector<double> dets;          // det(h*Id - dM_{-1}(y0)), h = 1..H
  double min_abs_det = 0.0;
  int failing_h = 0;                 // first h with a vanishing determinant, else 0
  bool pass = false;
};

// Verifies the two solvability conditions: the residual |M_{-1}(y0)| is
// below residual_tol, and det(h*Id - dM_{-1}(y0)) stays away from zero for
// h = 1..H.  Throws ConditionViolated when throw_on_fail is set.
ConditionReport check_conditions(const SingularIVP& ivp, int H = 20,
                                 double residual_tol = 1e-10,
                                 bool throw_on_fail = true);

struct SeriesSolution {
  int dim = 0;
  int N = 0;                             // highest computed order
  std::vector<Eigen::VectorXd> c;        // c[0..N], c[0] = y0
  double trust_radius = 0.0;             // ratio-test estimate
  struct ComponentMeta {
    int leading_order = 0;   // first order with a nonnegligible coefficient
    int parity = 0;          // +1 all-even support, -1 all-odd, 0 mixed
  };
  std::vector<ComponentMeta> meta;

  Eigen::VectorXd eval(double t) const;
  Eigen::VectorXd eval_derivative(double t) const;
};

// Runs the recursion through order N.  Throws SingularRecursion at the first
// order whose matrix is numerically singular.
SeriesSolution series_coefficients(const SingularIVP& ivp, int N = 8);

// Series value at the handoff time t0, with a truncation-error estimate from
// the last terms; throws OutOfTrust when the estimate exceeds tol or t0 is
// outside the trust radius.
Eigen::VectorXd handoff(const SeriesSolution& sol, double t0, double tol = 1e-9);

// Determinant by recursive first-row cofactor expansion.  For the structured
// matrices of the solvability check this evaluates exactly in floating point
// (every surviving product is a product of matrix entries), which the tests
// rely on for integer determinant values.
double det_cofactor(const Eigen::MatrixXd& A);

// Central finite-difference Jacobian with per-component step 1e-6 (1 + |y_j|).
Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& y0);

}  // namespace g2inst
