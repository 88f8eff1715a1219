// Recursion engine for initial value problems with a regular singular point:
//   t y' = M_{-1}(y) + t M(t, y),  y(0) = y0,  M_{-1}(y0) = 0,
// solved order by order through (h Id - dM_{-1}(y0)) c_h = [t^h] R(t, y_{<h}).

#include "g2inst/sivp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace g2inst {

double det_cofactor(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  if (n == 1) return A(0, 0);
  if (n == 2) return A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  double det = 0.0;
  double sign = 1.0;
  for (int col = 0; col < n; ++col, sign = -sign) {
    // Skipping exact zeros keeps the expansion free of spurious rounding:
    // the result is then a signed sum of products of matrix entries only.
    if (A(0, col) == 0.0) continue;
    Eigen::MatrixXd minor(n - 1, n - 1);
    for (int r = 1; r < n; ++r) {
      int cc = 0;
      for (int c = 0; c < n; ++c) {
        if (c == col) continue;
        minor(r - 1, cc++) = A(r, c);
      }
    }
    det += sign * A(0, col) * det_cofactor(minor);
  }
  return det;
}

Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& y0) {
  const int n = static_cast<int>(y0.size());
  Eigen::MatrixXd J(n, n);
  for (int j = 0; j < n; ++j) {
    const double step = 1e-6 * (1.0 + std::abs(y0(j)));
    Eigen::VectorXd yp = y0, ym = y0;
    yp(j) += step;
    ym(j) -= step;
    J.col(j) = (f(yp) - f(ym)) / (2.0 * step);
  }
  return J;
}

ConditionReport check_conditions(const SingularIVP& ivp, int H, double residual_tol,
                                 bool throw_on_fail) {
  ConditionReport rep;
  rep.H = H;
  rep.residual_norm = ivp.m_minus1(ivp.y0).norm();
  if (ivp.jacobian) {
    rep.jacobian = *ivp.jacobian;
    rep.jacobian_exact = true;
  } else {
    rep.jacobian = fd_jacobian(ivp.m_minus1, ivp.y0);
    rep.jacobian_exact = false;
  }

  const int n = ivp.dim;
  rep.min_abs_det = std::numeric_limits<double>::infinity();
  rep.dets.reserve(H);
  for (int h = 1; h <= H; ++h) {
    Eigen::MatrixXd A = -rep.jacobian;
    A.diagonal().array() += static_cast<double>(h);
    const double d = det_cofactor(A);
    rep.dets.push_back(d);
    rep.min_abs_det = std::min(rep.min_abs_det, std::abs(d));
    // Scale-aware zero test: the determinant of h*Id - J grows like h^n, so
    // measure against that.  With the exact Jacobians used here a resonance
    // produces a determinant of exactly 0.0.
    if (rep.failing_h == 0 && std::abs(d) <= 1e-8 * std::max(1.0, std::pow(h, n))) {
      rep.failing_h = h;
    }
  }
  rep.pass = rep.residual_norm <= residual_tol && rep.failing_h == 0;

  if (!rep.pass && throw_on_fail) {
    std::ostringstream msg;
    if (rep.residual_norm > residual_tol) {
      msg << "singular initial value problem: |M_{-1}(y0)| = " << rep.residual_norm
          << " exceeds " << residual_tol;
    } else {
      msg << "singular initial value problem: h*Id - dM_{-1}(y0) singular at h = "
          << rep.failing_h;
    }
    throw ConditionViolated(msg.str());
  }
  return rep;
}

SeriesSolution series_coefficients(const SingularIVP& ivp, int N) {
  const int n = ivp.dim;
  SeriesSolution sol;
  sol.dim = n;
  sol.N = N;
  sol.c.assign(N + 1, Eigen::VectorXd::Zero(n));
  sol.c[0] = ivp.y0;

  const Eigen::MatrixXd J =
      ivp.jacobian ? *ivp.jacobian : fd_jacobian(ivp.m_minus1, ivp.y0);

  for (int h = 1; h <= N; ++h) {
    // Evaluate R on the truncation through order h-1 and read off [t^h].
    const int trunc = h + 1;
    const Jet tj = Jet::variable(trunc);
    std::vector<Jet> yj(n);
    for (int i = 0; i < n; ++i) {
      std::vector<double> coef(h, 0.0);
      for (int k = 0; k < h; ++k) coef[k] = sol.c[k](i);
      yj[i] = Jet::series(coef, trunc);
    }
    const std::vector<Jet> out = ivp.rhs_total(tj, yj);

    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r(i) = out[i].coeff(h);

    Eigen::MatrixXd A = -J;
    A.diagonal().array() += static_cast<double>(h);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) {
      std::ostringstream msg;
      msg << "series recursion matrix singular at order " << h;
      throw SingularRecursion(msg.str(), h);
    }
    sol.c[h] = lu.solve(r);
  }

  // Trust radius by ratio test on the coefficient norms that are actually
  // populated (parity often leaves every other order empty).
  std::vector<std::pair<int, double>> mags;
  for (int h = 1; h <= N; ++h) {
    const double m = sol.c[h].lpNorm<Eigen::Infinity>();
    if (m > 1e-300) mags.emplace_back(h, m);
  }
  if (mags.size() < 2) {
    sol.trust_radius = std::numeric_limits<double>::infinity();
  } else {
    double radius = std::numeric_limits<double>::infinity();
    for (size_t k = 1; k < mags.size(); ++k) {
      const auto [h1, m1] = mags[k - 1];
      const auto [h2, m2] = mags[k];
      radius = std::min(radius, std::pow(m1 / m2, 1.0 / (h2 - h1)));
    }
    sol.trust_radius = radius;
  }

  // Component support metadata.
  sol.meta.assign(n, {});
  for (int i = 0; i < n; ++i) {
    double peak = 0.0;
    for (int h = 0; h <= N; ++h) peak = std::max(peak, std::abs(sol.c[h](i)));
    const double negligible = 1e-13 * peak;
    int lead = -1;
    bool any_even = false, any_odd = false;
    for (int h = 0; h <= N; ++h) {
      if (peak == 0.0 || std::abs(sol.c[h](i)) <= negligible) continue;
      if (lead < 0) lead = h;
      (h % 2 == 0 ? any_even : any_odd) = true;
    }
    sol.meta[i].leading_order = lead;
    sol.meta[i].parity = (any_even && any_odd) ? 0 : (any_odd ? -1 : +1);
  }
  return sol;
}

Eigen::VectorXd SeriesSolution::eval(double t) const {
  Eigen::VectorXd v = c[N];
  for (int h = N - 1; h >= 0; --h) v = v * t + c[h];
  return v;
}

Eigen::VectorXd SeriesSolution::eval_derivative(double t) const {
  Eigen::VectorXd v = static_cast<double>(N) * c[N];
  for (int h = N - 1; h >= 1; --h) v = v * t + static_cast<double>(h) * c[h];
  return v;
}

Eigen::VectorXd handoff(const SeriesSolution& sol, double t0, double tol) {
  if (!(t0 > 0.0)) throw OutOfTrust("handoff time must be positive");
  if (t0 >= sol.trust_radius) {
    std::ostringstream msg;
    msg << "handoff time " << t0 << " outside series trust radius " << sol.trust_radius;
    throw OutOfTrust(msg.str());
  }
  // Tail estimate from the last two computed orders, inflated by the
  // geometric factor of the ratio-test radius.
  double est = sol.c[sol.N].lpNorm<Eigen::Infinity>() * std::pow(t0, sol.N);
  if (sol.N >= 1)
    est += sol.c[sol.N - 1].lpNorm<Eigen::Infinity>() * std::pow(t0, sol.N - 1);
  if (std::isfinite(sol.trust_radius)) est /= 1.0 - t0 / sol.trust_radius;
  if (est > tol) {
    std::ostringstream msg;
    msg << "series truncation estimate " << est << " at t0 = " << t0 << " exceeds " << tol;
    throw OutOfTrust(msg.str());
  }
  return sol.eval(t0);
}

}  // namespace g2inst
