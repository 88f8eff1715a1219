// Closed-form reference connections of the reduced system.  The abelian
// family has g in closed form and h by a one-dimensional quadrature whose
// integrand is regular along a valid profile: the denominator satisfies
//   4 a^2 - (b - r0^3)^2 = 4 a'^4 b'^2 / (b + r0^3)^2 > 0.

#include "g2inst/reference.hpp"

#include <cmath>
#include <sstream>

#include "g2inst/instanton.hpp"

namespace g2inst {

std::array<ConnectionState, 2> flat_states() {
  return {ConnectionState{1.0, 0.0, 1.0, 0.5}, ConnectionState{-1.0, 0.0, 1.0, 0.5}};
}

ConnectionState canonical_state(int j) {
  return ConnectionState{0.0, 0.0, static_cast<double>(j), 0.0};
}

ConnectionState limit_state() {
  return ConnectionState{1.0 / 3.0, 1.0 / 3.0, 0.0, 1.0 / 3.0};
}

AbelianSolution::AbelianSolution(int j, double h0, const MetricProfile& profile, double t_max,
                                 double rtol)
    : j_(j), h0_(h0), profile_(&profile) {
  const MetricParams& p = profile.params();
  if (p.m != 1 || p.n != 1)
    throw std::invalid_argument("abelian reference implemented for the (1, 1) geometry");

  if (const auto* ip = dynamic_cast<const IntegratedProfile*>(&profile))
    tq_ = ip->handoff_time();
  else
    tq_ = 1e-3 * p.r0;
  t_max_ = std::min(t_max, profile.validity().second);
  if (t_max_ <= tq_) throw std::invalid_argument("abelian quadrature window is empty");

  // Series seed on the first panel: I(tq) = (b2^2 / (2 a1^2)) tq^2 + O(tq^4).
  const double a1 = p.r0 * p.r0 * p.beta;
  const double b2 = p.r0 * p.r0 * p.r0 / a1;
  const double I0 = 0.5 * (b2 * b2) / (a1 * a1) * tq_ * tq_;

  auto rhs = [this](double t, const Eigen::Matrix<double, 1, 1>&,
                    Eigen::Matrix<double, 1, 1>& dy) { dy(0) = integrand(t); };
  Dopri5<1>::Options oo;
  oo.rtol = rtol;
  oo.atol = 1e-14;
  oo.store_dense = true;
  Eigen::Matrix<double, 1, 1> y0;
  y0(0) = I0;
  quad_ = Dopri5<1>::integrate(rhs, tq_, y0, t_max_, oo, {});
  if (quad_.exit != Dopri5<1>::Exit::reached_end)
    throw NumericError("abelian quadrature did not reach the requested time");
}

double AbelianSolution::integrand(double t) const {
  const MetricParams& p = profile_->params();
  const MetricSample s = profile_->at(t);
  const double r3 = p.r0 * p.r0 * p.r0;
  const double den = 4.0 * s.a * s.a - (s.b - r3) * (s.b - r3);
  if (den <= 0.0) {
    std::ostringstream msg;
    msg << "abelian integrand denominator 4 a^2 - (b - r0^3)^2 = " << den
        << " is not positive at t = " << t;
    throw DenominatorVanishes(msg.str(), t);
  }
  return 2.0 * s.db * (s.b - r3) / den;
}

double AbelianSolution::g(double t) const {
  const MetricParams& p = profile_->params();
  const double r3 = p.r0 * p.r0 * p.r0;
  const double bp = profile_->at(t).b + r3;
  return 4.0 * j_ * r3 * r3 / (bp * bp);
}

double AbelianSolution::h(double t) const {
  if (t > t_max_)
    throw OutOfTrust("abelian solution sampled beyond the quadrature window");
  double I;
  if (t <= tq_) {
    const MetricParams& p = profile_->params();
    const double a1 = p.r0 * p.r0 * p.beta;
    const double b2 = p.r0 * p.r0 * p.r0 / a1;
    I = 0.5 * (b2 * b2) / (a1 * a1) * t * t;
  } else {
    I = quad_.sample(t)(0);
  }
  return h0_ * std::exp(I);
}

ConnectionState AbelianSolution::state(double t) const {
  return ConnectionState{0.0, 0.0, g(t), h(t)};
}

ConnectionState AbelianSolution::state_derivative(double t) const {
  const MetricParams& p = profile_->params();
  const MetricSample s = profile_->at(t);
  const double r3 = p.r0 * p.r0 * p.r0;
  const double bp = s.b + r3;
  const double dg = -8.0 * j_ * r3 * r3 * s.db / (bp * bp * bp);
  const double dh = h(t) * integrand(t);
  return ConnectionState{0.0, 0.0, dg, dh};
}

double AbelianSolution::flow_residual(double t) const {
  const ConnectionState z = state(t);
  const ConnectionState zd_true = state_derivative(t);
  const ConnectionState zd = reduced_rhs(z, profile_->at(t), profile_->params());
  const Eigen::Vector4d diff(zd.f - zd_true.f, zd.fp - zd_true.fp, zd.g - zd_true.g,
                             zd.h - zd_true.h);
  return diff.cwiseAbs().maxCoeff();
}

}  // namespace g2inst
