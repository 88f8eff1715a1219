#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "g2inst/ode.hpp"
#include "g2inst/sivp.hpp"

using namespace g2inst;

namespace {

// Linear oracle with a closed form:
//   t y' = -y + t (1 - y),  y(0) = 0,
// solved by y(t) = (e^{-t} + t - 1) / t with Taylor coefficients
//   c_k = (-1)^{k+1} / (k+1)!  for k >= 1.
SingularIVP linear_oracle() {
  SingularIVP ivp;
  ivp.dim = 1;
  ivp.m_minus1 = [](const Eigen::VectorXd& y) { return Eigen::VectorXd(-y); };
  ivp.m_tail = [](double, const Eigen::VectorXd& y) {
    return Eigen::VectorXd(Eigen::VectorXd::Constant(1, 1.0) - y);
  };
  ivp.rhs_total = [](const Jet& t, const std::vector<Jet>& y) {
    return std::vector<Jet>{-y[0] + t * (1.0 - y[0])};
  };
  ivp.y0 = Eigen::VectorXd::Zero(1);
  ivp.jacobian = -Eigen::MatrixXd::Identity(1, 1);
  return ivp;
}

double linear_exact(double t) { return (std::exp(-t) + t - 1.0) / t; }

double factorial(int n) {
  double v = 1.0;
  for (int k = 2; k <= n; ++k) v *= k;
  return v;
}

}  // namespace

TEST_CASE("solvability conditions on the linear oracle") {
  const SingularIVP ivp = linear_oracle();
  const ConditionReport rep = check_conditions(ivp);
  CHECK(rep.pass);
  CHECK(rep.jacobian_exact);
  CHECK(rep.residual_norm == 0.0);
  REQUIRE(rep.dets.size() == 20);
  for (int h = 1; h <= 20; ++h)  // det(h Id + 1) = h + 1, exactly
    CHECK(rep.dets[static_cast<size_t>(h - 1)] == static_cast<double>(h + 1));
}

TEST_CASE("a vanishing singular part reduces to a regular problem") {
  SingularIVP ivp;
  ivp.dim = 1;
  ivp.m_minus1 = [](const Eigen::VectorXd& y) { return Eigen::VectorXd(0.0 * y); };
  ivp.m_tail = [](double, const Eigen::VectorXd& y) {
    return Eigen::VectorXd(2.0 - y.array()).matrix();
  };
  ivp.rhs_total = [](const Jet& t, const std::vector<Jet>& y) {
    return std::vector<Jet>{t * (2.0 - y[0])};
  };
  ivp.y0 = Eigen::VectorXd::Zero(1);
  const ConditionReport rep = check_conditions(ivp);
  CHECK(rep.pass);
  for (int h = 1; h <= rep.H; ++h)  // det(h Id) = h
    CHECK(rep.dets[static_cast<size_t>(h - 1)] == doctest::Approx(h).epsilon(1e-9));
}

TEST_CASE("an integer resonance is detected at the failing order") {
  SingularIVP ivp;
  ivp.dim = 1;
  ivp.m_minus1 = [](const Eigen::VectorXd& y) { return Eigen::VectorXd(3.0 * y); };
  ivp.m_tail = [](double, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Constant(1, 1.0);
  };
  ivp.rhs_total = [](const Jet& t, const std::vector<Jet>& y) {
    return std::vector<Jet>{3.0 * y[0] + t * Jet::constant(1.0, t.trunc())};
  };
  ivp.y0 = Eigen::VectorXd::Zero(1);
  ivp.jacobian = 3.0 * Eigen::MatrixXd::Identity(1, 1);
  CHECK_THROWS_AS(check_conditions(ivp), ConditionViolated);
  const ConditionReport rep = check_conditions(ivp, 20, 1e-10, false);
  CHECK_FALSE(rep.pass);
  CHECK(rep.failing_h == 3);

  // Bypassing the check, the recursion itself hits the singular matrix.
  CHECK_THROWS_AS(series_coefficients(ivp, 8), SingularRecursion);
}

TEST_CASE("series recursion reproduces the closed-form Taylor coefficients") {
  const SingularIVP ivp = linear_oracle();
  const SeriesSolution sol = series_coefficients(ivp, 12);
  REQUIRE(sol.N == 12);
  CHECK(sol.c[0][0] == 0.0);
  for (int k = 1; k <= 12; ++k) {
    const double exact = ((k % 2 == 1) ? 1.0 : -1.0) / factorial(k + 1);
    CHECK(sol.c[static_cast<size_t>(k)][0] ==
          doctest::Approx(exact).epsilon(1e-13));
  }
  CHECK(sol.meta[0].leading_order == 1);
  CHECK(sol.meta[0].parity == 0);  // mixed support
  CHECK(sol.trust_radius > 0.1);

  // Evaluation and its derivative against the closed form.
  for (const double t : {0.05, 0.1, 0.2, 0.3}) {
    CHECK(std::abs(sol.eval(t)[0] - linear_exact(t)) <= 1e-12);
    const double dexact = (1.0 - std::exp(-t)) / t - (std::exp(-t) + t - 1.0) / (t * t);
    CHECK(std::abs(sol.eval_derivative(t)[0] - dexact) <= 1e-10);
  }
}

TEST_CASE("order-0 truncation returns the constant initial state") {
  const SeriesSolution sol = series_coefficients(linear_oracle(), 0);
  CHECK(sol.N == 0);
  CHECK(sol.eval(0.37)[0] == 0.0);
}

TEST_CASE("parity metadata flags an even solution") {
  SingularIVP ivp;
  ivp.dim = 1;
  ivp.m_minus1 = [](const Eigen::VectorXd& y) { return Eigen::VectorXd(0.0 * y); };
  ivp.m_tail = [](double t, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Constant(1, 2.0 * t);
  };
  ivp.rhs_total = [](const Jet& t, const std::vector<Jet>&) {
    return std::vector<Jet>{2.0 * (t * t)};
  };
  ivp.y0 = Eigen::VectorXd::Zero(1);
  const SeriesSolution sol = series_coefficients(ivp, 8);
  CHECK(sol.meta[0].leading_order == 2);
  CHECK(sol.meta[0].parity == +1);
  CHECK(sol.c[2][0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("series residual decays at the truncation order") {
  const SingularIVP ivp = linear_oracle();
  const SeriesSolution sol = series_coefficients(ivp, 8);
  const auto residual = [&](double t) {
    const double y = sol.eval(t)[0];
    const double rhs = -y / t - y + 1.0;
    return std::abs(sol.eval_derivative(t)[0] - rhs);
  };
  // Halving t must shrink the residual by about 2^N; demand a factor 2^(N-2)
  // to leave room for the next-order constant.
  const double r1 = residual(0.4), r2 = residual(0.2);
  CHECK(r2 * std::pow(2.0, 6) <= r1);
}

TEST_CASE("handoff contract") {
  const SingularIVP ivp = linear_oracle();
  const SeriesSolution s8 = series_coefficients(ivp, 8);
  const SeriesSolution s16 = series_coefficients(ivp, 16);
  const double t0 = 0.1;

  SUBCASE("doubling the order leaves the handoff state unchanged") {
    CHECK(std::abs(handoff(s8, t0)[0] - handoff(s16, t0)[0]) <= 1e-10);
  }
  SUBCASE("far outside the trust radius the handoff refuses") {
    CHECK_THROWS_AS(handoff(s8, 50.0, 1e-12), OutOfTrust);
  }
  SUBCASE("integrating from t0 and t0/2 agrees at the far end") {
    using Stepper = Dopri5<1>;
    Stepper::Options opt;
    opt.rtol = 1e-12;
    opt.atol = 1e-14;
    const auto rhs = [](double t, const Stepper::Vec& y, Stepper::Vec& dy) {
      dy[0] = -y[0] / t - y[0] + 1.0;
    };
    Stepper::Vec ya = Stepper::Vec::Constant(handoff(s8, t0)[0]);
    Stepper::Vec yb = Stepper::Vec::Constant(handoff(s8, t0 / 2)[0]);
    const auto ra = Stepper::integrate(rhs, t0, ya, 2.0, opt);
    const auto rb = Stepper::integrate(rhs, t0 / 2, yb, 2.0, opt);
    CHECK(std::abs(ra.y_end[0] - rb.y_end[0]) <= 1e-6);
    CHECK(std::abs(ra.y_end[0] - linear_exact(2.0)) <= 1e-9);
  }
}

TEST_CASE("cofactor determinant is exact on structured matrices") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d(0, 0) = 2.0;
  d(1, 1) = 3.0;
  d(2, 2) = 4.0;
  CHECK(det_cofactor(d) == 24.0);

  Eigen::MatrixXd a(2, 2);
  a << 1.0, 2.0, 3.0, 4.0;
  CHECK(det_cofactor(a) == -2.0);

  // Against the library decomposition on a generic matrix.
  Eigen::MatrixXd r(4, 4);
  r << 0.5, -1.0, 2.0, 0.25, 1.5, 0.75, -0.5, 1.0, 2.0, 0.0, 1.0, -1.5, 0.25,
      1.0, 0.5, 2.0;
  CHECK(det_cofactor(r) == doctest::Approx(r.determinant()).epsilon(1e-12));
}

TEST_CASE("finite-difference jacobian") {
  const auto f = [](const Eigen::VectorXd& y) {
    Eigen::VectorXd v(2);
    v << y[0] * y[0], y[0] * y[1];
    return v;
  };
  Eigen::VectorXd y0(2);
  y0 << 1.0, 2.0;
  const Eigen::MatrixXd J = fd_jacobian(f, y0);
  CHECK(J(0, 0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(J(0, 1) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(J(1, 0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(J(1, 1) == doctest::Approx(1.0).epsilon(1e-8));
}
