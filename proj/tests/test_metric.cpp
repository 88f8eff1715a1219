#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "g2inst/metric.hpp"
#include "oracle_data.hpp"

using namespace g2inst;

namespace {

std::mt19937 rng(20260815);
double uni(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double rel_gap(double x, double y) {
  return std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace

TEST_CASE("far-field constants") {
  CHECK(nu_infinity == doctest::Approx((std::sqrt(145.0) + 7.0) / 2.0).epsilon(1e-16));
  CHECK(nu_infinity == doctest::Approx(9.5207972893961479).epsilon(1e-15));
  CHECK(cone_slope == doctest::Approx(std::sqrt(3.0) / 54.0).epsilon(1e-16));
}

TEST_CASE("cone profile") {
  const MetricParams p{1, 1, 1.0, 1.0};
  const ConeProfile cone(p);
  const MetricSample s1 = cone.at(1.0);
  CHECK(s1.a == doctest::Approx(std::sqrt(3.0) / 54.0).epsilon(1e-15));
  CHECK(s1.b == s1.a);
  CHECK(s1.da == doctest::Approx(std::sqrt(3.0) / 18.0).epsilon(1e-15));
  const MetricSample s0 = cone.at(0.0);
  CHECK(s0.a == 0.0);
  CHECK(s0.b == 0.0);
  // exact dilation invariance of a / t^3
  const MetricSample s2 = cone.at(2.0);
  CHECK(s2.a / 8.0 == doctest::Approx(s1.a).epsilon(1e-15));
}

TEST_CASE("coefficient triple values and factorizations") {
  const MetricParams p{1, 1, 1.0, 1.0};
  SUBCASE("vanishes at the singular orbit") {
    const MetricSample s{0.0, 0.0, 1.0, 1.0, 0.0};
    const CoefficientTriple k = coefficients(s, p, Channel::m_channel);
    CHECK(k.Phi == 0.0);
    CHECK(k.Psi == 0.0);
    CHECK(k.Chi == 0.0);
  }
  SUBCASE("direct arithmetic at a = b = 1") {
    const MetricSample s{1.0, 1.0, 1.0, 1.0, 1.0};
    const CoefficientTriple k = coefficients(s, p, Channel::m_channel);
    CHECK(k.Phi == 4.0);
    CHECK(k.Psi == -4.0);
    CHECK(k.Chi == 4.0);
  }
  SUBCASE("factored combinations used by the comparison arguments") {
    for (int it = 0; it < 64; ++it) {
      const double r0 = uni(0.5, 2.0);
      MetricParams q{1, 1, r0, 1.0};
      const double r3 = r0 * r0 * r0;
      const MetricSample s{1.0, uni(0.05, 3.0), uni(0.05, 3.0), 1.0, 1.0};
      const CoefficientTriple k = coefficients(s, q, Channel::m_channel);
      const double br = s.b + r3;
      CHECK(rel_gap(k.Phi + k.Psi + 2.0 * k.Chi, br * br * (s.b - r3 + 2.0 * s.a)) <=
            1e-10);
      CHECK(rel_gap(8.0 * k.Chi - 5.0 * (k.Phi + k.Psi),
                    br * br * (8.0 * s.a - 5.0 * (s.b - r3))) <= 1e-10);
    }
  }
  SUBCASE("the two channels differ exactly when m != n") {
    const MetricParams q{1, 4, 1.0, 1.0};
    const MetricSample s{1.0, 0.7, 2.0, 1.0, 1.0};
    const CoefficientTriple km = coefficients(s, q, Channel::m_channel);
    const CoefficientTriple kn = coefficients(s, q, Channel::n_channel);
    // Phi_n - Phi_m = (n^2 - m^2) r0^3 (2a^2 + b^2 - q^2)
    const double d = (16.0 - 1.0) * (2.0 * 0.49 + 4.0 - 16.0);
    CHECK(kn.Phi - km.Phi == doctest::Approx(d).epsilon(1e-14));
  }
}

TEST_CASE("metric tensor entries and degeneracies") {
  const MetricParams p{1, 1, 1.0, 1.0};
  const MetricSample s{1.0, 0.4, 1.3, 0.9, 0.5};
  const auto G = metric_tensor(s, p);
  CHECK(G(0, 0) == 1.0);
  // e1-e1' coupling
  CHECK(G(1, 4) == doctest::Approx(-(1.3 * 1.3 - 1.0) / (2.0 * 0.9 * 0.5)).epsilon(1e-15));
  CHECK(G(1, 4) == G(4, 1));
  // e3-e3' coupling at an equal-profile sample
  const MetricSample c{3.0, 0.8, 0.8, 0.6, 0.6};
  const auto Gc = metric_tensor(c, p);
  CHECK(Gc(3, 6) ==
        doctest::Approx((0.64 - 2.0 * 0.64 + 1.0) / (2.0 * 0.36)).epsilon(1e-14));
  // degenerate frame
  MetricSample bad = s;
  bad.da = 0.0;
  CHECK_THROWS_AS(metric_tensor(bad, p), DegenerateFrame);
}

TEST_CASE("second derivatives close on the exact cone") {
  // The cone solves the flow equations exactly in the r0 -> 0 limit; at
  // finite r0 the relative residual is O(r0^3 / t^3), so a tiny r0 makes
  // the closed-form check sharp at order-one times.
  const MetricParams p{1, 1, 1e-4, 1.0};
  const ConeProfile cone(p);
  for (const double t : {1.0, 2.0, 3.0}) {
    const MetricSample s = cone.at(t);
    double dda = 0.0, ddb = 0.0;
    hitchin_rhs(s, p, dda, ddb);
    const double exact = 6.0 * cone_slope * t;
    CHECK(rel_gap(dda, exact) <= 1e-10);
    CHECK(rel_gap(ddb, exact) <= 1e-10);
  }
  MetricSample bad = cone.at(2.0);
  bad.da = 0.0;
  double dda = 0.0, ddb = 0.0;
  CHECK_THROWS_AS(hitchin_rhs(bad, p, dda, ddb), DegenerateFrame);
}

TEST_CASE("second derivatives close on the near-orbit series") {
  const MetricParams p{1, 1, 1.0, 4.0 / 3.0};
  const SeriesProfile ser = near_orbit_series(p, 12, SeriesSource::flow_recursion);
  const auto residual = [&](double t) {
    const MetricSample s = ser.at(t);
    double dda = 0.0, ddb = 0.0;
    hitchin_rhs(s, p, dda, ddb);
    // second derivatives of the truncated polynomials
    const auto& ca = ser.a_coefficients();
    const auto& cb = ser.b_coefficients();
    double sa = 0.0, sb = 0.0;
    for (size_t k = 2; k < ca.size(); ++k)
      sa += static_cast<double>(k) * static_cast<double>(k - 1) * ca[k] *
            std::pow(t, static_cast<double>(k - 2));
    for (size_t k = 2; k < cb.size(); ++k)
      sb += static_cast<double>(k) * static_cast<double>(k - 1) * cb[k] *
            std::pow(t, static_cast<double>(k - 2));
    return std::max(std::abs(dda - sa), std::abs(ddb - sb));
  };
  const double r1 = residual(0.05), r2 = residual(0.025);
  CHECK(r1 <= 1e-10);
  CHECK(r2 * 8.0 <= r1 * 1.001);  // decays at least cubically
}

TEST_CASE("printed near-orbit coefficients") {
  SUBCASE("leading data") {
    const MetricParams p{1, 1, 1.3, 0.9};
    const SeriesProfile ser = near_orbit_series(p, 4);
    const double r3 = 1.3 * 1.3 * 1.3;
    CHECK(ser.at(0.0).b == doctest::Approx(r3).epsilon(1e-15));
    CHECK(ser.a_coefficients()[1] == doctest::Approx(1.3 * 1.3 * 0.9).epsilon(1e-15));
  }
  SUBCASE("the cubic coefficient of a vanishes at beta^3 = 1/2") {
    const MetricParams p{1, 1, 1.0, std::pow(0.5, 1.0 / 3.0)};
    const SeriesProfile ser = near_orbit_series(p, 4);
    CHECK(std::abs(ser.a_coefficients()[3]) <= 1e-15);
  }
  SUBCASE("beyond order 4 the printed source refuses") {
    const MetricParams p{1, 1, 1.0, 1.0};
    CHECK_THROWS_AS(near_orbit_series(p, 6), SeriesOrderUnavailable);
  }
}

TEST_CASE("series recursion matches the frozen rational recurrence") {
  SUBCASE("m = n = 1, beta = 4/3") {
    const MetricParams p{1, 1, 1.0, 4.0 / 3.0};
    const SeriesProfile ser = near_orbit_series(p, 12, SeriesSource::flow_recursion);
    const auto& ca = ser.a_coefficients();
    const auto& cb = ser.b_coefficients();
    for (size_t k = 0; k < testdata::series11_a.size(); ++k)
      CHECK(ca[2 * k + 1] ==
            doctest::Approx(testdata::series11_a[k]).epsilon(1e-12));
    for (size_t k = 0; k < testdata::series11_b.size(); ++k)
      CHECK(cb[2 * k] == doctest::Approx(testdata::series11_b[k]).epsilon(1e-12));
    // even a / odd b coefficients are structural zeros
    CHECK(ca[2] == 0.0);
    CHECK(cb[3] == 0.0);
  }
  SUBCASE("m = 1, n = 4, beta = 1") {
    const MetricParams p{1, 4, 1.0, 1.0};
    const SeriesProfile ser = near_orbit_series(p, 10, SeriesSource::flow_recursion);
    const auto& ca = ser.a_coefficients();
    const auto& cb = ser.b_coefficients();
    for (size_t k = 0; k < testdata::series14_a.size(); ++k)
      CHECK(ca[2 * k + 1] ==
            doctest::Approx(testdata::series14_a[k]).epsilon(1e-12));
    for (size_t k = 0; k < testdata::series14_b.size(); ++k)
      CHECK(cb[2 * k] == doctest::Approx(testdata::series14_b[k]).epsilon(1e-12));
  }
  SUBCASE("printed and recursion sources agree through order 4") {
    for (const MetricParams p : {MetricParams{1, 1, 1.0, 4.0 / 3.0},
                                 MetricParams{1, 4, 1.0, 1.0},
                                 MetricParams{2, 3, 0.8, 1.1}}) {
      const SeriesProfile a = near_orbit_series(p, 4, SeriesSource::printed);
      const SeriesProfile b = near_orbit_series(p, 4, SeriesSource::flow_recursion);
      for (int k = 0; k <= 4; ++k) {
        CHECK(rel_gap(a.a_coefficients()[static_cast<size_t>(k)],
                      b.a_coefficients()[static_cast<size_t>(k)]) <= 1e-12);
        CHECK(rel_gap(a.b_coefficients()[static_cast<size_t>(k)],
                      b.b_coefficients()[static_cast<size_t>(k)]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("asymptotic series") {
  const MetricParams p{1, 1, 1.0, 1.0};
  SUBCASE("zero difference amplitude keeps the channels equal") {
    const AsymptoticProfile prof = asymptotic_series(p, 0.0, 3, 20.0);
    const MetricSample s = prof.at(50.0);
    CHECK(s.a == s.b);
    CHECK(s.da == s.db);
  }
  SUBCASE("converges to the cone at large t") {
    const AsymptoticProfile prof = asymptotic_series(p, 0.3, 3, 20.0);
    const ConeProfile cone(p);
    const double g3 = rel_gap(prof.at(1e3).a, cone.at(1e3).a);
    const double g4 = rel_gap(prof.at(1e4).a, cone.at(1e4).a);
    CHECK(g4 <= 1e-10);
    CHECK(g4 * 100.0 <= g3);  // leading correction decays like t^-3
  }
}

TEST_CASE("profile classification brackets the critical beta") {
  const MetricParams lo{1, 1, 1.0, 0.5};
  const MetricParams hi{1, 1, 1.0, 2.5};
  CHECK(classify_profile(lo) == ProfileClass::difference_slow);
  CHECK(classify_profile(hi) == ProfileClass::difference_hits_zero);
  // Past the critical value the long integration leaves the admissible
  // wedge and reports the blow-up time.
  CHECK_THROWS_AS(integrate_ac_profile(MetricParams{1, 1, 1.0, 2.5}), BlowUp);
  // No sign change inside an interval above the critical value.
  TuneOptions topt;
  topt.beta_lo = 2.0;
  topt.beta_hi = 3.0;
  CHECK_THROWS_AS(tune_beta_ac(MetricParams{1, 1, 1.0, 1.0}, topt), NoBracket);
}

TEST_CASE("tuned profile meets the far-field normalization") {
  const MetricParams base{1, 1, 1.0, 1.0};
  MetricParams p = base;
  p.beta = tune_beta_ac(base);
  CHECK(p.beta == doctest::Approx(testdata::beta_ac_regression).epsilon(1e-12));

  const IntegratedProfile prof = integrate_ac_profile(p);
  const double T = prof.t_max();
  const MetricSample far = prof.at(T);
  const double scale = cone_slope * T * T * T;
  CHECK(std::abs(far.a / scale - 1.0) <= 1e-3);
  CHECK(std::abs(far.b / scale - 1.0) <= 1e-3);

  SUBCASE("difference channel decays at the predicted exponent") {
    const DecayFit fit = fit_difference_decay(prof);
    CHECK(std::abs(fit.nu_fit - nu_infinity) / nu_infinity <= 0.02);
    CHECK(fit.amplitude > 0.0);
    // regression against the frozen run
    CHECK(fit.c0 == doctest::Approx(3.0697708368542678).epsilon(1e-6));
  }
  SUBCASE("ordering and positivity inequalities hold on the audit window") {
    const InequalityAudit audit = audit_inequalities(prof);
    CHECK(audit.all_pass);
    CHECK(audit.rows.size() == 9);
    for (const AuditRow& row : audit.rows) CHECK(row.min_margin > 0.0);
  }
  SUBCASE("the flow integral of motion stays at zero") {
    for (const double t : {0.1, 1.0, 5.0, 20.0}) {
      const MetricSample s = prof.at(t);
      const double da2 = s.da * s.da;
      const double P = (s.b + 1.0) * (s.b + 1.0);
      const double bq = s.b * s.b - 1.0;
      const double scale_q =
          4.0 * da2 * da2 * s.db * s.db + 4.0 * s.a * s.a * P + bq * bq;
      CHECK(std::abs(flow_first_integral(s, p)) / scale_q <= 1e-8);
    }
  }
  SUBCASE("metric tensor is positive definite along the profile") {
    for (int i = 0; i <= 20; ++i) {
      const double t = std::pow(10.0, -2.0 + 3.5 * i / 20.0);
      const Eigen::Matrix<double, 7, 7> G = metric_tensor(prof.at(t), p);
      Eigen::LLT<Eigen::Matrix<double, 7, 7>> llt(G);
      CHECK(llt.info() == Eigen::Success);
    }
  }
  SUBCASE("series and integration agree across the handoff") {
    const SeriesProfile ser = near_orbit_series(p, 8, SeriesSource::flow_recursion);
    const double t0 = prof.handoff_time();
    for (const double t : {t0, 1.5 * t0, 2.0 * t0}) {
      CHECK(rel_gap(ser.at(t).a, prof.at(t).a) <= 1e-11);
      CHECK(rel_gap(ser.at(t).b, prof.at(t).b) <= 1e-11);
    }
  }
  SUBCASE("halving the handoff time does not move the far field") {
    ProfileOptions o1, o2;
    o1.T_max = o2.T_max = 50.0;
    o1.t0 = 1e-3;
    o2.t0 = 5e-4;
    const IntegratedProfile p1 = integrate_ac_profile(p, o1);
    const IntegratedProfile p2 = integrate_ac_profile(p, o2);
    CHECK(rel_gap(p1.at(10.0).a, p2.at(10.0).a) <= 1e-6);
    CHECK(rel_gap(p1.at(10.0).b, p2.at(10.0).b) <= 1e-6);
  }
  SUBCASE("far field matches the difference-fitted asymptotic model") {
    const DecayFit fit = fit_difference_decay(prof);
    const AsymptoticProfile model =
        asymptotic_series(p, fit.amplitude, 3, 20.0);
    for (const double t : {30.0, 45.0, 60.0}) {
      CHECK(rel_gap(model.at(t).a, prof.at(t).a) <= 1e-3);
      CHECK(rel_gap(model.at(t).b, prof.at(t).b) <= 1e-3);
    }
  }
}

TEST_CASE("bisection tolerance contract") {
  const MetricParams p{1, 1, 1.0, 1.0};
  TuneOptions coarse, fine;
  coarse.tol = 1e-7;
  fine.tol = 1e-8;
  const double b1 = tune_beta_ac(p, coarse);
  const double b2 = tune_beta_ac(p, fine);
  CHECK(std::abs(b1 - b2) <= 1.2e-7);  // within the coarse bracket width
  CHECK(std::abs(b1 - testdata::beta_ac_regression) <= 1e-6);
}
