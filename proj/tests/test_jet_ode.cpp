#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "g2inst/jet.hpp"
#include "g2inst/ode.hpp"

using namespace g2inst;

TEST_CASE("jet constructors and coefficient access") {
  const Jet c = Jet::constant(2.5, 6);
  CHECK(c.coeff(0) == 2.5);
  CHECK(c.coeff(3) == 0.0);
  const Jet t = Jet::variable(6);
  CHECK(t.lead() == 1);
  CHECK(t.trunc() == 6);
  CHECK(t.coeff(1) == 1.0);
  CHECK(t.coeff(0) == 0.0);  // below the lead: exact zero
  CHECK_THROWS_AS(t.coeff(6), std::logic_error);
  const Jet s = Jet::series({1.0, -0.5, 0.25}, 6);
  CHECK(s.eval(0.5) == doctest::Approx(1.0 - 0.25 + 0.0625).epsilon(1e-15));
}

TEST_CASE("jet ring arithmetic is exact on dyadic data") {
  const Jet t = Jet::variable(8);
  const Jet p = 1.0 + t;   // 1 + t
  const Jet q = 1.0 - t;   // 1 - t
  const Jet pq = p * q;    // 1 - t^2
  CHECK(pq.coeff(0) == 1.0);
  CHECK(pq.coeff(1) == 0.0);
  CHECK(pq.coeff(2) == -1.0);
  const Jet sq = Jet::series({0.5, 0.25}, 8) * Jet::series({0.5, 0.25}, 8);
  CHECK(sq.coeff(0) == 0.25);
  CHECK(sq.coeff(1) == 0.25);
  CHECK(sq.coeff(2) == 0.0625);
}

TEST_CASE("jet multiplication propagates the weakest truncation") {
  const Jet t5 = Jet::variable(5);
  const Jet prod = t5 * t5;  // lead 2, known through order 5
  CHECK(prod.lead() == 2);
  CHECK(prod.trunc() == 6);
  CHECK(prod.coeff(2) == 1.0);
}

TEST_CASE("jet inversion trims exact leading zeros only") {
  const Jet t = Jet::variable(8);
  const Jet geom = (1.0 - t).inverse();  // sum t^k
  for (int k = 0; k < 6; ++k) CHECK(geom.coeff(k) == 1.0);

  const Jet x = Jet::series({0.0, 0.0, 1.0, 1.0}, 8);  // t^2 (1 + t)
  const Jet inv = x.inverse();                         // t^-2 (1 - t + ...)
  CHECK(inv.lead() == -2);
  CHECK(inv.coeff(-2) == 1.0);
  CHECK(inv.coeff(-1) == -1.0);
  CHECK(inv.coeff(0) == 1.0);
  CHECK(inv.coeff(1) == -1.0);

  CHECK_THROWS_AS(Jet(0, 6).inverse(), std::domain_error);
}

TEST_CASE("jet calculus helpers") {
  const Jet t = Jet::variable(8);
  const Jet f = 1.0 + 3.0 * t + t * t;  // 1 + 3t + t^2
  const Jet df = f.derivative();
  CHECK(df.coeff(0) == 3.0);
  CHECK(df.coeff(1) == 2.0);
  const Jet sh = f.shifted(2);
  CHECK(sh.lead() == 2);
  CHECK(sh.coeff(2) == 1.0);
  CHECK(sh.coeff(3) == 3.0);
  // mul_tpow agrees between the scalar and the jet family
  CHECK(mul_tpow(2.0, 0.5, 3) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(mul_tpow(f, t, 2).coeff(3) == 3.0);
}

// ---------------------------------------------------------------------------
// Stepper

TEST_CASE("dopri5 integrates exponential decay to tolerance") {
  using Stepper = Dopri5<1>;
  Stepper::Options opt;
  opt.rtol = 1e-11;
  opt.atol = 1e-14;
  const auto rhs = [](double, const Stepper::Vec& y, Stepper::Vec& dy) { dy[0] = -y[0]; };
  const auto res = Stepper::integrate(rhs, 0.0, Stepper::Vec::Constant(1.0), 5.0, opt);
  CHECK(res.exit == Stepper::Exit::reached_end);
  CHECK(res.t_end == 5.0);
  CHECK(std::abs(res.y_end[0] - std::exp(-5.0)) <= 1e-10);
}

TEST_CASE("dopri5 dense output matches the harmonic oscillator") {
  using Stepper = Dopri5<2>;
  Stepper::Options opt;
  opt.rtol = 1e-11;
  opt.atol = 1e-14;
  opt.store_dense = true;
  const auto rhs = [](double, const Stepper::Vec& y, Stepper::Vec& dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  Stepper::Vec y0;
  y0 << 0.0, 1.0;  // y = sin t
  const auto res = Stepper::integrate(rhs, 0.0, y0, 10.0, opt);
  REQUIRE(res.exit == Stepper::Exit::reached_end);
  double worst = 0.0, worst_d = 0.0;
  for (int i = 1; i < 400; ++i) {
    const double t = 10.0 * i / 400.0;
    const Stepper::Vec y = res.sample(t);
    worst = std::max(worst, std::abs(y[0] - std::sin(t)));
    worst = std::max(worst, std::abs(y[1] - std::cos(t)));
    const Stepper::Vec dy = res.sample_derivative(t);
    worst_d = std::max(worst_d, std::abs(dy[0] - std::cos(t)));
    worst_d = std::max(worst_d, std::abs(dy[1] + std::sin(t)));
  }
  CHECK(worst <= 1e-9);     // interpolant is one order below the step error
  CHECK(worst_d <= 1e-7);
}

TEST_CASE("dopri5 event location finds the zeros of sin t") {
  using Stepper = Dopri5<1>;
  Stepper::Options opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-14;
  const auto rhs = [](double t, const Stepper::Vec&, Stepper::Vec& dy) { dy[0] = std::cos(t); };
  std::vector<Stepper::Event> events(1);
  events[0].g = [](double, const Stepper::Vec& y) { return y[0]; };
  events[0].direction = 0;
  events[0].terminal = false;
  const auto res = Stepper::integrate(rhs, 0.1, Stepper::Vec::Constant(std::sin(0.1)), 10.0,
                                      opt, events);
  REQUIRE(res.exit == Stepper::Exit::reached_end);
  REQUIRE(res.hits.size() == 3);
  const double pi = 3.14159265358979323846;
  CHECK(std::abs(res.hits[0].t - pi) <= 1e-9);
  CHECK(std::abs(res.hits[1].t - 2 * pi) <= 1e-9);
  CHECK(std::abs(res.hits[2].t - 3 * pi) <= 1e-9);
}

TEST_CASE("dopri5 terminal event stops the run at the crossing") {
  using Stepper = Dopri5<1>;
  Stepper::Options opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-14;
  const auto rhs = [](double, const Stepper::Vec& y, Stepper::Vec& dy) { dy[0] = -y[0]; };
  std::vector<Stepper::Event> events(1);
  events[0].g = [](double, const Stepper::Vec& y) { return y[0] - 0.5; };
  events[0].direction = -1;
  events[0].terminal = true;
  const auto res =
      Stepper::integrate(rhs, 0.0, Stepper::Vec::Constant(1.0), 10.0, opt, events);
  CHECK(res.exit == Stepper::Exit::event_stop);
  CHECK(std::abs(res.t_end - std::log(2.0)) <= 1e-10);
  CHECK(std::abs(res.y_end[0] - 0.5) <= 1e-10);
}

TEST_CASE("dopri5 reports blow-up as a step failure") {
  using Stepper = Dopri5<1>;
  const auto rhs = [](double, const Stepper::Vec& y, Stepper::Vec& dy) { dy[0] = y[0] * y[0]; };
  const auto res = Stepper::integrate(rhs, 0.0, Stepper::Vec::Constant(1.0), 2.0);
  CHECK(res.exit == Stepper::Exit::step_failure);
  CHECK(res.t_end == doctest::Approx(1.0).epsilon(1e-3));  // pole of 1/(1-t)
}

TEST_CASE("dopri5 respects max_steps and h_max") {
  using Stepper = Dopri5<1>;
  Stepper::Options opt;
  opt.max_steps = 5;
  const auto rhs = [](double, const Stepper::Vec& y, Stepper::Vec& dy) { dy[0] = -y[0]; };
  const auto res = Stepper::integrate(rhs, 0.0, Stepper::Vec::Constant(1.0), 100.0, opt);
  CHECK(res.exit == Stepper::Exit::max_steps);

  Stepper::Options opt2;
  opt2.h_max = 0.25;
  const auto res2 = Stepper::integrate(rhs, 0.0, Stepper::Vec::Constant(1.0), 5.0, opt2);
  for (size_t i = 1; i < res2.ts.size(); ++i)
    CHECK(res2.ts[i] - res2.ts[i - 1] <= 0.25 + 1e-12);
}

TEST_CASE("dopri5 runs are deterministic") {
  using Stepper = Dopri5<4>;
  const auto rhs = [](double t, const Stepper::Vec& y, Stepper::Vec& dy) {
    dy[0] = y[1];
    dy[1] = -std::sin(y[0]) - 0.1 * y[1];
    dy[2] = y[3] * std::cos(t);
    dy[3] = -y[2];
  };
  Stepper::Vec y0;
  y0 << 1.0, 0.0, 0.5, -0.25;
  const auto a = Stepper::integrate(rhs, 0.0, y0, 20.0);
  const auto b = Stepper::integrate(rhs, 0.0, y0, 20.0);
  REQUIRE(a.ts.size() == b.ts.size());
  for (size_t i = 0; i < a.ts.size(); ++i) {
    CHECK(a.ts[i] == b.ts[i]);
    CHECK(a.ys[i] == b.ys[i]);
  }
}
