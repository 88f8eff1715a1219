#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "g2inst/su2.hpp"

using namespace g2inst;

namespace {

const Su2 E1(1, 0, 0), E2(0, 1, 0), E3(0, 0, 1);

bool near3(const Su2& x, const Su2& y, double tol = 1e-15) {
  return (x - y).lpNorm<Eigen::Infinity>() <= tol;
}

std::mt19937 rng(20260815);
double uni() {
  static std::uniform_real_distribution<double> d(-1.0, 1.0);
  return d(rng);
}
Su2 random_su2() { return Su2(uni(), uni(), uni()); }

// Positive-definite sample away from the singular orbit (cone data, where
// all the 2x2 blocks are diagonally dominant).
MetricSample cone_sample() {
  const double t = 3.0, s3 = std::sqrt(3.0) / 54.0;
  return {t, s3 * t * t * t, s3 * t * t * t, 3 * s3 * t * t, 3 * s3 * t * t};
}

}  // namespace

TEST_CASE("bracket structure constants") {
  CHECK(near3(bracket(E1, E2), E3));
  CHECK(near3(bracket(E2, E3), E1));
  CHECK(near3(bracket(E3, E1), E2));
  CHECK(near3(bracket(E1, E1), Su2::Zero()));
  CHECK(near3(bracket(E2, E1), -E3));
}

TEST_CASE("bracket is antisymmetric, bilinear, and satisfies Jacobi") {
  for (int it = 0; it < 64; ++it) {
    const Su2 x = random_su2(), y = random_su2(), z = random_su2();
    CHECK(near3(bracket(x, y) + bracket(y, x), Su2::Zero(), 1e-12));
    const double s = uni();
    CHECK(near3(bracket(s * x + y, z), s * bracket(x, z) + bracket(y, z), 1e-12));
    const Su2 jac = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) +
                    bracket(z, bracket(x, y));
    CHECK(near3(jac, Su2::Zero(), 1e-12));
  }
}

TEST_CASE("embed_reduced places the four scalars on the distinguished axes") {
  SUBCASE("irreducible flat state") {
    const InvariantConnection c = embed_reduced({1.0, 0.0, 1.0, 0.5});
    CHECK(near3(c.alpha[0], E1));
    CHECK(near3(c.alpha[1], E2));
    CHECK(near3(c.alpha[2], E3));
    for (int i = 0; i < 3; ++i) CHECK(near3(c.alphaP[static_cast<size_t>(i)], Su2::Zero()));
  }
  SUBCASE("zero state") {
    const InvariantConnection c = embed_reduced({0.0, 0.0, 0.0, 0.0});
    CHECK(near3(c.pack(), InvariantConnection::Packed::Zero()));
  }
  SUBCASE("canonical state splits j/2 across the two vertical axes") {
    const InvariantConnection c = embed_reduced({0.0, 0.0, 3.0, 0.0});
    CHECK(near3(c.alpha[2], 1.5 * E3));
    CHECK(near3(c.alphaP[2], -1.5 * E3));
    CHECK(near3(c.alpha[0], Su2::Zero()));
    CHECK(near3(c.alpha[1], Su2::Zero()));
    CHECK(near3(c.alphaP[0], Su2::Zero()));
    CHECK(near3(c.alphaP[1], Su2::Zero()));
  }
  SUBCASE("extract_reduced inverts the embedding") {
    const ConnectionState z{0.3, -0.7, 1.9, 0.21};
    const ConnectionState w = extract_reduced(embed_reduced(z));
    CHECK(w.f == doctest::Approx(z.f).epsilon(1e-15));
    CHECK(w.fp == doctest::Approx(z.fp).epsilon(1e-15));
    CHECK(w.g == doctest::Approx(z.g).epsilon(1e-15));
    CHECK(w.h == doctest::Approx(z.h).epsilon(1e-15));
  }
}

TEST_CASE("curvature of the distinguished connections") {
  SUBCASE("flat state is flat") {
    const CurvatureComponents F = curvature(embed_reduced({1.0, 0.0, 1.0, 0.5}));
    for (size_t i = 0; i < 3; ++i) {
      CHECK(near3(F.e_iip[i], Su2::Zero()));
      CHECK(near3(F.e_jk[i], Su2::Zero()));
      CHECK(near3(F.e_jpkp[i], Su2::Zero()));
      CHECK(near3(F.e_jkp[i], Su2::Zero()));
      CHECK(near3(F.e_jpk[i], Su2::Zero()));
    }
  }
  SUBCASE("zero connection has only vanishing brackets") {
    const CurvatureComponents F = curvature(InvariantConnection{});
    for (size_t i = 0; i < 3; ++i) {
      CHECK(near3(F.e_jk[i], Su2::Zero()));
      CHECK(near3(F.e_jpkp[i], Su2::Zero()));
    }
  }
  SUBCASE("pure g state survives only in the vertical 2-form slots") {
    const CurvatureComponents F = curvature(embed_reduced({0.0, 0.0, 1.0, 0.0}));
    CHECK(near3(F.e_jk[2], -0.5 * E3));
    CHECK(near3(F.e_jpkp[2], 0.5 * E3));
    CHECK(near3(F.e_jk[0], Su2::Zero()));
    CHECK(near3(F.e_jk[1], Su2::Zero()));
    CHECK(near3(F.e_jpkp[0], Su2::Zero()));
    CHECK(near3(F.e_jpkp[1], Su2::Zero()));
    for (size_t i = 0; i < 3; ++i) {
      CHECK(near3(F.e_iip[i], Su2::Zero()));
      CHECK(near3(F.e_jkp[i], Su2::Zero()));
      CHECK(near3(F.e_jpk[i], Su2::Zero()));
    }
  }
}

TEST_CASE("reduced-ansatz curvature stays on the predicted axes") {
  // With alpha_1, alpha_2 along E1, E2 and alpha_3 along E3 (same primed),
  // every curvature component must be a multiple of the single basis element
  // fixed by the cyclic structure: the i-th entry of each family lies on E_i,
  // and the vertical e_ii' slots vanish.
  for (int it = 0; it < 32; ++it) {
    const ConnectionState z{uni(), uni(), uni(), uni()};
    const CurvatureComponents F = curvature(embed_reduced(z));
    for (size_t i = 0; i < 3; ++i) {
      CHECK(near3(F.e_iip[i], Su2::Zero(), 1e-12));
      for (size_t ax = 0; ax < 3; ++ax) {
        if (ax == i) continue;
        CHECK(std::abs(F.e_jk[i][static_cast<int>(ax)]) <= 1e-12);
        CHECK(std::abs(F.e_jpkp[i][static_cast<int>(ax)]) <= 1e-12);
        CHECK(std::abs(F.e_jkp[i][static_cast<int>(ax)]) <= 1e-12);
        CHECK(std::abs(F.e_jpk[i][static_cast<int>(ax)]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("sign gauge acts on curvature by the axis-flip automorphism") {
  // Ad of the rotation by pi about E3 sends (E1, E2, E3) to (-E1, -E2, E3)
  // and maps the embedded state (f, f', g, h) to (-f, -f', g, h).
  const auto flip = [](const Su2& v) { return Su2(-v[0], -v[1], v[2]); };
  for (int it = 0; it < 32; ++it) {
    const ConnectionState z{uni(), uni(), uni(), uni()};
    const CurvatureComponents F = curvature(embed_reduced(z));
    const CurvatureComponents Fg =
        curvature(embed_reduced({-z.f, -z.fp, z.g, z.h}));
    for (size_t i = 0; i < 3; ++i) {
      CHECK(near3(flip(F.e_iip[i]), Fg.e_iip[i], 1e-12));
      CHECK(near3(flip(F.e_jk[i]), Fg.e_jk[i], 1e-12));
      CHECK(near3(flip(F.e_jpkp[i]), Fg.e_jpkp[i], 1e-12));
      CHECK(near3(flip(F.e_jkp[i]), Fg.e_jkp[i], 1e-12));
      CHECK(near3(flip(F.e_jpk[i]), Fg.e_jpk[i], 1e-12));
    }
  }
}

TEST_CASE("constraint residual") {
  const MetricSample s = cone_sample();
  SUBCASE("vanishes identically on the reduced ansatz") {
    for (int it = 0; it < 16; ++it) {
      const ConnectionState z{uni(), uni(), uni(), uni()};
      CHECK(constraint_residual(embed_reduced(z), s) <= 1e-14);
    }
  }
  SUBCASE("vanishes on the zero connection") {
    CHECK(constraint_residual(InvariantConnection{}, s) == 0.0);
  }
  SUBCASE("measures a single unit bracket") {
    InvariantConnection c;
    c.alpha[0] = E1;
    c.alphaP[0] = E2;
    MetricSample unit = s;
    unit.da = unit.db = 1.0;
    CHECK(constraint_residual(c, unit) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("curvature norm") {
  const MetricParams p{1, 1, 1.0, 4.0 / 3.0};
  const MetricSample s = cone_sample();
  const InvariantConnection zero_dot;
  SUBCASE("flat and zero connections have zero curvature norm") {
    CHECK(curvature_norm(embed_reduced({1.0, 0.0, 1.0, 0.5}), zero_dot, s, p) <= 1e-12);
    CHECK(curvature_norm(InvariantConnection{}, zero_dot, s, p) ==
          doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("nonzero for the canonical state") {
    CHECK(curvature_norm(embed_reduced({0.0, 0.0, 1.0, 0.0}), zero_dot, s, p) > 1e-3);
  }
  SUBCASE("rejects an indefinite sample") {
    // Small a with b near zero makes the e1-e1' block indefinite.
    const MetricSample bad{1.0, 0.1, 0.1, 1.0, 1.0};
    CHECK_THROWS_AS(curvature_norm(embed_reduced({0.3, 0.1, 1.0, 0.2}), zero_dot, bad, p),
                    NonPositiveMetric);
  }
}
