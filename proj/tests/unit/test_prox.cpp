#include <catch_amalgamated.hpp>

#include <cmath>

#include "seqn/prox.hpp"
#include "support.hpp"

using namespace seqn;
using seqn::test::random_vector;
using seqn::test::uniform;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("soft_threshold shrinks toward zero with exact zeros") {
  const Vector out = soft_threshold(Vector{3.0, -0.5, 0.0}, 1.0);
  CHECK(out == Vector{2.0, 0.0, 0.0});
}

TEST_CASE("soft_threshold with tau zero is the identity") {
  Rng rng(4);
  const Vector x = random_vector(rng, 17);
  CHECK(soft_threshold(x, 0.0) == x);
}

TEST_CASE("l1 prox zeroes entries below lambda * mu") {
  const L1Norm phi(0.25);
  CHECK(phi.prox(ScaledMetric(2.0), Vector{0.3}) == Vector{0.0});
  CHECK(phi.prox(ScaledMetric(2.0), Vector{0.5}) == Vector{0.0});
  CHECK_THAT(phi.prox(ScaledMetric(2.0), Vector{0.7})[0], WithinAbs(0.2, 1e-15));
}

TEST_CASE("soft_threshold composes additively") {
  Rng rng(11);
  for (int c = 0; c < 200; ++c) {
    const Vector x = random_vector(rng, 9, 2.0);
    const double a = uniform(rng, 0.0, 1.0);
    const double b = uniform(rng, 0.0, 1.0);
    const Vector twice = soft_threshold(soft_threshold(x, a), b);
    const Vector once = soft_threshold(x, a + b);
    for (std::size_t i = 0; i < x.size(); ++i) REQUIRE_THAT(twice[i], WithinAbs(once[i], 1e-15));
  }
}

TEST_CASE("ScaledMetric rejects nonpositive or infinite lambda") {
  CHECK_THROWS(ScaledMetric(0.0));
  CHECK_THROWS(ScaledMetric(-1.0));
  CHECK_THROWS(ScaledMetric(INFINITY));
  CHECK_THROWS(L1Norm(-0.1));
}

TEST_CASE("residual with the zero function is lambda * v") {
  Rng rng(2);
  const ZeroFunction zero;
  const Vector x = random_vector(rng, 6);
  const Vector v = random_vector(rng, 6);
  const Vector r = residual(x, v, ScaledMetric(0.7), zero);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK_THAT(r[i], WithinAbs(0.7 * v[i], 1e-15));
}

TEST_CASE("residual vanishes at a stationary point of a smooth problem") {
  const ZeroFunction zero;
  const Vector r = residual(Vector{1.0, -2.0}, Vector{0.0, 0.0}, ScaledMetric(1.0), zero);
  CHECK(r == Vector{0.0, 0.0});
}

TEST_CASE("residual on a two-dimensional l1 example") {
  // x - v = [0.5, -0.1], threshold 0.2 -> prox = [0.3, 0], residual = [0.7, 0].
  const L1Norm phi(0.2);
  const Vector r = residual(Vector{1.0, 0.0}, Vector{0.5, 0.1}, ScaledMetric(1.0), phi);
  CHECK_THAT(r[0], WithinAbs(0.7, 1e-15));
  CHECK(r[1] == 0.0);
}

TEST_CASE("residual rejects mismatched dimensions") {
  const L1Norm phi(0.1);
  CHECK_THROWS_AS(residual(Vector{1.0, 2.0}, Vector{1.0}, ScaledMetric(1.0), phi),
                  std::invalid_argument);
}

TEST_CASE("moreau envelope values") {
  CHECK(moreau_envelope(Vector{0.0, 0.0}, ScaledMetric(1.3), L1Norm(0.4)) == 0.0);
  CHECK(moreau_envelope(Vector{2.0, -5.0}, ScaledMetric(1.3), L1Norm(0.0)) == 0.0);
  CHECK_THAT(moreau_envelope(Vector{2.0}, ScaledMetric(1.0), L1Norm(1.0)), WithinAbs(1.5, 1e-15));
}

TEST_CASE("moreau envelope matches a brute-force minimization") {
  // min_y |y| + (2 - y)^2 / 2 over a fine grid.
  double best = INFINITY;
  for (int k = 0; k <= 400000; ++k) {
    const double y = -1.0 + 4.0 * k / 400000.0;
    best = std::min(best, std::abs(y) + 0.5 * (2.0 - y) * (2.0 - y));
  }
  CHECK_THAT(moreau_envelope(Vector{2.0}, ScaledMetric(1.0), L1Norm(1.0)), WithinAbs(best, 1e-9));
}

TEST_CASE("prox is firmly nonexpansive") {
  Rng rng(21);
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = 1 + rng.uniform_index(12);
    const L1Norm phi(uniform(rng, 0.0, 2.0));
    const ScaledMetric m(uniform(rng, 0.01, 5.0));
    const Vector x = random_vector(rng, n, 2.0);
    const Vector y = random_vector(rng, n, 2.0);
    const Vector px = phi.prox(m, x);
    const Vector py = phi.prox(m, y);
    REQUIRE(dist_sq(px, py) <= dot(sub(x, y), sub(px, py)) + 1e-12);
  }
}

TEST_CASE("prox minimizes the regularized distance") {
  Rng rng(22);
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 1 + rng.uniform_index(8);
    const L1Norm phi(uniform(rng, 0.0, 2.0));
    const double lam = uniform(rng, 0.01, 5.0);
    const Vector x = random_vector(rng, n, 2.0);
    const Vector p = phi.prox(ScaledMetric(lam), x);
    const double at_p = phi.value(p) + dist_sq(x, p) / (2.0 * lam);
    for (int k = 0; k < 100; ++k) {
      Vector y = p;
      const Vector step = random_vector(rng, n, uniform(rng, 1e-6, 1.0));
      axpy(1.0, step, y);
      REQUIRE(at_p <= phi.value(y) + dist_sq(x, y) / (2.0 * lam) + 1e-12);
    }
  }
}

TEST_CASE("envelope gradient matches finite differences away from kinks") {
  Rng rng(23);
  int checked = 0;
  for (int c = 0; c < 300; ++c) {
    const std::size_t n = 1 + rng.uniform_index(6);
    const L1Norm phi(uniform(rng, 0.05, 1.0));
    const ScaledMetric m(uniform(rng, 0.1, 3.0));
    const double kink = m.lambda() * phi.mu();
    const Vector x = random_vector(rng, n, 2.0);
    const Vector g = moreau_envelope_gradient(x, m, phi);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(std::abs(x[i]) - kink) < 1e-4) continue;
      const double h = 1e-6;
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (moreau_envelope(xp, m, phi) - moreau_envelope(xm, m, phi)) / (2.0 * h);
      REQUIRE(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, std::abs(g[i])));
      ++checked;
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("residual_scaling_check is constant for the zero function") {
  Rng rng(5);
  const ZeroFunction zero;
  const Vector x = random_vector(rng, 4);
  const Vector v = random_vector(rng, 4);
  for (double r : residual_scaling_check(x, v, zero, {0.1, 0.5, 1.0, 2.0}))
    CHECK_THAT(r, WithinRel(norm2(v), 1e-14));
}

TEST_CASE("residual_scaling_check is nonincreasing for l1") {
  Rng rng(6);
  const std::vector<double> deltas{0.1, 0.5, 1.0, 2.0};
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = 1 + rng.uniform_index(10);
    const L1Norm phi(uniform(rng, 0.0, 2.0));
    const Vector x = random_vector(rng, n, 2.0);
    const Vector v = random_vector(rng, n, 2.0);
    const auto seq = residual_scaling_check(x, v, phi, deltas);
    for (std::size_t k = 1; k < seq.size(); ++k) REQUIRE(seq[k] <= seq[k - 1] + 1e-12);
  }
}

TEST_CASE("residual_scaling_check is zero at a fixed point with v = 0") {
  const L1Norm phi(0.5);
  for (double r : residual_scaling_check(Vector{0.0, 0.0, 0.0}, Vector{0.0, 0.0, 0.0}, phi,
                                         {0.1, 1.0, 3.0}))
    CHECK(r == 0.0);
}
