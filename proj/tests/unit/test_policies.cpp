#include <catch_amalgamated.hpp>

#include <cmath>

#include "seqn/policies.hpp"
#include "support.hpp"

using namespace seqn;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("policy A with the identity direction and no extra step") {
  const TheoryPlan t = policy_A_theory(1.0, 1.0, 0.0, 0.0, 0.5);
  CHECK_THAT(t.plan.lambda_plus, WithinRel(0.5, 1e-15));
  CHECK_THAT(t.plan.lambda, WithinRel(0.25, 1e-15));
  CHECK_THAT(t.rho_lower, WithinRel(0.5, 1e-15));
}

TEST_CASE("policy A with unit extra step") {
  const TheoryPlan t = policy_A_theory(1.0, 1.0, 1.0, 1.0, 0.5);
  CHECK_THAT(t.plan.lambda_plus, WithinRel(0.5, 1e-15));
  CHECK_THAT(t.plan.lambda, WithinRel(0.25 / 3.25, 1e-15));
}

TEST_CASE("policy A keeps lambda <= lambda_plus <= 1/L_f") {
  seqn::Rng rng(1);
  for (int c = 0; c < 500; ++c) {
    const double Lf = test::uniform(rng, 1.0, 100.0);
    const TheoryPlan t =
        policy_A_theory(Lf, test::uniform(rng, 1.0, 50.0), test::uniform(rng, 0.0, 2.0),
                        test::uniform(rng, 0.0, 2.0), test::uniform(rng, 0.01, 0.99));
    REQUIRE(t.plan.lambda <= t.plan.lambda_plus);
    REQUIRE(t.plan.lambda_plus <= 1.0 / Lf);
  }
  CHECK_THROWS(policy_A_theory(1.0, 1.0, 0.0, 0.0, 1.0));
  CHECK_THROWS(policy_A_theory(1.0, 0.5, 0.0, 0.0, 0.5));
}

TEST_CASE("policy A batch schedule grows geometrically up to N") {
  CHECK(policy_A_batch(100, 4, 0) == 4);
  CHECK(policy_A_batch(100, 4, 10) == static_cast<std::size_t>(std::ceil(4 * std::pow(1.05, 10))));
  CHECK(policy_A_batch(100, 4, 1000) == 100);
}

TEST_CASE("policy B first step") {
  const StepPlan p = policy_B_decaying_alpha(1.0, 1.0, 0);
  CHECK_THAT(p.lambda_plus, WithinRel(1.0 / 6.0, 1e-15));
  CHECK_THAT(p.beta, WithinRel(1.0 / 9.0, 1e-15));
  CHECK_THAT(p.alpha, WithinRel(1.0 / 54.0, 1e-15));
  CHECK(p.lambda == p.lambda_plus);
}

TEST_CASE("policy B step halves when k + 1 quadruples") {
  for (std::size_t k : {0u, 3u, 24u}) {
    const double a = policy_B_decaying_alpha(2.5, 3.0, k).lambda_plus;
    const double b = policy_B_decaying_alpha(2.5, 3.0, 4 * (k + 1) - 1).lambda_plus;
    CHECK_THAT(b, WithinRel(0.5 * a, 1e-14));
  }
  for (std::size_t k = 0; k < 50; ++k)
    CHECK(policy_B_decaying_alpha(3.0, 7.0, k).beta * 7.0 <= 1.0 / (9.0 * 3.0) * (1 + 1e-15));
}

TEST_CASE("policy C parameters") {
  const RatePlan c = policy_C_rate(1000, 1.0, 1.0);
  CHECK(c.K == 10);
  CHECK(c.b == 100);
  CHECK(c.b_plus == 100);
  CHECK_THAT(c.gamma, WithinAbs((std::sqrt(5.0) - 1.0) / 2.0, 1e-16));
  CHECK_THAT(c.gamma, WithinAbs(0.618033988, 1e-9));

  const RatePlan d = policy_C_rate(1000, 2.0, 1.0);
  CHECK_THAT(d.plan.lambda_plus, WithinAbs(0.309017, 1e-6));
  CHECK_THAT(d.plan.lambda, WithinAbs(0.0772542, 1e-7));
  CHECK(d.plan.lambda <= d.plan.lambda_plus);

  CHECK(policy_C_rate(1001, 1.0, 1.0).K == 11);
  CHECK(policy_C_rate(200, 1.0, 1.0).K == 6);
  CHECK(policy_C_rate(8, 1.0, 1.0).b == 4);
  CHECK(policy_C_rate(5, 1.0, 1.0).b == 4);
  CHECK(policy_C_rate(3, 1.0, 1.0).b == 3);
}

TEST_CASE("adaptive policy clamps the secant estimate") {
  StepPlan prev;
  prev.lambda = 2.0;
  prev.lambda_plus = 4.0;
  const Vector x{0.0}, Fx{0.0};
  // ||z - x|| / ||F_z - F_x|| = 5000 -> clamped to 1000.
  const StepPlan hi = policy_adaptive(prev, x, Vector{5000.0}, Fx, Vector{1.0});
  CHECK_THAT(hi.lambda_plus, WithinRel(0.9 * 4.0 + 0.1 * 1000.0, 1e-15));
  CHECK_THAT(hi.lambda, WithinRel(0.5 * hi.lambda_plus, 1e-15));
  CHECK(hi.alpha == 1.0);
  CHECK(hi.beta == 1.0);
  // 1e-5 -> 1e-3
  const StepPlan lo = policy_adaptive(prev, x, Vector{1e-5}, Fx, Vector{1.0});
  CHECK_THAT(lo.lambda_plus, WithinRel(0.9 * 4.0 + 0.1 * 1e-3, 1e-15));
}

TEST_CASE("adaptive policy scales the secant by min(1, lambda)") {
  StepPlan prev;
  prev.lambda = 0.25;
  prev.lambda_plus = 0.5;
  const StepPlan p = policy_adaptive(prev, Vector{0.0, 0.0}, Vector{3.0, 4.0}, Vector{0.0, 0.0},
                                     Vector{1.0, 0.0});
  CHECK_THAT(p.lambda_plus, WithinRel(0.9 * 0.5 + 0.1 * (5.0 * 0.25), 1e-15));
}

TEST_CASE("adaptive policy keeps the plan on degenerate secants") {
  StepPlan prev;
  prev.lambda = 0.3;
  prev.lambda_plus = 0.6;
  const StepPlan same_F = policy_adaptive(prev, Vector{0.0}, Vector{1.0}, Vector{2.0}, Vector{2.0});
  CHECK(same_F.lambda_plus == prev.lambda_plus);
  CHECK(same_F.lambda == prev.lambda);
  const StepPlan same_z = policy_adaptive(prev, Vector{1.0}, Vector{1.0}, Vector{2.0}, Vector{3.0});
  CHECK(same_z.lambda_plus == prev.lambda_plus);
}

TEST_CASE("adaptive policy respects the noise cap") {
  StepPlan prev;
  prev.lambda = 1.0;
  prev.lambda_plus = 2.0;
  const StepPlan p = policy_adaptive(prev, Vector{0.0}, Vector{100.0}, Vector{0.0}, Vector{1.0}, 0.7);
  CHECK(p.lambda_plus == 0.7);
  CHECK(p.lambda == 0.35);
}

TEST_CASE("noise cap formula") {
  CHECK(std::isinf(adaptive_noise_cap(3.0, 10, 10)));
  CHECK_THAT(adaptive_noise_cap(2.0, 101, 25),
             WithinRel(1.0 / (2.0 * std::sqrt(76.0 / (25.0 * 100.0))), 1e-15));
  CHECK_THAT(adaptive_noise_cap(1.0, 5, 1), WithinRel(1.0, 1e-15));
  CHECK_THROWS(adaptive_noise_cap(0.0, 10, 2));
  CHECK_THROWS(adaptive_noise_cap(1.0, 10, 0));
}

TEST_CASE("adaptive initial step") {
  CHECK(adaptive_initial(4.0).lambda_plus == 0.25);
  CHECK(adaptive_initial(0.5).lambda_plus == 1.0);
  CHECK(adaptive_initial(4.0, 0.1).lambda_plus == 0.1);
  CHECK(adaptive_initial(4.0).lambda == 0.125);
}
