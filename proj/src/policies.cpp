#include "seqn/policies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seqn {

TheoryPlan policy_A_theory(double L_f, double nu_bar, double alpha, double beta,
                           double rho_bar) {
  if (!(rho_bar > 0.0 && rho_bar < 1.0))
    throw std::invalid_argument("policy_A_theory: rho_bar must lie in (0, 1)");
  if (!(nu_bar >= 1.0)) throw std::invalid_argument("policy_A_theory: nu_bar must be >= 1");
  if (!(L_f > 0.0)) throw std::invalid_argument("policy_A_theory: L_f must be positive");
  StepPlan p;
  p.alpha = alpha;
  p.beta = beta;
  p.lambda_plus = (1.0 - rho_bar) / L_f;
  const double m = alpha + L_f * beta * p.lambda_plus;
  p.lambda = (1.0 - rho_bar) * p.lambda_plus / (1.0 + nu_bar * nu_bar * m * m);
  return TheoryPlan{p, p.lambda / p.lambda_plus};
}

std::size_t policy_A_batch(std::size_t N, std::size_t b0, std::size_t k) {
  const double b = std::ceil(static_cast<double>(b0) * std::pow(1.05, static_cast<double>(k)));
  if (!(b < static_cast<double>(N))) return N;
  return std::max<std::size_t>(1, static_cast<std::size_t>(b));
}

StepPlan policy_B_decaying_alpha(double L_f, double nu_bar, std::size_t k) {
  if (!(nu_bar > 0.0)) throw std::invalid_argument("policy_B_decaying_alpha: nu_bar must be > 0");
  StepPlan p;
  p.lambda_plus = 1.0 / (6.0 * L_f * std::sqrt(static_cast<double>(k) + 1.0));
  p.beta = 1.0 / (9.0 * L_f * nu_bar);
  p.alpha = L_f * p.beta * p.lambda_plus;
  p.lambda = p.lambda_plus;
  return p;
}

RatePlan policy_C_rate(std::size_t N, double L, double nu_bar) {
  if (N == 0) throw std::invalid_argument("policy_C_rate: N must be positive");
  // Integer ceil of the cube root; the floating estimate is corrected in both directions.
  auto K = static_cast<std::size_t>(std::llround(std::cbrt(static_cast<double>(N))));
  while (K * K * K < N) ++K;
  while (K > 1 && (K - 1) * (K - 1) * (K - 1) >= N) --K;
  RatePlan c;
  c.K = K;
  c.b = std::min(N, K * K);
  c.b_plus = c.b;
  c.gamma = kGoldenGamma;
  c.plan.lambda_plus = kGoldenGamma / L;
  c.plan.lambda = kGoldenGamma / (L * (1.0 + 3.0 * nu_bar * nu_bar));
  c.plan.alpha = 1.0;
  c.plan.beta = 1.0;
  return c;
}

StepPlan policy_adaptive(const StepPlan& prev, ConstVec x, ConstVec z, ConstVec F_x,
                         ConstVec F_z, double cap) {
  const double dz = std::sqrt(dist_sq(z, x));
  const double dF = std::sqrt(dist_sq(F_z, F_x));
  if (dz == 0.0 || dF == 0.0) return prev;
  const double l1 = dz * std::min(1.0, prev.lambda) / dF;
  const double l2 = std::clamp(l1, kAdaptiveMin, kAdaptiveMax);
  StepPlan p;
  p.lambda_plus =
      std::min(cap, (1.0 - kAdaptiveWeight) * prev.lambda_plus + kAdaptiveWeight * l2);
  p.lambda = 0.5 * p.lambda_plus;
  p.alpha = 1.0;
  p.beta = 1.0;
  return p;
}

double adaptive_noise_cap(double L, std::size_t N, std::size_t b) {
  if (!(L > 0.0) || b == 0) throw std::invalid_argument("adaptive_noise_cap: need L > 0, b > 0");
  if (b >= N) return std::numeric_limits<double>::infinity();
  const double scale = std::sqrt(static_cast<double>(N - b) /
                                 (static_cast<double>(b) * static_cast<double>(N - 1)));
  return 1.0 / (L * scale);
}

StepPlan adaptive_initial(double L_hat, double cap) {
  StepPlan p;
  p.lambda_plus = std::min(cap, 1.0 / std::max(1.0, L_hat));
  p.lambda = 0.5 * p.lambda_plus;
  p.alpha = 1.0;
  p.beta = 1.0;
  return p;
}

}  // namespace seqn
