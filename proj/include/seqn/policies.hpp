#pragma once

#include <cstddef>
#include <limits>

#include "seqn/vec.hpp"

namespace seqn {

/// (lambda, lambda_plus, alpha, beta) for one extra-step iteration.
///
/// lambda scales the residual that feeds the direction, lambda_plus the final
/// proximal gradient step; alpha and beta scale the direction in the update
/// and in the trial point z = x + beta d.
struct StepPlan {
  double lambda = 0.0;
  double lambda_plus = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

struct TheoryPlan {
  StepPlan plan;
  double rho_lower;  // lambda / lambda_plus
};

/// lambda_plus = (1 - rho_bar) / L_f,
/// lambda = (1 - rho_bar) lambda_plus / (1 + nu_bar^2 (alpha + L_f beta lambda_plus)^2).
TheoryPlan policy_A_theory(double L_f, double nu_bar, double alpha, double beta, double rho_bar);

/// Batch size b_k = min(N, ceil(b0 * 1.05^k)) used with policy A and plain
/// mini-batch oracles so that the oracle variance decays.
std::size_t policy_A_batch(std::size_t N, std::size_t b0, std::size_t k);

/// lambda_plus = 1 / (6 L_f sqrt(k+1)), beta = 1 / (9 L_f nu_bar),
/// alpha = L_f beta lambda_plus, lambda = lambda_plus.
StepPlan policy_B_decaying_alpha(double L_f, double nu_bar, std::size_t k);

struct RatePlan {
  std::size_t K;
  std::size_t b;
  std::size_t b_plus;
  StepPlan plan;
  double gamma;
};

inline constexpr double kGoldenGamma = 0.6180339887498949;  // (sqrt(5) - 1) / 2

/// K = ceil(N^(1/3)), b = b_plus = min(N, K^2), lambda_plus = gamma / L,
/// lambda = gamma / (L (1 + 3 nu_bar^2)), alpha = beta = 1.
RatePlan policy_C_rate(std::size_t N, double L, double nu_bar);

inline constexpr double kAdaptiveMin = 1e-3;
inline constexpr double kAdaptiveMax = 1e3;
inline constexpr double kAdaptiveWeight = 0.1;

/// Secant estimate of the inverse Lipschitz constant of the residual map,
/// clamped to [1e-3, 1e3] and blended into the previous lambda_plus with an
/// exponential moving average (weight 0.1 on the new value), then limited to
/// `cap`. Returns prev unchanged when z == x or F_z == F_x.
StepPlan policy_adaptive(const StepPlan& prev, ConstVec x, ConstVec z, ConstVec F_x,
                         ConstVec F_z, double cap = std::numeric_limits<double>::infinity());

/// Largest lambda_plus for which lambda_plus times the Lipschitz modulus of the
/// mini-batch SVRG error, L sqrt((N - b) / (b (N - 1))), stays at 1. Infinite
/// for full batches.
double adaptive_noise_cap(double L, std::size_t N, std::size_t b);

/// Starting plan of the adaptive policy: lambda_plus = min(1 / L_hat, cap).
StepPlan adaptive_initial(double L_hat, double cap = std::numeric_limits<double>::infinity());

}  // namespace seqn
