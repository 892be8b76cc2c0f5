#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seqn/directions.hpp"
#include "seqn/kernels.hpp"
#include "seqn/oracles.hpp"
#include "seqn/policies.hpp"
#include "seqn/problem.hpp"
#include "seqn/rng.hpp"
#include "seqn/trace.hpp"

namespace seqn {

enum class Method { seqn, seqn_vr, prox_sgd, prox_svrg };
enum class DirectionKind { identity, lbfgs, coord_lbfgs };
enum class Policy { A_theory, B_decaying_alpha, C_rate, adaptive };

std::string to_string(Method m);
std::string to_string(DirectionKind d);
std::string to_string(Policy p);
Method parse_method(const std::string& s);
DirectionKind parse_direction(const std::string& s);
Policy parse_policy(const std::string& s);

inline constexpr double kSubspaceTrigger = 1e-3;      // ||F||_inf below this enters the phase
inline constexpr double kSubspaceFreeze = 1e-10;      // |x_i| below this is frozen
inline constexpr double kSubspaceExitAbs = 5e-7;
inline constexpr double kSubspaceExitRel = 0.01;
inline constexpr std::size_t kSubspaceCapFactor = 20;  // cap = 20 K inner steps

struct SolverConfig {
  Method method = Method::seqn_vr;
  DirectionKind direction = DirectionKind::coord_lbfgs;
  Policy policy = Policy::adaptive;
  std::uint64_t seed = 0;
  double epochs = 100.0;  // budget in passes over the data
  double tol = 1e-6;      // on rel_err when psi_star is known, else on ||F^I||
  std::optional<double> psi_star;
  std::size_t K = 0;       // inner iterations; 0 picks the method default
  std::size_t b = 0;       // batch size; 0 picks the method default
  std::size_t b_plus = 0;  // second batch when reuse_batch is off; 0 means b
  bool reuse_batch = true;
  bool subspace = false;
  std::size_t memory = kDefaultMemory;
  double nu_bar = 10.0;   // fed to policies A, B, C in place of the certified bound
  double rho_bar = 0.5;   // policy A
  double alpha = 1.0;     // policy A
  double beta = 1.0;      // policy A
  bool clip_direction = true;  // enforce ||d|| <= nu_bar ||F|| under policies A, B, C
  double step0 = 0.0;     // prox-sgd initial step; 0 means 1 / L_f
  bool sgd_decay = true;  // prox-sgd step step0 / sqrt(k + 1), else constant
  double log_interval = 1.0;  // epochs between trace rows
  std::size_t max_iterations = 0;  // 0 means unlimited
  bool record_history = false;     // keep the iterates for sample_output
  Reduction reduction = Reduction::serial;
  bool deterministic_clock = false;  // wall_seconds written as 0
};

/// Fills method-dependent defaults (K, b, b_plus) for a problem with N components.
SolverConfig resolve_defaults(SolverConfig c, std::size_t N);

struct RunHooks {
  std::function<double(ConstVec)> train_accuracy;
  std::function<double(ConstVec)> test_accuracy;
  /// Called after every iteration with the iteration count and the new iterate.
  std::function<void(std::size_t, ConstVec)> on_iterate;
};

enum class RunStatus { tol_reached, budget_exhausted };

struct RunResult {
  Vector x;
  std::vector<TraceRecord> trace;
  RunStatus status = RunStatus::budget_exhausted;
  std::size_t iterations = 0;
  std::uint64_t gradient_evals = 0;          // component gradients, snapshot included
  std::vector<std::uint64_t> cycle_evals;    // per outer SVRG cycle
  std::vector<Vector> history;               // x before each step, when recorded
  std::vector<double> history_weights;       // lambda_plus of that step
  std::size_t subspace_phases = 0;
  std::size_t subspace_steps = 0;
  std::size_t clipped_directions = 0;
  double ell_bar = 0.0;                      // reported lambda_max * L
  double certificate = 0.0;                  // generator's nu_bar_bound
  double epochs() const;
  std::size_t N = 0;
};

/// Mutable state of one extra-step iteration.
struct StepState {
  Vector x;
  StepPlan plan;
  std::uint64_t evals = 0;
  Vector last_residual;  // F_v(x) of the most recent step
  double last_lambda = 1.0;
};

struct StepOptions {
  OracleKind oracle = OracleKind::minibatch;
  const SvrgSnapshot* snapshot = nullptr;
  std::size_t b = 1;
  std::size_t b_plus = 1;
  bool reuse_batch = true;
  bool adaptive = false;
  double adaptive_cap = std::numeric_limits<double>::infinity();
  double clip = 0.0;  // > 0 caps ||d|| at clip * ||F||
  /// Coordinates held fixed (subspace phase); empty means none.
  const std::vector<std::size_t>* frozen = nullptr;
};

struct StepInfo {
  bool clipped = false;
  bool pair_offered = false;
};

/// One extra-step iteration: v at x, F_v(x), d = -W F, z = x + beta d, v_+ at z,
/// x <- prox_{lambda_+}(x + alpha d - lambda_+ v_+); offers (z - x, F_z - F_x)
/// to the generator and updates an adaptive plan.
StepInfo seqn_step(StepState& s, const CompositeProblem& problem, DirectionGenerator& gen,
                   const StepOptions& opt, Rng& rng);

std::unique_ptr<DirectionGenerator> make_generator(DirectionKind kind, std::size_t memory,
                                                   double ell_bar);

RunResult run_seqn(const CompositeProblem& problem, ConstVec x0, const SolverConfig& config,
                   const RunHooks& hooks = {});
RunResult run_seqn_vr(const CompositeProblem& problem, ConstVec x0, const SolverConfig& config,
                      const RunHooks& hooks = {});
RunResult run_prox_svrg(const CompositeProblem& problem, ConstVec x0, const SolverConfig& config,
                        const RunHooks& hooks = {});
RunResult run_prox_sgd(const CompositeProblem& problem, ConstVec x0, const SolverConfig& config,
                       const RunHooks& hooks = {});
/// Dispatches on config.method.
RunResult run(const CompositeProblem& problem, ConstVec x0, const SolverConfig& config,
              const RunHooks& hooks = {});

/// Smooth function given by closures, for the deterministic reference solver.
struct SmoothFunction {
  std::function<double(ConstVec)> value;
  std::function<void(ConstVec, MutVec)> gradient;
  double lipschitz = 1.0;  // initial curvature estimate
};

struct ReferenceResult {
  Vector x;
  double psi = 0.0;
  double residual = 0.0;  // final ||x - prox(x - grad / L)|| * L
  std::size_t iterations = 0;
  bool converged = false;
};

/// Deterministic accelerated proximal gradient (backtracked Lipschitz estimate, restart on
/// objective increase).
/// Stops when the gradient mapping norm is <= tol and psi changes by at most
/// 1e-12 relative, or after max_iterations.
ReferenceResult minimize_composite(const SmoothFunction& f, const ProxFunction& phi, ConstVec x0,
                                   double tol, std::size_t max_iterations);

ReferenceResult run_reference(const CompositeProblem& problem, ConstVec x0, double tol_ref = 1e-12,
                              std::size_t max_iterations = 200000,
                              Reduction mode = Reduction::serial);

/// (psi - psi_star) / max(1, |psi_star|), unclamped.
double rel_err(double psi, double psi_star);

/// Natural residual F^I(x) = x - prox_1(x - grad f(x)).
Vector natural_residual(const CompositeProblem& problem, ConstVec x,
                        Reduction mode = Reduction::serial);

/// Index drawn with probability proportional to weights; returns the iterate.
const Vector& sample_output(const std::vector<Vector>& history, const std::vector<double>& weights,
                            Rng& rng);
std::size_t sample_index(const std::vector<double>& weights, Rng& rng);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

inline constexpr double kInequalitySlack = 1e-8;

/// Both sides of the descent bound for one extra step with exact gradients
/// available; rho defaults to 1 / lambda.
InequalityCheck check_descent_inequality(const CompositeProblem& problem, ConstVec x, ConstVec d,
                                         ConstVec v, ConstVec v_plus, const StepPlan& plan,
                                         std::optional<double> rho = std::nullopt);

/// Both sides of the distance bound between p_+ and the tilted proximal point
/// x_bar of psi at x with parameter theta (rho_1 = L_f lambda_+, rho_2 = 1).
/// x_bar is computed with minimize_composite; throws if that solve fails.
InequalityCheck check_pointdiff_inequality(const CompositeProblem& problem, ConstVec x,
                                           ConstVec d, ConstVec v_plus, const StepPlan& plan,
                                           double theta);

}  // namespace seqn
