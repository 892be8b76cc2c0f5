#include "seqn/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace seqn {

std::string to_string(Method m) {
  switch (m) {
    case Method::seqn: return "seqn";
    case Method::seqn_vr: return "seqn-vr";
    case Method::prox_sgd: return "prox-sgd";
    case Method::prox_svrg: return "prox-svrg";
  }
  return "?";
}

std::string to_string(DirectionKind d) {
  switch (d) {
    case DirectionKind::identity: return "identity";
    case DirectionKind::lbfgs: return "lbfgs";
    case DirectionKind::coord_lbfgs: return "coord-lbfgs";
  }
  return "?";
}

std::string to_string(Policy p) {
  switch (p) {
    case Policy::A_theory: return "A";
    case Policy::B_decaying_alpha: return "B";
    case Policy::C_rate: return "C";
    case Policy::adaptive: return "adaptive";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::seqn, Method::seqn_vr, Method::prox_sgd, Method::prox_svrg})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown method '" + s + "'");
}

DirectionKind parse_direction(const std::string& s) {
  for (DirectionKind d : {DirectionKind::identity, DirectionKind::lbfgs, DirectionKind::coord_lbfgs})
    if (to_string(d) == s) return d;
  throw std::invalid_argument("unknown direction '" + s + "'");
}

Policy parse_policy(const std::string& s) {
  for (Policy p : {Policy::A_theory, Policy::B_decaying_alpha, Policy::C_rate, Policy::adaptive})
    if (to_string(p) == s) return p;
  throw std::invalid_argument("unknown policy '" + s + "'");
}

SolverConfig resolve_defaults(SolverConfig c, std::size_t N) {
  if (N == 0) throw std::invalid_argument("resolve_defaults: empty problem");
  if (!(c.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (!(c.epochs > 0.0)) throw std::invalid_argument("epoch budget must be positive");
  if (!(c.log_interval > 0.0)) throw std::invalid_argument("log interval must be positive");
  const std::size_t default_b = std::max<std::size_t>(1, std::min<std::size_t>(300, N / 100));
  if (c.method == Method::prox_svrg) {
    if (c.K == 0) c.K = std::max<std::size_t>(1, (3 * N) / 2);
    if (c.b == 0) c.b = 1;
  } else {
    if (c.K == 0) c.K = 10;
    if (c.b == 0) c.b = default_b;
  }
  if (c.policy == Policy::C_rate) {
    if (c.method != Method::seqn_vr)
      throw std::invalid_argument("policy C requires method seqn-vr");
    const RatePlan cp = policy_C_rate(N, 1.0, c.nu_bar);
    c.K = cp.K;
    c.b = cp.b;
    c.b_plus = cp.b_plus;
  }
  if (c.b_plus == 0) c.b_plus = c.b;
  c.b = std::min(c.b, N);
  c.b_plus = std::min(c.b_plus, N);
  return c;
}

double RunResult::epochs() const {
  return N == 0 ? 0.0 : static_cast<double>(gradient_evals) / static_cast<double>(N);
}

double rel_err(double psi, double psi_star) {
  return (psi - psi_star) / std::max(1.0, std::abs(psi_star));
}

Vector natural_residual(const CompositeProblem& problem, ConstVec x, Reduction mode) {
  const Vector g = full_gradient(problem.smooth, x, mode);
  return residual(x, g, ScaledMetric(1.0), problem.regularizer);
}

std::unique_ptr<DirectionGenerator> make_generator(DirectionKind kind, std::size_t memory,
                                                   double ell_bar) {
  switch (kind) {
    case DirectionKind::identity: return std::make_unique<IdentityDirection>();
    case DirectionKind::lbfgs:
      return std::make_unique<LbfgsDirection>(memory, kDefaultCurvatureDelta, ell_bar);
    case DirectionKind::coord_lbfgs:
      return std::make_unique<CoordLbfgsDirection>(memory, kDefaultCurvatureDelta, ell_bar);
  }
  throw std::invalid_argument("make_generator: unknown kind");
}

namespace {

void zero_on(const std::vector<std::size_t>* idx, MutVec v) {
  if (idx == nullptr) return;
  for (std::size_t i : *idx) v[i] = 0.0;
}

void require_finite(ConstVec x, std::size_t iteration, const char* what) {
  if (!all_finite(x))
    throw std::runtime_error(std::string("non-finite ") + what + " at iteration " +
                             std::to_string(iteration));
}

}  // namespace

StepInfo seqn_step(StepState& s, const CompositeProblem& problem, DirectionGenerator& gen,
                   const StepOptions& opt, Rng& rng) {
  const FiniteSumProblem& f = problem.smooth;
  const ProxFunction& phi = problem.regularizer;
  const std::size_t N = f.num_components();
  const StepPlan plan = s.plan;
  const ScaledMetric metric(plan.lambda);
  const ScaledMetric metric_plus(plan.lambda_plus);
  StepInfo info;

  const SampleSet S = sample_without_replacement(rng, N, opt.b);
  const Vector v = oracle_at(opt.oracle, f, s.x, S, opt.snapshot);
  s.evals += S.size();

  Vector Fx = residual(s.x, v, metric, phi);
  zero_on(opt.frozen, Fx);

  Vector d = direction(gen, Fx);
  zero_on(opt.frozen, d);
  if (opt.clip > 0.0) {
    const double nd = norm2(d);
    const double cap = opt.clip * norm2(Fx);
    if (nd > cap) {
      const double scale = cap / nd;
      for (double& di : d) di *= scale;
      info.clipped = true;
    }
  }

  Vector z = s.x;
  axpy(plan.beta, d, z);

  const bool wants_pair = gen.uses_pairs() || opt.adaptive;
  Vector vz;
  if (wants_pair || opt.reuse_batch) {
    vz = oracle_at(opt.oracle, f, z, S, opt.snapshot);
    s.evals += S.size();
  }
  Vector v_plus;
  if (opt.reuse_batch) {
    v_plus = vz;
  } else {
    const SampleSet S_plus = sample_without_replacement(rng, N, opt.b_plus);
    v_plus = oracle_at(opt.oracle, f, z, S_plus, opt.snapshot);
    s.evals += S_plus.size();
  }

  Vector w = s.x;
  axpy(plan.alpha, d, w);
  axpy(-plan.lambda_plus, v_plus, w);
  Vector x_next = phi.prox(metric_plus, w);
  if (opt.frozen != nullptr)
    for (std::size_t i : *opt.frozen) x_next[i] = s.x[i];

  if (wants_pair) {
    Vector Fz = residual(z, vz, metric, phi);
    zero_on(opt.frozen, Fz);
    if (gen.uses_pairs()) {
      const Vector u = sub(z, s.x);
      const Vector y = sub(Fz, Fx);
      gen.notify_pair(u, y);
      info.pair_offered = true;
    }
    if (opt.adaptive) s.plan = policy_adaptive(plan, s.x, z, Fx, Fz, opt.adaptive_cap);
  }

  s.last_residual = std::move(Fx);
  s.last_lambda = plan.lambda;
  s.x = std::move(x_next);
  return info;
}

namespace {

// Trace logging, tolerance test and budget bookkeeping shared by all methods.
class Monitor {
 public:
  Monitor(const CompositeProblem& p, const SolverConfig& c, const RunHooks& h, RunResult& r)
      : p_{p}, c_{c}, h_{h}, r_{r}, start_{std::chrono::steady_clock::now()} {
    r_.N = p.smooth.num_components();
  }

  double epochs(std::uint64_t evals) const {
    return static_cast<double>(evals) / static_cast<double>(r_.N);
  }

  bool budget_left(std::uint64_t evals, std::size_t iterations) const {
    if (epochs(evals) >= c_.epochs) return false;
    return c_.max_iterations == 0 || iterations < c_.max_iterations;
  }

  // Writes a row at x; returns whether the tolerance is met.
  bool record(ConstVec x, std::uint64_t evals) {
    TraceRecord t;
    t.epoch = epochs(evals);
    t.wall_seconds =
        c_.deterministic_clock
            ? 0.0
            : std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    t.psi = objective(p_, x, c_.reduction);
    if (!std::isfinite(t.psi))
      throw std::runtime_error("non-finite objective at epoch " + std::to_string(t.epoch));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    t.rel_err = c_.psi_star ? rel_err(t.psi, *c_.psi_star) : nan;
    t.nnz = nnz(x);
    t.train_acc = h_.train_accuracy ? h_.train_accuracy(x) : nan;
    t.test_acc = h_.test_accuracy ? h_.test_accuracy(x) : nan;
    t.residual_norm = norm2(natural_residual(p_, x, c_.reduction));
    r_.trace.push_back(t);
    last_recorded_ = evals;
    recorded_any_ = true;
    while (next_log_ <= t.epoch) next_log_ += c_.log_interval;
    return c_.psi_star ? t.rel_err <= c_.tol : t.residual_norm <= c_.tol;
  }

  bool maybe_record(ConstVec x, std::uint64_t evals) {
    if (epochs(evals) < next_log_) return false;
    return record(x, evals);
  }

  // Closes the trace with the final iterate unless it was just written.
  bool finish(ConstVec x, std::uint64_t evals) {
    if (recorded_any_ && last_recorded_ == evals) return last_met();
    return record(x, evals);
  }

  bool last_met() const {
    const TraceRecord& t = r_.trace.back();
    return c_.psi_star ? t.rel_err <= c_.tol : t.residual_norm <= c_.tol;
  }

 private:
  const CompositeProblem& p_;
  const SolverConfig& c_;
  const RunHooks& h_;
  RunResult& r_;
  std::chrono::steady_clock::time_point start_;
  double next_log_ = 0.0;
  std::uint64_t last_recorded_ = 0;
  bool recorded_any_ = false;
};

// Keeps lambda_plus times the oracle error modulus at most 1 under the adaptive policy.
double adaptive_cap_for(const SolverConfig& c, const FiniteSumProblem& f) {
  const std::size_t b = c.reuse_batch ? c.b : std::min(c.b, c.b_plus);
  return adaptive_noise_cap(f.lipschitz_uniform(), f.num_components(), b);
}

// Largest lambda * L any iteration can use, for the direction certificate.
double ell_bar_for(const SolverConfig& c, const FiniteSumProblem& f) {
  const double L = f.lipschitz_uniform();
  const double Lf = f.lipschitz_avg();
  double lam = 0.0;
  switch (c.policy) {
    case Policy::A_theory: lam = (1.0 - c.rho_bar) / Lf; break;
    case Policy::B_decaying_alpha: lam = 1.0 / (6.0 * Lf); break;
    case Policy::C_rate: lam = kGoldenGamma / (L * (1.0 + 3.0 * c.nu_bar * c.nu_bar)); break;
    case Policy::adaptive: lam = 0.5 * std::min(kAdaptiveMax, adaptive_cap_for(c, f)); break;
  }
  return lam * L;
}

double adaptive_lhat(const FiniteSumProblem& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.num_components(); ++i) m = std::max(m, f.component_lipschitz(i));
  return std::max(1.0, m);
}

StepPlan initial_plan(const SolverConfig& c, const FiniteSumProblem& f) {
  switch (c.policy) {
    case Policy::A_theory:
      return policy_A_theory(f.lipschitz_avg(), c.nu_bar, c.alpha, c.beta, c.rho_bar).plan;
    case Policy::B_decaying_alpha: return policy_B_decaying_alpha(f.lipschitz_avg(), c.nu_bar, 0);
    case Policy::C_rate:
      return policy_C_rate(f.num_components(), f.lipschitz_uniform(), c.nu_bar).plan;
    case Policy::adaptive: return adaptive_initial(adaptive_lhat(f), adaptive_cap_for(c, f));
  }
  throw std::invalid_argument("unknown policy");
}

void push_history(RunResult& r, const SolverConfig& c, ConstVec x, double weight) {
  if (!c.record_history) return;
  r.history.emplace_back(x.begin(), x.end());
  r.history_weights.push_back(weight);
}

void finalize(RunResult& r, Monitor& mon, const StepState& s, bool tol_hit) {
  if (!tol_hit) tol_hit = mon.finish(s.x, s.evals);
  r.status = tol_hit ? RunStatus::tol_reached : RunStatus::budget_exhausted;
  r.x = s.x;
  r.gradient_evals = s.evals;
}

}  // namespace

RunResult run_seqn(const CompositeProblem& problem, ConstVec x0, const SolverConfig& config,
                   const RunHooks& hooks) {
  const FiniteSumProblem& f = problem.smooth;
  require_same_size(x0.size(), f.dimension(), "run_seqn");
  const std::size_t N = f.num_components();
  const SolverConfig c = resolve_defaults(config, N);
  RunResult r;
  r.ell_bar = ell_bar_for(c, f);
  auto gen = make_generator(c.direction, c.memory, r.ell_bar);
  r.certificate = gen->certificate_bound();
  Rng rng(c.seed);
  Monitor mon(problem, c, hooks, r);

  StepState s;
  s.x.assign(x0.begin(), x0.end());
  s.plan = initial_plan(c, f);

  StepOptions opt;
  opt.oracle = OracleKind::minibatch;
  opt.reuse_batch = c.reuse_batch;
  opt.adaptive = c.policy == Policy::adaptive;
  if (opt.adaptive) opt.adaptive_cap = adaptive_cap_for(c, f);
  opt.clip = c.clip_direction ? c.nu_bar : 0.0;

  bool tol_hit = mon.record(s.x, 0);
  std::size_t k = 0;
  while (!tol_hit && mon.budget_left(s.evals, k)) {
    if (c.policy == Policy::B_decaying_alpha)
      s.plan = policy_B_decaying_alpha(f.lipschitz_avg(), c.nu_bar, k);
    if (c.policy == Policy::A_theory) {
      opt.b = policy_A_batch(N, c.b, k);
      opt.b_plus = policy_A_batch(N, c.b_plus, k);
    } else {
      opt.b = c.b;
      opt.b_plus = c.b_plus;
    }
    push_history(r, c, s.x, s.plan.lambda_plus);
    const StepInfo info = seqn_step(s, problem, *gen, opt, rng);
    if (info.clipped) ++r.clipped_directions;
    ++k;
    require_finite(s.x, k, "iterate");
    if (hooks.on_iterate) hooks.on_iterate(k, s.x);
    tol_hit = mon.maybe_record(s.x, s.evals);
  }
  r.iterations = k;
  finalize(r, mon, s, tol_hit);
  return r;
}

RunResult run_seqn_vr(const CompositeProblem& problem, ConstVec x0, const SolverConfig& config,
                      const RunHooks& hooks) {
  const FiniteSumProblem& f = problem.smooth;
  require_same_size(x0.size(), f.dimension(), "run_seqn_vr");
  const std::size_t N = f.num_components();
  const std::size_t n = f.dimension();
  const SolverConfig c = resolve_defaults(config, N);
  RunResult r;
  r.ell_bar = ell_bar_for(c, f);
  auto gen = make_generator(c.direction, c.memory, r.ell_bar);
  r.certificate = gen->certificate_bound();
  Rng rng(c.seed);
  Monitor mon(problem, c, hooks, r);

  StepState s;
  s.x.assign(x0.begin(), x0.end());
  s.plan = initial_plan(c, f);

  StepOptions opt;
  opt.oracle = OracleKind::svrg;
  opt.b = c.b;
  opt.b_plus = c.b_plus;
  opt.reuse_batch = c.reuse_batch;
  opt.adaptive = c.policy == Policy::adaptive;
  if (opt.adaptive) opt.adaptive_cap = adaptive_cap_for(c, f);
  opt.clip = c.clip_direction ? c.nu_bar : 0.0;

  const bool subspace_allowed = c.subspace && n > N;
  std::size_t steps_since_phase = c.K;  // the first trigger needs no cool-down
  std::optional<SvrgSnapshot> snap;
  std::uint64_t cycle_start = 0;
  std::size_t j = 0;

  // One flattened inner iteration; refreshes the snapshot every K steps.
  auto inner = [&](DirectionGenerator& g, const std::vector<std::size_t>* frozen) {
    if (j % c.K == 0) {
      if (j > 0) r.cycle_evals.push_back(s.evals - cycle_start);
      cycle_start = s.evals;
      snap = SvrgSnapshot::take(f, s.x, c.reduction);
      s.evals += N;
    }
    if (c.policy == Policy::B_decaying_alpha)
      s.plan = policy_B_decaying_alpha(f.lipschitz_avg(), c.nu_bar, j);
    opt.snapshot = &*snap;
    opt.frozen = frozen;
    push_history(r, c, s.x, s.plan.lambda_plus);
    const StepInfo info = seqn_step(s, problem, g, opt, rng);
    if (info.clipped) ++r.clipped_directions;
    ++j;
    require_finite(s.x, j, "iterate");
    if (hooks.on_iterate) hooks.on_iterate(j, s.x);
  };

  bool tol_hit = mon.record(s.x, 0);
  while (!tol_hit && mon.budget_left(s.evals, j)) {
    inner(*gen, nullptr);
    ++steps_since_phase;
    tol_hit = mon.maybe_record(s.x, s.evals);
    if (tol_hit || !subspace_allowed || steps_since_phase < c.K) continue;
    if (!(norm_inf(s.last_residual) < kSubspaceTrigger)) continue;

    std::vector<std::size_t> frozen;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(s.x[i]) < kSubspaceFreeze) frozen.push_back(i);
    if (frozen.empty() || frozen.size() == n) continue;

    ++r.subspace_phases;
    steps_since_phase = 0;
    const double entry = norm2(s.last_residual) / s.last_lambda;
    const double exit_level = std::min(kSubspaceExitAbs, kSubspaceExitRel * entry);
    LbfgsDirection phase_gen(c.memory, kDefaultCurvatureDelta, r.ell_bar);
    const std::size_t cap = kSubspaceCapFactor * c.K;
    for (std::size_t t = 0; t < cap && !tol_hit && mon.budget_left(s.evals, j); ++t) {
      inner(phase_gen, &frozen);
      ++r.subspace_steps;
      tol_hit = mon.maybe_record(s.x, s.evals);
      if (norm2(s.last_residual) / s.last_lambda <= exit_level) break;
    }
  }
  if (j > 0 && j % c.K == 0) r.cycle_evals.push_back(s.evals - cycle_start);
  r.iterations = j;
  finalize(r, mon, s, tol_hit);
  return r;
}

RunResult run_prox_svrg(const CompositeProblem& problem, ConstVec x0, const SolverConfig& config,
                        const RunHooks& hooks) {
  const FiniteSumProblem& f = problem.smooth;
  require_same_size(x0.size(), f.dimension(), "run_prox_svrg");
  const std::size_t N = f.num_components();
  const SolverConfig c = resolve_defaults(config, N);
  RunResult r;
  Rng rng(c.seed);
  Monitor mon(problem, c, hooks, r);
  const double lam = 1.0 / f.lipschitz_avg();
  const ScaledMetric metric(lam);

  StepState s;
  s.x.assign(x0.begin(), x0.end());
  std::optional<SvrgSnapshot> snap;
  std::uint64_t cycle_start = 0;
  std::size_t j = 0;

  bool tol_hit = mon.record(s.x, 0);
  while (!tol_hit && mon.budget_left(s.evals, j)) {
    if (j % c.K == 0) {
      if (j > 0) r.cycle_evals.push_back(s.evals - cycle_start);
      cycle_start = s.evals;
      snap = SvrgSnapshot::take(f, s.x, c.reduction);
      s.evals += N;
    }
    push_history(r, c, s.x, lam);
    const SampleSet S = sample_without_replacement(rng, N, c.b);
    const Vector v = svrg_gradient(f, s.x, S, *snap);
    s.evals += S.size();
    Vector w = s.x;
    axpy(-lam, v, w);
    s.x = problem.regularizer.prox(metric, w);
    ++j;
    require_finite(s.x, j, "iterate");
    if (hooks.on_iterate) hooks.on_iterate(j, s.x);
    tol_hit = mon.maybe_record(s.x, s.evals);
  }
  if (j > 0 && j % c.K == 0) r.cycle_evals.push_back(s.evals - cycle_start);
  r.iterations = j;
  finalize(r, mon, s, tol_hit);
  return r;
}

RunResult run_prox_sgd(const CompositeProblem& problem, ConstVec x0, const SolverConfig& config,
                       const RunHooks& hooks) {
  const FiniteSumProblem& f = problem.smooth;
  require_same_size(x0.size(), f.dimension(), "run_prox_sgd");
  const std::size_t N = f.num_components();
  const SolverConfig c = resolve_defaults(config, N);
  RunResult r;
  Rng rng(c.seed);
  Monitor mon(problem, c, hooks, r);
  const double step0 = c.step0 > 0.0 ? c.step0 : 1.0 / f.lipschitz_avg();

  StepState s;
  s.x.assign(x0.begin(), x0.end());
  std::size_t k = 0;
  bool tol_hit = mon.record(s.x, 0);
  while (!tol_hit && mon.budget_left(s.evals, k)) {
    const double lam = c.sgd_decay ? step0 / std::sqrt(static_cast<double>(k) + 1.0) : step0;
    push_history(r, c, s.x, lam);
    const SampleSet S = sample_without_replacement(rng, N, c.b);
    const Vector v = minibatch_gradient(f, s.x, S);
    s.evals += S.size();
    Vector w = s.x;
    axpy(-lam, v, w);
    s.x = problem.regularizer.prox(ScaledMetric(lam), w);
    ++k;
    require_finite(s.x, k, "iterate");
    if (hooks.on_iterate) hooks.on_iterate(k, s.x);
    tol_hit = mon.maybe_record(s.x, s.evals);
  }
  r.iterations = k;
  finalize(r, mon, s, tol_hit);
  return r;
}

RunResult run(const CompositeProblem& problem, ConstVec x0, const SolverConfig& config,
              const RunHooks& hooks) {
  switch (config.method) {
    case Method::seqn: return run_seqn(problem, x0, config, hooks);
    case Method::seqn_vr: return run_seqn_vr(problem, x0, config, hooks);
    case Method::prox_sgd:
      if (config.policy == Policy::C_rate)
        throw std::invalid_argument("policy C is not defined for prox-sgd");
      return run_prox_sgd(problem, x0, config, hooks);
    case Method::prox_svrg:
      if (config.policy == Policy::C_rate)
        throw std::invalid_argument("policy C is not defined for prox-svrg");
      return run_prox_svrg(problem, x0, config, hooks);
  }
  throw std::invalid_argument("unknown method");
}

ReferenceResult minimize_composite(const SmoothFunction& f, const ProxFunction& phi, ConstVec x0,
                                   double tol, std::size_t max_iterations) {
  // Accelerated proximal gradient with backtracking and function-value restart.
  ReferenceResult res;
  res.x.assign(x0.begin(), x0.end());
  const std::size_t n = x0.size();
  Vector y(res.x), gy(n), g_next(n), x_next(n), w(n);
  double L = std::max(f.lipschitz, 1e-12);
  double psi = f.value(res.x) + phi.value(res.x);
  double t = 1.0;

  for (std::size_t it = 0; it < max_iterations; ++it) {
    const double fy = f.value(y);
    f.gradient(y, gy);
    L *= 0.5;
    double f_next = 0.0;
    for (int tries = 0;; ++tries) {
      for (std::size_t i = 0; i < n; ++i) w[i] = y[i] - gy[i] / L;
      phi.prox(ScaledMetric(1.0 / L), w, x_next);
      f_next = f.value(x_next);
      double lin = 0.0;
      double sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double dx = x_next[i] - y[i];
        lin += gy[i] * dx;
        sq += dx * dx;
      }
      // Relative slack absorbs rounding once the steps reach machine precision. Near the
      // solution the value test is pure rounding, so the gradient monotonicity test
      // keeps L from collapsing.
      const double slack = 1e-15 * std::max(1.0, std::abs(fy));
      f.gradient(x_next, g_next);
      double curv = 0.0;
      for (std::size_t i = 0; i < n; ++i) curv += (g_next[i] - gy[i]) * (x_next[i] - y[i]);
      if ((f_next <= fy + lin + 0.5 * L * sq + slack && curv <= L * sq) || tries > 60) break;
      L *= 2.0;
    }
    const double mapping = L * std::sqrt(dist_sq(x_next, y));
    const double psi_next = f_next + phi.value(x_next);
    if (!std::isfinite(psi_next)) throw std::runtime_error("minimize_composite: non-finite objective");
    res.iterations = it + 1;
    res.residual = mapping;
    if (psi_next > psi && t > 1.0) {
      // Momentum overshot: restart from the last accepted iterate.
      t = 1.0;
      y = res.x;
      continue;
    }
    const bool stable = std::abs(psi_next - psi) <= 1e-12 * std::max(1.0, std::abs(psi));
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double m = (t - 1.0) / t_next;
    for (std::size_t i = 0; i < n; ++i) y[i] = x_next[i] + m * (x_next[i] - res.x[i]);
    t = t_next;
    res.x.swap(x_next);
    psi = psi_next;
    if (mapping <= tol && stable) {
      res.converged = true;
      break;
    }
  }
  res.psi = psi;
  return res;
}

ReferenceResult run_reference(const CompositeProblem& problem, ConstVec x0, double tol_ref,
                              std::size_t max_iterations, Reduction mode) {
  const FiniteSumProblem& fs = problem.smooth;
  SmoothFunction f;
  f.value = [&](ConstVec x) { return smooth_value(fs, x, mode); };
  f.gradient = [&](ConstVec x, MutVec out) {
    const Vector g = full_gradient(fs, x, mode);
    std::copy(g.begin(), g.end(), out.begin());
  };
  f.lipschitz = fs.lipschitz_avg();
  return minimize_composite(f, problem.regularizer, x0, tol_ref, max_iterations);
}

std::size_t sample_index(const std::vector<double>& weights, Rng& rng) {
  if (weights.empty()) throw std::invalid_argument("sample_output: empty history");
  std::vector<double> cum(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw std::invalid_argument("sample_output: weights must be positive and finite");
    total += weights[i];
    cum[i] = total;
  }
  const double u = rng.uniform01() * total;
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), weights.size() - 1);
}

const Vector& sample_output(const std::vector<Vector>& history, const std::vector<double>& weights,
                            Rng& rng) {
  if (history.empty()) throw std::invalid_argument("sample_output: empty history");
  require_same_size(history.size(), weights.size(), "sample_output");
  return history[sample_index(weights, rng)];
}

InequalityCheck check_descent_inequality(const CompositeProblem& problem, ConstVec x, ConstVec d,
                                         ConstVec v, ConstVec v_plus, const StepPlan& plan,
                                         std::optional<double> rho) {
  const FiniteSumProblem& f = problem.smooth;
  const ProxFunction& phi = problem.regularizer;
  const double lam = plan.lambda;
  const double lp = plan.lambda_plus;
  const double al = plan.alpha;
  const double be = plan.beta;
  const double Lf = f.lipschitz_avg();
  const double r = rho.value_or(1.0 / lam);
  const std::size_t n = x.size();

  const Vector gx = full_gradient(f, x);
  Vector z(x.begin(), x.end());
  axpy(be, d, z);
  const Vector gz = full_gradient(f, z);

  Vector w(x.begin(), x.end());
  axpy(al, d, w);
  axpy(-lp, v_plus, w);
  const Vector p_plus = phi.prox(ScaledMetric(lp), w);

  Vector wv(x.begin(), x.end());
  axpy(-lam, v, wv);
  const Vector p_v = phi.prox(ScaledMetric(lam), wv);
  Vector wg(x.begin(), x.end());
  axpy(-lam, gx, wg);
  const Vector p = phi.prox(ScaledMetric(lam), wg);

  const CompositeProblem& cp = problem;
  InequalityCheck out;
  out.lhs = 2.0 * (objective(cp, p_plus) - objective(cp, x));

  const double ell = lp * std::pow(al / lp + Lf * be, 2);
  Vector cross(n);
  for (std::size_t i = 0; i < n; ++i) cross[i] = lp * (gx[i] - gz[i]) + al * d[i];
  const Vector err_plus = sub(gz, v_plus);

  out.rhs = dist_sq(gx, v) / r + lp * norm2_sq(err_plus) +
            (1.0 / lp - 1.0 / lam) * dist_sq(x, p_v) + (Lf - 1.0 / lp) * dist_sq(p_plus, x) +
            (r - 1.0 / lam) * dist_sq(p_v, p) + ell * norm2_sq(d) - dist_sq(x, p) / lam +
            2.0 * dot(err_plus, cross);
  out.holds = out.lhs <= out.rhs + kInequalitySlack;
  return out;
}

InequalityCheck check_pointdiff_inequality(const CompositeProblem& problem, ConstVec x,
                                           ConstVec d, ConstVec v_plus, const StepPlan& plan,
                                           double theta) {
  const FiniteSumProblem& fs = problem.smooth;
  const ProxFunction& phi = problem.regularizer;
  const double Lf = fs.lipschitz_avg();
  if (!(theta > 0.0 && theta < 1.0 / Lf))
    throw std::invalid_argument("check_pointdiff_inequality: need 0 < theta < 1/L_f");
  const double lp = plan.lambda_plus;
  const double al = plan.alpha;
  const double be = plan.beta;
  const std::size_t n = x.size();

  const Vector xc(x.begin(), x.end());
  SmoothFunction tilted;
  tilted.value = [&](ConstVec y) { return smooth_value(fs, y) + dist_sq(y, xc) / (2.0 * theta); };
  tilted.gradient = [&](ConstVec y, MutVec out) {
    const Vector g = full_gradient(fs, y);
    for (std::size_t i = 0; i < n; ++i) out[i] = g[i] + (y[i] - xc[i]) / theta;
  };
  tilted.lipschitz = Lf + 1.0 / theta;
  const ReferenceResult ref = minimize_composite(tilted, phi, x, 1e-13, 200000);
  if (!ref.converged)
    throw std::runtime_error("check_pointdiff_inequality: tilted proximal solve did not converge");
  const Vector& xbar = ref.x;

  Vector z(x.begin(), x.end());
  axpy(be, d, z);
  const Vector gz = full_gradient(fs, z);
  const Vector gbar = full_gradient(fs, xbar);

  Vector w(x.begin(), x.end());
  axpy(al, d, w);
  axpy(-lp, v_plus, w);
  const Vector p_plus = phi.prox(ScaledMetric(lp), w);

  const double tau = 1.0 - lp / theta;
  const double rho1 = Lf * lp;
  const double rho2 = 1.0;
  const double mu = al + Lf * be * lp;

  Vector lhs_vec(n);
  Vector err(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p_i = lp * (gbar[i] - gz[i]) + al * d[i];
    lhs_vec[i] = tau * (xbar[i] - x[i]) - p_i;
    err[i] = v_plus[i] - gz[i];
  }
  const double dxx = dist_sq(xbar, x);

  InequalityCheck out;
  out.lhs = dist_sq(p_plus, xbar);
  out.rhs = ((1.0 + rho1) * tau * tau + 2.0 * Lf * lp * tau + (1.0 + rho2) * Lf * Lf * lp * lp) * dxx +
            (1.0 + 1.0 / rho1 + 1.0 / rho2) * mu * mu * norm2_sq(d) +
            2.0 * lp * dot(lhs_vec, err) + lp * lp * norm2_sq(err);
  out.holds = out.lhs <= out.rhs + kInequalitySlack;
  return out;
}

}  // namespace seqn
