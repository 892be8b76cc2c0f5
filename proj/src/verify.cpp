#include "seqn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "seqn/dataio.hpp"
#include "seqn/directions.hpp"
#include "seqn/logreg.hpp"
#include "seqn/oracles.hpp"
#include "seqn/rng.hpp"
#include "seqn/solver.hpp"

namespace seqn {

namespace {

using Json = nlohmann::json;
using Dense = std::vector<Vector>;  // row-major square matrix

Vector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

class Recorder {
 public:
  explicit Recorder(std::string suite) { report_.suite = std::move(suite); }

  void check(bool ok, const std::string& property, const std::function<Json()>& instance) {
    ++report_.cases;
    if (ok) return;
    if (report_.violations == 0) {
      report_.property = property;
      report_.counterexample = instance();
    }
    ++report_.violations;
  }

  SuiteReport take() { return std::move(report_); }

 private:
  SuiteReport report_;
};

LeastSquaresProblem random_least_squares(Rng& rng, std::size_t N, std::size_t n) {
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < N; ++i) rows.push_back(random_vector(rng, n));
  return LeastSquaresProblem(std::move(rows), random_vector(rng, N));
}

SuiteReport prox_suite(const VerifyOptions& o) {
  Recorder rec("prox");
  Rng rng(o.seed);
  const std::size_t cases = o.cases ? o.cases : 1000;
  const SoftThresholdFn kernel =
      o.soft_threshold ? o.soft_threshold
                       : SoftThresholdFn([](ConstVec x, double t, MutVec out) { soft_threshold(x, t, out); });
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t n = 1 + rng.uniform_index(8);
    const double lam = uniform(rng, 0.05, 3.0);
    const double mu = uniform(rng, 0.0, 2.0);
    const CustomL1 phi(mu, kernel);
    const ScaledMetric m(lam);
    const Vector x = random_vector(rng, n, 2.0);
    const Vector y = random_vector(rng, n, 2.0);
    const Vector px = phi.prox(m, x);
    const Vector py = phi.prox(m, y);
    const Vector dp = sub(px, py);
    const Vector dx = sub(x, y);
    rec.check(norm2_sq(dp) <= dot(dx, dp) + 1e-12, "firm nonexpansiveness", [&] {
      return Json{{"x", x}, {"y", y}, {"lambda", lam}, {"mu", mu}};
    });

    const double base = phi.value(px) + dist_sq(x, px) / (2.0 * lam);
    bool optimal = true;
    for (int k = 0; k < 10 && optimal; ++k) {
      Vector cand = px;
      const Vector step = random_vector(rng, n, std::pow(10.0, -static_cast<double>(rng.uniform_index(6))));
      axpy(1.0, step, cand);
      optimal = base <= phi.value(cand) + dist_sq(x, cand) / (2.0 * lam) + 1e-12;
    }
    rec.check(optimal, "prox optimality", [&] {
      return Json{{"x", x}, {"lambda", lam}, {"mu", mu}};
    });

    const double a = uniform(rng, 0.0, 1.0);
    const double b = uniform(rng, 0.0, 1.0);
    Vector s1(n), s2(n), s12(n);
    kernel(x, a, s1);
    kernel(s1, b, s2);
    kernel(x, a + b, s12);
    double gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, std::abs(s2[i] - s12[i]));
    rec.check(gap <= 1e-12, "shrinkage semigroup", [&] {
      return Json{{"x", x}, {"a", a}, {"b", b}};
    });
  }
  return rec.take();
}

// All b-subsets of [0, N) in lexicographic order.
void for_each_subset(std::size_t N, std::size_t b,
                     const std::function<void(const SampleSet&)>& fn) {
  SampleSet s;
  s.indices.resize(b);
  for (std::size_t i = 0; i < b; ++i) s.indices[i] = i;
  while (true) {
    fn(s);
    std::size_t i = b;
    while (i > 0 && s.indices[i - 1] == N - b + i - 1) --i;
    if (i == 0) return;
    ++s.indices[i - 1];
    for (std::size_t k = i; k < b; ++k) s.indices[k] = s.indices[k - 1] + 1;
  }
}

SuiteReport oracle_suite(const VerifyOptions& o) {
  Recorder rec("oracles");
  Rng rng(o.seed);
  const std::size_t reps = o.cases ? o.cases : 5;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    for (std::size_t N = 1; N <= 6; ++N) {
      const std::size_t n = 1 + rng.uniform_index(4);
      const LeastSquaresProblem p = random_least_squares(rng, N, n);
      const Vector x = random_vector(rng, n);
      const Vector g = full_gradient(p, x);
      for (std::size_t b = 1; b <= N; ++b) {
        Vector mean(n, 0.0);
        std::size_t count = 0;
        for_each_subset(N, b, [&](const SampleSet& s) {
          axpy(1.0, minibatch_gradient(p, x, s), mean);
          ++count;
        });
        for (double& v : mean) v /= static_cast<double>(count);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          err = std::max(err, std::abs(mean[i] - g[i]) / std::max(1.0, std::abs(g[i])));
        rec.check(err <= 1e-14, "mini-batch unbiasedness", [&] {
          return Json{{"N", N}, {"b", b}, {"x", x}, {"targets", p.targets()}};
        });
      }
      const Vector anchor = random_vector(rng, n);
      const SvrgSnapshot snap = SvrgSnapshot::take(p, anchor);
      double var = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        SampleSet s;
        s.indices = {i};
        var += dist_sq(svrg_gradient(p, x, s, snap), g);
      }
      var /= static_cast<double>(N);
      const double L = p.lipschitz_uniform();
      rec.check(var <= L * L * dist_sq(x, anchor) * (1.0 + 1e-12) + 1e-14, "svrg variance bound",
                [&] { return Json{{"N", N}, {"x", x}, {"anchor", anchor}}; });
    }
  }
  return rec.take();
}

Dense identity(std::size_t n) {
  Dense m(n, Vector(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

Vector matvec(const Dense& m, ConstVec r) {
  Vector out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = dot(m[i], r);
  return out;
}

// W <- (I - rho u y') W (I - rho y u') + rho u u'
Dense bfgs_update(const Dense& W, ConstVec u, ConstVec y) {
  const std::size_t n = W.size();
  const double rho = 1.0 / dot(u, y);
  Dense left(n, Vector(n)), out(n, Vector(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += ((i == k) - rho * u[i] * y[k]) * W[k][j];
      left[i][j] = s;
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += left[i][k] * ((k == j) - rho * y[k] * u[j]);
      out[i][j] = s + rho * u[i] * u[j];
    }
  return out;
}

double spectral_norm_sym(const Dense& m, Rng& rng) {
  Vector v = random_vector(rng, m.size());
  double est = 0.0;
  for (int it = 0; it < 500; ++it) {
    const double nv = norm2(v);
    if (nv == 0.0) return 0.0;
    for (double& x : v) x /= nv;
    Vector w = matvec(m, v);
    est = norm2(w);
    v = std::move(w);
  }
  return est;
}

SuiteReport lbfgs_suite(const VerifyOptions& o) {
  Recorder rec("lbfgs");
  Rng rng(o.seed);
  const std::size_t cases = o.cases ? o.cases : 200;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t n = 2 + rng.uniform_index(7);
    const std::size_t p = 1 + rng.uniform_index(4);
    CurvatureBuffer buf(p, 1e-4);
    double max_ratio = 0.0;
    while (buf.size() < p) {
      const Vector u = random_vector(rng, n);
      Vector y = u;
      axpy(0.8, random_vector(rng, n), y);
      buf.try_push(u, y);
    }
    Dense W = identity(n);
    const double gamma = lbfgs_gamma(buf);
    for (auto& row : W)
      for (double& v : row) v *= gamma;
    double min_curv = std::numeric_limits<double>::infinity();
    for (const CurvaturePair& pr : buf.pairs()) {
      W = bfgs_update(W, pr.u, pr.y);
      min_curv = std::min(min_curv, pr.uy / norm2_sq(pr.u));
      max_ratio = std::max(max_ratio, norm2(pr.y) / norm2(pr.u));
    }
    const Vector r = random_vector(rng, n);
    const Vector fast = lbfgs_apply(buf, r);
    const Vector dense = matvec(W, r);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(fast[i] - dense[i]));
    rec.check(err <= 1e-11 * std::max(1.0, norm_inf(dense)), "two-loop equals dense recursion",
              [&] { return Json{{"n", n}, {"p", p}, {"r", r}}; });

    const double bound = nu_bar_bound(p, min_curv, std::max(0.0, max_ratio - 2.0), 1.0);
    const double measured = spectral_norm_sym(W, rng);
    rec.check(measured <= bound * (1.0 + 1e-9), "norm certificate", [&] {
      return Json{{"n", n}, {"p", p}, {"measured", measured}, {"bound", bound}};
    });
  }
  return rec.take();
}

struct SmallInstance {
  Dataset data;
  std::unique_ptr<LogRegProblem> problem;
  std::unique_ptr<L1Norm> phi;
};

SmallInstance random_logreg(Rng& rng) {
  SmallInstance s;
  SyntheticSpec spec;
  spec.rows = 3 + rng.uniform_index(10);
  spec.features = 2 + rng.uniform_index(5);
  s.data = make_synthetic(spec, rng);
  s.problem = std::make_unique<LogRegProblem>(s.data);
  s.phi = std::make_unique<L1Norm>(uniform(rng, 0.0, 0.3));
  return s;
}

SuiteReport descent_suite(const VerifyOptions& o) {
  Recorder rec("descent");
  Rng rng(o.seed);
  const std::size_t cases = o.cases ? o.cases : 1000;
  for (std::size_t c = 0; c < cases; ++c) {
    SmallInstance inst = random_logreg(rng);
    const CompositeProblem cp{*inst.problem, *inst.phi};
    const std::size_t n = inst.data.num_features();
    const double Lf = inst.problem->lipschitz_avg();
    const Vector x = random_vector(rng, n);
    const Vector d = random_vector(rng, n, uniform(rng, 0.0, 1.0));
    const Vector v = random_vector(rng, n);
    const Vector vp = random_vector(rng, n);
    StepPlan plan;
    plan.lambda_plus = uniform(rng, 0.01, 2.0) / Lf;
    plan.lambda = uniform(rng, 0.01, 2.0) / Lf;
    plan.alpha = uniform(rng, 0.0, 1.0);
    plan.beta = uniform(rng, 0.0, 1.0);
    const InequalityCheck chk = check_descent_inequality(cp, x, d, v, vp, plan);
    rec.check(chk.holds, "descent inequality", [&] {
      return Json{{"x", x}, {"d", d}, {"v", v}, {"v_plus", vp},
                  {"plan", {plan.lambda, plan.lambda_plus, plan.alpha, plan.beta}},
                  {"lhs", chk.lhs}, {"rhs", chk.rhs}};
    });
  }
  return rec.take();
}

SuiteReport pointdiff_suite(const VerifyOptions& o) {
  Recorder rec("pointdiff");
  Rng rng(o.seed);
  const std::size_t cases = o.cases ? o.cases : 200;
  for (std::size_t c = 0; c < cases; ++c) {
    SmallInstance inst = random_logreg(rng);
    const CompositeProblem cp{*inst.problem, *inst.phi};
    const std::size_t n = inst.data.num_features();
    const double Lf = inst.problem->lipschitz_avg();
    const Vector x = random_vector(rng, n);
    const Vector d = random_vector(rng, n, uniform(rng, 0.0, 1.0));
    const Vector vp = random_vector(rng, n);
    const double theta = uniform(rng, 0.05, 0.95) / Lf;
    StepPlan plan;
    plan.lambda_plus = uniform(rng, 0.05, 1.0) * theta;
    plan.lambda = plan.lambda_plus;
    plan.beta = uniform(rng, 0.0, 1.0);
    plan.alpha = uniform(rng, 0.0, 1.0);
    const InequalityCheck chk = check_pointdiff_inequality(cp, x, d, vp, plan, theta);
    rec.check(chk.holds, "point-difference inequality", [&] {
      return Json{{"x", x}, {"d", d}, {"v_plus", vp}, {"theta", theta},
                  {"plan", {plan.lambda, plan.lambda_plus, plan.alpha, plan.beta}},
                  {"lhs", chk.lhs}, {"rhs", chk.rhs}};
    });
  }
  return rec.take();
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"prox", "oracles", "lbfgs", "descent", "pointdiff"};
  return names;
}

SuiteReport run_suite(const std::string& name, const VerifyOptions& options) {
  if (name == "prox") return prox_suite(options);
  if (name == "oracles") return oracle_suite(options);
  if (name == "lbfgs") return lbfgs_suite(options);
  if (name == "descent") return descent_suite(options);
  if (name == "pointdiff") return pointdiff_suite(options);
  throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace seqn
