// Command-line driver: run solvers, compute reference values, compare traces,
// run the property suites and generate synthetic data.

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "seqn/dataio.hpp"
#include "seqn/logreg.hpp"
#include "seqn/solver.hpp"
#include "seqn/trace.hpp"
#include "seqn/verify.hpp"

namespace {

using namespace seqn;
using Json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitBudget = 2;
constexpr int kExitViolation = 3;

struct DataOptions {
  std::string data;
  std::string test;
  double split = 0.0;
  std::uint64_t split_seed = 0;
  std::size_t num_features = 0;
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--data", d.data, "LIBSVM training file (plain or gzip)")->required();
  cmd->add_option("--split", d.split, "Train fraction when no --test file is given");
  cmd->add_option("--split-seed", d.split_seed, "Seed of the train/test shuffle");
  cmd->add_option("--num-features", d.num_features, "Override the feature count");
}

struct LoadedData {
  Dataset train;
  std::optional<Dataset> test;
  std::string fingerprint;
};

LoadedData load(const DataOptions& o) {
  LoadedData out;
  std::optional<std::size_t> nf;
  if (o.num_features > 0) nf = o.num_features;
  Dataset all = load_libsvm(o.data, nf);
  out.fingerprint = file_fingerprint(o.data);
  if (!o.test.empty()) {
    Dataset test = load_libsvm(o.test, nf);
    const std::size_t n = std::max(all.num_features(), test.num_features());
    all.set_num_features(n);
    test.set_num_features(n);
    out.test = std::move(test);
    out.train = std::move(all);
  } else if (o.split > 0.0) {
    Rng rng(o.split_seed);
    auto [train, test] = split_train_test(all, o.split, rng);
    out.train = std::move(train);
    out.test = std::move(test);
  } else {
    out.train = std::move(all);
  }
  if (out.train.num_rows() == 0) throw std::runtime_error("training set is empty");
  return out;
}

double parse_mu(const std::string& s, std::size_t N) {
  if (s == "auto") return 1.0 / static_cast<double>(N);
  const double mu = parse_real(s);
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("--mu must be >= 0");
  return mu;
}

std::string seeded_path(const std::string& out, std::uint64_t seed, std::size_t runs) {
  if (runs <= 1) return out;
  const auto dot = out.rfind('.');
  const std::string tag = ".seed" + std::to_string(seed);
  if (dot == std::string::npos || out.find('/', dot) != std::string::npos) return out + tag;
  return out.substr(0, dot) + tag + out.substr(dot);
}

struct RunArgs {
  DataOptions data;
  std::string method = "seqn-vr";
  std::string direction = "coord-lbfgs";
  std::string policy = "adaptive";
  std::string mu = "auto";
  std::uint64_t seed = 1;
  double epochs = 100.0;
  double tol = 1e-6;
  std::size_t K = 0;
  std::size_t batch = 0;
  std::size_t batch_plus = 0;
  bool reuse_batch = true;
  bool subspace = false;
  double nu_bar = 10.0;
  std::string ref;
  std::string out;
  std::size_t runs = 1;
  int jobs = 1;
  bool deterministic_clock = false;
  double log_interval = 1.0;
};

Json config_echo(const RunArgs& a, const SolverConfig& c, double mu, const LoadedData& d) {
  return Json{{"data", a.data.data},
              {"test", a.data.test},
              {"split", a.data.split},
              {"split_seed", a.data.split_seed},
              {"method", to_string(c.method)},
              {"direction", to_string(c.direction)},
              {"policy", to_string(c.policy)},
              {"mu", mu},
              {"epochs", c.epochs},
              {"tol", c.tol},
              {"K", c.K},
              {"batch", c.b},
              {"batch_plus", c.b_plus},
              {"reuse_batch", c.reuse_batch},
              {"subspace", c.subspace},
              {"nu_bar", c.nu_bar},
              {"psi_star", c.psi_star ? Json(format_real(*c.psi_star)) : Json(nullptr)},
              {"tol_metric", c.psi_star ? "rel_err" : "residual_norm"},
              {"log_interval", c.log_interval},
              {"rng", Rng::kAlgorithm},
              {"train_rows", d.train.num_rows()},
              {"features", d.train.num_features()}};
}

int cmd_run(RunArgs a) {
  if (const char* env = std::getenv("SEQN_SEED")) {
    std::uint64_t s = 0;
    std::istringstream in(env);
    if (!(in >> s)) throw std::invalid_argument("SEQN_SEED must be an unsigned integer");
    a.seed = s;
  }
  const LoadedData d = load(a.data);
  const LogRegProblem f(d.train);
  const L1Norm phi(parse_mu(a.mu, d.train.num_rows()));
  const CompositeProblem problem{f, phi};

  SolverConfig base;
  base.method = parse_method(a.method);
  base.direction = parse_direction(a.direction);
  base.policy = parse_policy(a.policy);
  if (base.policy == Policy::C_rate && base.method != Method::seqn_vr)
    throw std::invalid_argument("policy C is only defined for method seqn-vr");
  base.epochs = a.epochs;
  base.tol = a.tol;
  base.K = a.K;
  base.b = a.batch;
  base.b_plus = a.batch_plus;
  base.reuse_batch = a.reuse_batch;
  base.subspace = a.subspace;
  base.nu_bar = a.nu_bar;
  base.log_interval = a.log_interval;
  base.deterministic_clock = a.deterministic_clock;
  if (!a.ref.empty()) {
    std::ifstream in(a.ref);
    if (!in) throw std::runtime_error("cannot open reference '" + a.ref + "'");
    base.psi_star = read_reference(in, d.train.num_features()).psi_star;
  }
  base = resolve_defaults(base, d.train.num_rows());

  RunHooks hooks;
  hooks.train_accuracy = [&](ConstVec x) { return accuracy(x, d.train); };
  if (d.test) hooks.test_accuracy = [&](ConstVec x) { return accuracy(x, *d.test); };

  const Vector x0(d.train.num_features(), 0.0);
  const std::size_t runs = std::max<std::size_t>(1, a.runs);
  std::vector<int> codes(runs, kExitOk);
  std::vector<std::string> messages(runs);

#pragma omp parallel for num_threads(std::max(1, a.jobs)) schedule(dynamic)
  for (std::size_t r = 0; r < runs; ++r) {
    SolverConfig c = base;
    c.seed = a.seed + r;
    std::ostringstream msg;
    try {
      const RunResult res = run(problem, x0, c, hooks);
      Manifest m;
      m.config = config_echo(a, c, phi.mu(), d);
      m.seed = c.seed;
      m.dataset_fingerprint = d.fingerprint;
      m.version = library_version();
      m.timestamp = a.deterministic_clock ? "1970-01-01T00:00:00Z" : utc_timestamp();
      const std::string path = seeded_path(a.out, c.seed, runs);
      std::ofstream out(path);
      if (!out) throw std::runtime_error("cannot write '" + path + "'");
      write_trace_csv(out, m, res.trace);
      const TraceRecord& last = res.trace.back();
      msg << "seed " << c.seed << ": "
          << (res.status == RunStatus::tol_reached ? "tol reached" : "budget exhausted")
          << " after " << format_real(res.epochs()) << " epochs, psi=" << format_real(last.psi)
          << ", nnz=" << last.nnz << " -> " << path;
      codes[r] = res.status == RunStatus::tol_reached ? kExitOk : kExitBudget;
    } catch (const std::exception& e) {
      msg << "seed " << c.seed << ": error: " << e.what();
      codes[r] = kExitError;
    }
    messages[r] = msg.str();
  }

  int code = kExitOk;
  for (std::size_t r = 0; r < runs; ++r) {
    (codes[r] == kExitError ? std::cerr : std::cout) << messages[r] << '\n';
    if (codes[r] == kExitError) code = kExitError;
    else if (codes[r] == kExitBudget && code == kExitOk) code = kExitBudget;
  }
  return code;
}

struct ReferenceArgs {
  DataOptions data;
  std::string mu = "auto";
  std::string out;
  double tol = 1e-12;
  std::size_t max_iter = 200000;
};

int cmd_reference(const ReferenceArgs& a) {
  const LoadedData d = load(a.data);
  const LogRegProblem f(d.train);
  const L1Norm phi(parse_mu(a.mu, d.train.num_rows()));
  const Vector x0(d.train.num_features(), 0.0);
  const ReferenceResult ref = run_reference(CompositeProblem{f, phi}, x0, a.tol, a.max_iter);
  ReferenceArtifact art{ref.psi, ref.x, ref.converged};
  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot write '" + a.out + "'");
  write_reference(out, art);
  std::cout << "psi_star=" << format_real(ref.psi) << " iterations=" << ref.iterations
            << " residual=" << format_real(ref.residual) << " nnz=" << nnz(ref.x) << '\n';
  if (!ref.converged) {
    std::cerr << "warning: iteration cap reached before tolerance " << format_real(a.tol) << '\n';
    return kExitBudget;
  }
  return kExitOk;
}

struct CompareArgs {
  std::vector<std::string> traces;
  std::string jsonl;
};

int cmd_compare(const CompareArgs& a) {
  struct Row {
    std::string path;
    std::string method;
    double final_rel_err;
    double epochs_to_tol;  // NaN if never reached
    double epochs_total;
    std::size_t nnz;
  };
  std::vector<Row> rows;
  std::string fingerprint;
  for (const std::string& p : a.traces) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open '" + p + "'");
    const Trace t = read_trace_csv(in);
    if (t.rows.empty()) throw std::runtime_error("trace '" + p + "' has no rows");
    if (fingerprint.empty()) fingerprint = t.manifest.dataset_fingerprint;
    if (t.manifest.dataset_fingerprint != fingerprint)
      throw std::runtime_error("trace '" + p + "' was produced on a different dataset");
    const Json& cfg = t.manifest.config;
    const double tol = cfg.value("tol", 1e-6);
    const bool by_rel = cfg.value("tol_metric", std::string("rel_err")) == "rel_err";
    Row r{p, cfg.value("method", std::string("?")) + "/" + cfg.value("direction", std::string("?")),
          t.rows.back().rel_err, std::numeric_limits<double>::quiet_NaN(), t.rows.back().epoch,
          t.rows.back().nnz};
    for (const TraceRecord& rec : t.rows) {
      const double metric = by_rel ? rec.rel_err : rec.residual_norm;
      if (metric <= tol) {
        r.epochs_to_tol = rec.epoch;
        break;
      }
    }
    rows.push_back(r);
  }

  std::size_t best = rows.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (std::isnan(rows[i].epochs_to_tol)) continue;
    if (best == rows.size() || rows[i].epochs_to_tol < rows[best].epochs_to_tol) best = i;
  }

  std::cout << std::left << std::setw(24) << "method" << std::setw(14) << "rel_err"
            << std::setw(12) << "epochs" << std::setw(8) << "nnz" << "trace\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    std::ostringstream ep;
    if (std::isnan(r.epochs_to_tol))
      ep << ">" << std::setprecision(4) << r.epochs_total;
    else
      ep << std::setprecision(4) << r.epochs_to_tol << (i == best ? " *" : "");
    std::ostringstream re;
    re << std::scientific << std::setprecision(2) << std::max(0.0, r.final_rel_err);
    std::cout << std::left << std::setw(24) << r.method << std::setw(14) << re.str()
              << std::setw(12) << ep.str() << std::setw(8) << r.nnz << r.path << '\n';
  }

  if (!a.jsonl.empty()) {
    std::ofstream out(a.jsonl);
    if (!out) throw std::runtime_error("cannot write '" + a.jsonl + "'");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      Json j{{"trace", r.path},
             {"method", r.method},
             {"rel_err", r.final_rel_err},
             {"rel_err_clamped", std::max(0.0, r.final_rel_err)},
             {"epochs_to_tol", std::isnan(r.epochs_to_tol) ? Json(nullptr) : Json(r.epochs_to_tol)},
             {"epochs", r.epochs_total},
             {"nnz", r.nnz},
             {"best_epochs", i == best},
             {"dataset_fingerprint", fingerprint}};
      out << j.dump() << '\n';
    }
  }
  return kExitOk;
}

struct VerifyArgs {
  std::vector<std::string> suites;
  std::uint64_t seed = 1;
  std::size_t seeds = 1;
  std::size_t cases = 0;
  std::string inject;
  std::string dump;
};

int cmd_verify(const VerifyArgs& a) {
  VerifyOptions opt;
  opt.cases = a.cases;
  if (a.inject == "sign") {
    opt.soft_threshold = [](ConstVec x, double tau, MutVec out) {
      soft_threshold(x, tau, out);
      for (double& v : out) v = -v;
    };
  } else if (!a.inject.empty()) {
    throw std::invalid_argument("unknown mutant '" + a.inject + "'");
  }
  const std::vector<std::string> suites = a.suites.empty() ? suite_names() : a.suites;
  Json failures = Json::array();
  for (std::size_t k = 0; k < std::max<std::size_t>(1, a.seeds); ++k) {
    opt.seed = a.seed + k;
    for (const std::string& s : suites) {
      const SuiteReport rep = run_suite(s, opt);
      std::cout << (rep.passed() ? "PASS " : "FAIL ") << std::left << std::setw(10) << rep.suite
                << " seed=" << opt.seed << " cases=" << rep.cases
                << " violations=" << rep.violations;
      if (!rep.passed()) std::cout << " property=\"" << rep.property << "\"";
      std::cout << '\n';
      if (!rep.passed())
        failures.push_back(Json{{"suite", rep.suite},
                                {"seed", opt.seed},
                                {"property", rep.property},
                                {"instance", rep.counterexample}});
    }
  }
  if (failures.empty()) return kExitOk;
  if (a.dump.empty()) {
    std::cout << failures.dump(2) << '\n';
  } else {
    std::ofstream out(a.dump);
    out << failures.dump(2) << '\n';
  }
  return kExitViolation;
}

struct SynthArgs {
  SyntheticSpec spec;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  Rng rng(a.seed);
  const Dataset d = make_synthetic(a.spec, rng);
  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot write '" + a.out + "'");
  write_libsvm(out, d);
  std::cout << "wrote " << d.num_rows() << " rows, " << d.num_features() << " features to "
            << a.out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic extra-step quasi-Newton solvers for l1-regularized logistic regression"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a solver and write a CSV trace");
  add_data_options(run, run_args.data);
  run->add_option("--test", run_args.data.test, "LIBSVM test file");
  run->add_option("--method", run_args.method)
      ->check(CLI::IsMember({"seqn", "seqn-vr", "prox-sgd", "prox-svrg"}));
  run->add_option("--direction", run_args.direction)
      ->check(CLI::IsMember({"identity", "lbfgs", "coord-lbfgs"}));
  run->add_option("--policy", run_args.policy)->check(CLI::IsMember({"A", "B", "C", "adaptive"}));
  run->add_option("--mu", run_args.mu, "l1 weight or 'auto' (1/N)");
  run->add_option("--seed", run_args.seed, "Base seed; SEQN_SEED overrides");
  run->add_option("--epochs", run_args.epochs, "Epoch budget")->check(CLI::PositiveNumber);
  run->add_option("--tol", run_args.tol)->check(CLI::PositiveNumber);
  run->add_option("--K", run_args.K, "Inner iterations per snapshot");
  run->add_option("--batch", run_args.batch);
  run->add_option("--batch-plus", run_args.batch_plus);
  run->add_option("--reuse-batch", run_args.reuse_batch);
  run->add_option("--subspace", run_args.subspace);
  run->add_option("--nu-bar", run_args.nu_bar)->check(CLI::PositiveNumber);
  run->add_option("--ref", run_args.ref, "Reference artifact from 'reference'");
  run->add_option("--out", run_args.out, "CSV trace path")->required();
  run->add_option("--runs", run_args.runs, "Consecutive seeds to run");
  run->add_option("--jobs", run_args.jobs, "Runs executed in parallel");
  run->add_flag("--deterministic-clock", run_args.deterministic_clock,
                "Write zero wall time and a fixed timestamp");
  run->add_option("--log-interval", run_args.log_interval)->check(CLI::PositiveNumber);

  ReferenceArgs ref_args;
  auto* ref = app.add_subcommand("reference", "Compute psi* by deterministic proximal gradient");
  add_data_options(ref, ref_args.data);
  ref->add_option("--mu", ref_args.mu);
  ref->add_option("--out", ref_args.out)->required();
  ref->add_option("--tol", ref_args.tol)->check(CLI::PositiveNumber);
  ref->add_option("--max-iter", ref_args.max_iter);

  CompareArgs cmp_args;
  auto* cmp = app.add_subcommand("compare", "Summarize traces produced on one dataset");
  cmp->add_option("traces", cmp_args.traces)->required()->check(CLI::ExistingFile);
  cmp->add_option("--jsonl", cmp_args.jsonl, "Write a JSON-lines summary");

  VerifyArgs ver_args;
  auto* ver = app.add_subcommand("verify", "Run the randomized property suites");
  ver->add_option("--suite", ver_args.suites)
      ->check(CLI::IsMember({"prox", "oracles", "lbfgs", "descent", "pointdiff"}));
  ver->add_option("--seed", ver_args.seed);
  ver->add_option("--seeds", ver_args.seeds, "Number of consecutive seeds");
  ver->add_option("--cases", ver_args.cases, "Cases per suite (0 = default)");
  ver->add_option("--inject", ver_args.inject, "Run with a known-bad kernel (sign)");
  ver->add_option("--dump", ver_args.dump, "Write counterexamples to this JSON file");

  SynthArgs syn_args;
  auto* syn = app.add_subcommand("synth", "Write a synthetic LIBSVM dataset");
  syn->add_option("--rows", syn_args.spec.rows);
  syn->add_option("--features", syn_args.spec.features);
  syn->add_option("--density", syn_args.spec.density);
  syn->add_option("--correlation", syn_args.spec.correlation);
  syn->add_option("--model-density", syn_args.spec.model_density);
  syn->add_option("--label-noise", syn_args.spec.label_noise);
  syn->add_flag("--normalize", syn_args.spec.normalize_rows);
  syn->add_option("--seed", syn_args.seed);
  syn->add_option("--out", syn_args.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*ref) return cmd_reference(ref_args);
    if (*cmp) return cmd_compare(cmp_args);
    if (*ver) return cmd_verify(ver_args);
    if (*syn) return cmd_synth(syn_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
