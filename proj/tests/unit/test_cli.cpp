#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "seqn/trace.hpp"
#include "support.hpp"

using seqn::test::slurp;
using seqn::test::TempDir;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

struct CliResult {
  int code;
  std::string out;
};

CliResult cli(const TempDir& dir, const std::string& args, const std::string& env = "") {
  const std::string log = dir.file("cli.log");
  const std::string cmd = env + " " SEQN_CLI_PATH " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

seqn::Trace trace_of(const std::string& path) {
  std::ifstream in(path);
  return seqn::read_trace_csv(in);
}

std::vector<nlohmann::json> jsonl_of(const std::string& path) {
  std::vector<nlohmann::json> out;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  return out;
}

// Small dataset plus its reference artifact, shared by the run/compare cases.
struct Fixture {
  TempDir dir{"seqn-cli"};
  std::string data = dir.file("train.svm");
  std::string ref = dir.file("train.ref");
  Fixture() {
    REQUIRE(cli(dir, "synth --rows 400 --features 20 --seed 2 --out " + data).code == 0);
    REQUIRE(cli(dir, "reference --data " + data + " --out " + ref).code == 0);
  }
};

}  // namespace

TEST_CASE("help and usage errors") {
  TempDir dir("seqn-cli");
  CHECK(cli(dir, "--help").code == 0);
  CHECK(cli(dir, "run --help").code == 0);
  CHECK(cli(dir, "").code == 1);
  CHECK(cli(dir, "run --bogus 1 --data x --out y").code == 1);
  CHECK(cli(dir, "run --out y").code == 1);
  CHECK(cli(dir, "run --data missing.svm --out y").code == 1);
}

TEST_CASE("synth writes a parseable dataset") {
  TempDir dir("seqn-cli");
  const CliResult r = cli(dir, "synth --rows 30 --features 7 --density 0.5 --seed 4 --out " +
                                   dir.file("s.svm"));
  CHECK(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("30 rows"));
  const std::string a = slurp(dir.file("s.svm"));
  cli(dir, "synth --rows 30 --features 7 --density 0.5 --seed 4 --out " + dir.file("t.svm"));
  CHECK(a == slurp(dir.file("t.svm")));
}

TEST_CASE("reference is deterministic and hits the zero solution for large mu") {
  Fixture fx;
  CHECK(cli(fx.dir, "reference --data " + fx.data + " --out " + fx.dir.file("again.ref")).code == 0);
  CHECK(slurp(fx.ref) == slurp(fx.dir.file("again.ref")));

  const std::string big = fx.dir.file("big.ref");
  REQUIRE(cli(fx.dir, "reference --data " + fx.data + " --mu 100 --out " + big).code == 0);
  std::ifstream in(big);
  const seqn::ReferenceArtifact art = seqn::read_reference(in, 20);
  CHECK(seqn::nnz(art.x) == 0);
  CHECK_THAT(art.psi_star, WithinAbs(std::log(2.0), 1e-14));
}

TEST_CASE("reference exits 2 when the iteration cap is hit") {
  Fixture fx;
  const std::string out = fx.dir.file("capped.ref");
  CHECK(cli(fx.dir, "reference --data " + fx.data + " --max-iter 3 --out " + out).code == 2);
  CHECK_THAT(slurp(out), ContainsSubstring("# warning"));
}

TEST_CASE("run writes a manifest and per-epoch rows") {
  Fixture fx;
  const std::string out = fx.dir.file("run.csv");
  const CliResult r = cli(fx.dir, "run --data " + fx.data + " --ref " + fx.ref +
                                      " --epochs 80 --seed 3 --out " + out);
  CHECK(r.code == 0);
  const seqn::Trace t = trace_of(out);
  const auto& cfg = t.manifest.config;
  CHECK(cfg.at("method") == "seqn-vr");
  CHECK(cfg.at("direction") == "coord-lbfgs");
  CHECK(cfg.at("policy") == "adaptive");
  CHECK(cfg.at("K") == 10);
  CHECK(cfg.at("batch") == 4);
  CHECK(cfg.at("tol") == 1e-6);
  CHECK(cfg.at("mu") == 1.0 / 400);
  CHECK(cfg.at("tol_metric") == "rel_err");
  CHECK(t.manifest.seed == 3);
  CHECK(t.manifest.dataset_fingerprint == seqn::file_fingerprint(fx.data));
  REQUIRE(t.rows.size() >= 2);
  for (std::size_t k = 1; k < t.rows.size(); ++k) CHECK(t.rows[k].epoch >= t.rows[k - 1].epoch);
  CHECK(t.rows.back().rel_err <= 1e-6);
  CHECK(std::isnan(t.rows.back().test_acc));
  CHECK(t.rows.back().train_acc > 0.5);
}

TEST_CASE("run exit codes") {
  Fixture fx;
  const std::string out = fx.dir.file("run.csv");
  const std::string base = "run --data " + fx.data + " --out " + out;
  CHECK(cli(fx.dir, base + " --ref " + fx.ref + " --epochs 0.5").code == 2);
  CHECK(cli(fx.dir, base + " --method prox-sgd --policy C").code == 1);
  CHECK(cli(fx.dir, base + " --method prox-svrg --policy C").code == 1);
  CHECK(cli(fx.dir, base + " --method newton").code == 1);
  CHECK(cli(fx.dir, base + " --mu -1").code == 1);
  CHECK(cli(fx.dir, base + " --epochs 0").code == 1);
  CHECK(cli(fx.dir, base + " --policy C --direction identity --epochs 3").code == 2);
}

TEST_CASE("run with a test split tracks test accuracy") {
  Fixture fx;
  const std::string out = fx.dir.file("split.csv");
  REQUIRE(cli(fx.dir, "run --data " + fx.data + " --split 0.8 --split-seed 1 --epochs 3 --out " +
                          out)
              .code == 2);
  const seqn::Trace t = trace_of(out);
  CHECK(t.manifest.config.at("train_rows") == 320);
  CHECK(t.rows.back().test_acc > 0.5);
  CHECK(t.manifest.config.at("tol_metric") == "residual_norm");
}

TEST_CASE("SEQN_SEED overrides --seed") {
  Fixture fx;
  const std::string out = fx.dir.file("env.csv");
  cli(fx.dir, "run --data " + fx.data + " --epochs 2 --seed 5 --out " + out, "SEQN_SEED=77");
  CHECK(trace_of(out).manifest.seed == 77);
  CHECK(cli(fx.dir, "run --data " + fx.data + " --epochs 2 --out " + out, "SEQN_SEED=abc").code == 1);
}

TEST_CASE("deterministic clock makes repeated runs byte-identical") {
  Fixture fx;
  const std::string a = fx.dir.file("a.csv");
  const std::string b = fx.dir.file("b.csv");
  const std::string args = "run --data " + fx.data + " --ref " + fx.ref +
                           " --epochs 5 --seed 9 --deterministic-clock --out ";
  cli(fx.dir, args + a);
  cli(fx.dir, args + b);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).size() > 100);
}

TEST_CASE("multiple runs write one trace per seed, also in parallel") {
  Fixture fx;
  const std::string out = fx.dir.file("multi.csv");
  const std::string args = "run --data " + fx.data + " --epochs 2 --seed 10 --runs 3 "
                           "--deterministic-clock --out " + out;
  cli(fx.dir, args);
  const std::string s10 = slurp(fx.dir.file("multi.seed10.csv"));
  const std::string s12 = slurp(fx.dir.file("multi.seed12.csv"));
  CHECK(!s10.empty());
  CHECK(!s12.empty());
  CHECK(s10 != s12);
  cli(fx.dir, args + " --jobs 3");
  CHECK(slurp(fx.dir.file("multi.seed10.csv")) == s10);
  CHECK(slurp(fx.dir.file("multi.seed12.csv")) == s12);
}

TEST_CASE("compare marks the fastest trace and mirrors to JSON lines") {
  Fixture fx;
  const std::string vr = fx.dir.file("vr.csv");
  const std::string sgd = fx.dir.file("sgd.csv");
  const std::string svrg = fx.dir.file("svrg.csv");
  const std::string common = "run --data " + fx.data + " --ref " + fx.ref + " ";
  REQUIRE(cli(fx.dir, common + "--epochs 60 --out " + vr).code == 0);
  REQUIRE(cli(fx.dir, common + "--method prox-sgd --epochs 3 --out " + sgd).code == 2);
  REQUIRE(cli(fx.dir, common + "--method prox-svrg --epochs 60 --out " + svrg).code == 0);

  const std::string jl = fx.dir.file("cmp.jsonl");
  const CliResult r = cli(fx.dir, "compare " + vr + " " + sgd + " " + svrg + " --jsonl " + jl);
  CHECK(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("seqn-vr/coord-lbfgs"));
  CHECK_THAT(r.out, ContainsSubstring(">"));
  CHECK_THAT(r.out, ContainsSubstring("*"));

  const auto lines = jsonl_of(jl);
  REQUIRE(lines.size() == 3);
  int best = 0;
  for (const auto& j : lines) {
    for (const char* key : {"trace", "method", "rel_err", "rel_err_clamped", "epochs_to_tol",
                            "epochs", "nnz", "best_epochs", "dataset_fingerprint"})
      CHECK(j.contains(key));
    CHECK(j.at("rel_err_clamped").get<double>() >= 0.0);
    CHECK(j.at("dataset_fingerprint") == seqn::file_fingerprint(fx.data));
    best += j.at("best_epochs").get<bool>();
  }
  CHECK(best == 1);
  CHECK(lines[1].at("epochs_to_tol").is_null());
  CHECK_FALSE(lines[1].at("best_epochs").get<bool>());
  const double e_vr = lines[0].at("epochs_to_tol").get<double>();
  const double e_svrg = lines[2].at("epochs_to_tol").get<double>();
  CHECK(lines[e_vr <= e_svrg ? 0 : 2].at("best_epochs").get<bool>());

  const CliResult single = cli(fx.dir, "compare " + vr);
  CHECK(single.code == 0);
  CHECK_THAT(single.out, ContainsSubstring(" *"));
}

TEST_CASE("compare refuses traces from different datasets") {
  Fixture fx;
  const std::string other = fx.dir.file("other.svm");
  cli(fx.dir, "synth --rows 100 --features 20 --seed 3 --out " + other);
  const std::string a = fx.dir.file("a.csv");
  const std::string b = fx.dir.file("b.csv");
  cli(fx.dir, "run --data " + fx.data + " --epochs 1 --out " + a);
  cli(fx.dir, "run --data " + other + " --epochs 1 --out " + b);
  const CliResult r = cli(fx.dir, "compare " + a + " " + b);
  CHECK(r.code == 1);
  CHECK_THAT(r.out, ContainsSubstring("different dataset"));
}

TEST_CASE("verify runs suites and reports injected bugs") {
  TempDir dir("seqn-cli");
  const CliResult prox = cli(dir, "verify --suite prox --seed 3 --cases 200");
  CHECK(prox.code == 0);
  CHECK_THAT(prox.out, ContainsSubstring("PASS prox"));
  CHECK(prox.out.find("oracles") == std::string::npos);
  CHECK(cli(dir, "verify --suite prox --seed 3 --cases 200").out == prox.out);

  const std::string dump = dir.file("cex.json");
  const CliResult bad = cli(dir, "verify --suite prox --inject sign --dump " + dump);
  CHECK(bad.code == 3);
  CHECK_THAT(bad.out, ContainsSubstring("FAIL prox"));
  const auto j = nlohmann::json::parse(slurp(dump));
  REQUIRE(j.is_array());
  CHECK(j[0].at("suite") == "prox");
  CHECK(j[0].at("instance").is_object());

  CHECK(cli(dir, "verify --suite nope").code == 1);
  CHECK(cli(dir, "verify --seeds 2 --cases 20").code == 0);
}
