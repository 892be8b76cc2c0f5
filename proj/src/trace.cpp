#include "seqn/trace.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace seqn {

std::string library_version() { return "0.1.0"; }

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error("malformed number '" + s + "'");
  return v;
}

bool same_record(const TraceRecord& a, const TraceRecord& b) {
  auto eq = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
  return eq(a.epoch, b.epoch) && eq(a.wall_seconds, b.wall_seconds) && eq(a.psi, b.psi) &&
         eq(a.rel_err, b.rel_err) && a.nnz == b.nnz && eq(a.train_acc, b.train_acc) &&
         eq(a.test_acc, b.test_acc) && eq(a.residual_norm, b.residual_norm);
}

nlohmann::json Manifest::to_json() const {
  return nlohmann::json{{"config", config},
                        {"seed", seed},
                        {"dataset_fingerprint", dataset_fingerprint},
                        {"version", version},
                        {"timestamp", timestamp}};
}

Manifest Manifest::from_json(const nlohmann::json& j) {
  Manifest m;
  m.config = j.at("config");
  m.seed = j.at("seed").get<std::uint64_t>();
  m.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
  m.version = j.at("version").get<std::string>();
  m.timestamp = j.at("timestamp").get<std::string>();
  return m;
}

void write_trace_csv(std::ostream& out, const Manifest& m, const std::vector<TraceRecord>& rows) {
  out << "#manifest " << m.to_json().dump() << '\n';
  out << kTraceHeader << '\n';
  for (const TraceRecord& t : rows) {
    out << format_real(t.epoch) << ',' << format_real(t.wall_seconds) << ',' << format_real(t.psi)
        << ',' << format_real(t.rel_err) << ',' << t.nnz << ',' << format_real(t.train_acc) << ','
        << format_real(t.test_acc) << ',' << format_real(t.residual_norm) << '\n';
  }
}

Trace read_trace_csv(std::istream& in) {
  Trace tr;
  std::string line;
  bool have_manifest = false;
  bool have_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("#manifest ", 0) == 0) {
      tr.manifest = Manifest::from_json(nlohmann::json::parse(line.substr(10)));
      have_manifest = true;
      continue;
    }
    if (line[0] == '#') continue;
    if (!have_header) {
      if (line != kTraceHeader)
        throw std::runtime_error("trace line " + std::to_string(lineno) + ": unexpected header '" +
                                 line + "'");
      have_header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8)
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": expected 8 columns");
    TraceRecord t;
    t.epoch = parse_real(cells[0]);
    t.wall_seconds = parse_real(cells[1]);
    t.psi = parse_real(cells[2]);
    t.rel_err = parse_real(cells[3]);
    t.nnz = static_cast<std::size_t>(std::stoull(cells[4]));
    t.train_acc = parse_real(cells[5]);
    t.test_acc = parse_real(cells[6]);
    t.residual_norm = parse_real(cells[7]);
    tr.rows.push_back(t);
  }
  if (!have_manifest) throw std::runtime_error("trace: missing manifest line");
  if (!have_header) throw std::runtime_error("trace: missing header");
  return tr;
}

namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};

class Sha256 {
 public:
  Sha256() : ctx_{EVP_MD_CTX_new()} {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("sha256: init failed");
  }
  void update(const char* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw std::runtime_error("sha256: update failed");
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1)
      throw std::runtime_error("sha256: final failed");
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(digits[md[i] >> 4]);
      out.push_back(digits[md[i] & 15]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx_;
};

}  // namespace

std::string bytes_fingerprint(const std::string& bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string file_fingerprint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  Sha256 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

void write_reference(std::ostream& out, const ReferenceArtifact& r) {
  out << "psi_star=" << format_real(r.psi_star) << '\n';
  if (!r.converged) out << "# warning: iteration cap reached before tolerance\n";
  for (std::size_t i = 0; i < r.x.size(); ++i)
    if (r.x[i] != 0.0) out << i << ':' << format_real(r.x[i]) << '\n';
}

ReferenceArtifact read_reference(std::istream& in, std::size_t dimension) {
  ReferenceArtifact r;
  r.x.assign(dimension, 0.0);
  std::string line;
  bool have_psi = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("iteration cap") != std::string::npos) r.converged = false;
      continue;
    }
    if (!have_psi) {
      if (line.rfind("psi_star=", 0) != 0)
        throw std::runtime_error("reference: first line must be psi_star=<value>");
      r.psi_star = parse_real(line.substr(9));
      have_psi = true;
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("reference line " + std::to_string(lineno) + ": expected idx:val");
    const std::size_t idx = std::stoull(line.substr(0, colon));
    if (idx >= dimension)
      throw std::runtime_error("reference line " + std::to_string(lineno) + ": index out of range");
    r.x[idx] = parse_real(line.substr(colon + 1));
  }
  if (!have_psi) throw std::runtime_error("reference: missing psi_star");
  return r;
}

}  // namespace seqn
