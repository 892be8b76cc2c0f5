#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqn/vec.hpp"

namespace seqn {

/// One log row, written at each epoch boundary.
struct TraceRecord {
  double epoch = 0.0;
  double wall_seconds = 0.0;
  double psi = 0.0;
  double rel_err = 0.0;  // raw, may be negative; NaN without a reference value
  std::size_t nnz = 0;
  double train_acc = 0.0;  // NaN when not tracked
  double test_acc = 0.0;
  double residual_norm = 0.0;  // ||F^I(x)||, the unit-step natural residual
};

/// Field-wise equality where NaN matches NaN.
bool same_record(const TraceRecord& a, const TraceRecord& b);

inline constexpr const char* kTraceHeader =
    "epoch,wall_seconds,psi,rel_err,nnz,train_acc,test_acc,residual_norm";

/// Shortest-round-trip decimal (%.17g); "nan", "inf", "-inf" for non-finite.
std::string format_real(double v);
double parse_real(const std::string& s);

struct Manifest {
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string dataset_fingerprint;
  std::string version;
  std::string timestamp;

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
};

struct Trace {
  Manifest manifest;
  std::vector<TraceRecord> rows;
};

/// "#manifest {json}" line, the header, then one row per record.
void write_trace_csv(std::ostream& out, const Manifest& m, const std::vector<TraceRecord>& rows);
Trace read_trace_csv(std::istream& in);

/// Hex SHA-256 of the file bytes.
std::string file_fingerprint(const std::string& path);
std::string bytes_fingerprint(const std::string& bytes);

/// "psi_star=<v>" followed by "idx:val" lines for the nonzeros of x (0-based).
struct ReferenceArtifact {
  double psi_star = 0.0;
  Vector x;
  bool converged = true;
};
void write_reference(std::ostream& out, const ReferenceArtifact& r);
/// dimension sizes x; throws on malformed content.
ReferenceArtifact read_reference(std::istream& in, std::size_t dimension);

std::string library_version();
std::string utc_timestamp();

}  // namespace seqn
