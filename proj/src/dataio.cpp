#include "seqn/dataio.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace seqn {

void Dataset::add_row(std::span<const std::size_t> indices, std::span<const double> values,
                      double label) {
  require_same_size(indices.size(), values.size(), "Dataset::add_row");
  if (label != 1.0 && label != -1.0) throw std::invalid_argument("Dataset::add_row: label must be +-1");
  for (std::size_t k = 1; k < indices.size(); ++k)
    if (indices[k] <= indices[k - 1])
      throw std::invalid_argument("Dataset::add_row: indices must be strictly ascending");
  indices_.insert(indices_.end(), indices.begin(), indices.end());
  values_.insert(values_.end(), values.begin(), values.end());
  offsets_.push_back(indices_.size());
  labels_.push_back(label);
  if (!indices.empty()) num_features_ = std::max(num_features_, indices.back() + 1);
}

void Dataset::set_num_features(std::size_t n) {
  for (std::size_t i : indices_)
    if (i >= n)
      throw std::invalid_argument("Dataset: feature index " + std::to_string(i + 1) +
                                  " exceeds num_features " + std::to_string(n));
  num_features_ = n;
}

RowView Dataset::row(std::size_t i) const {
  const std::size_t lo = offsets_[i];
  const std::size_t hi = offsets_[i + 1];
  return RowView{std::span<const std::size_t>(indices_.data() + lo, hi - lo),
                 std::span<const double>(values_.data() + lo, hi - lo), labels_[i]};
}

double Dataset::row_dot(std::size_t i, ConstVec x) const {
  double s = 0.0;
  for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s += values_[k] * x[indices_[k]];
  return s;
}

double Dataset::row_norm_sq(std::size_t i) const {
  double s = 0.0;
  for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s += values_[k] * values_[k];
  return s;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  for (std::size_t r : rows) {
    const RowView v = row(r);
    out.add_row(v.indices, v.values, v.label);
  }
  out.num_features_ = num_features_;
  out.name_ = name_;
  return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.offsets_ == b.offsets_ && a.indices_ == b.indices_ && a.values_ == b.values_ &&
         a.labels_ == b.labels_ && a.num_features_ == b.num_features_;
}

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& msg) {
  throw std::runtime_error("libsvm line " + std::to_string(line) + ": " + msg);
}

double parse_double(std::string_view tok, std::size_t line) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    parse_error(line, "malformed number '" + std::string(tok) + "'");
  return v;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> num_features) {
  Dataset d;
  std::string text;
  std::size_t lineno = 0;
  std::vector<std::size_t> idx;
  std::vector<double> val;
  while (std::getline(in, text)) {
    ++lineno;
    std::string_view line(text);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);

    idx.clear();
    val.clear();
    bool have_label = false;
    double label = 0.0;
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
      if (pos >= line.size()) break;
      std::size_t end = pos;
      while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
      const std::string_view tok = line.substr(pos, end - pos);
      pos = end;

      if (!have_label) {
        const double raw = parse_double(tok, lineno);
        if (raw == 1.0)
          label = 1.0;
        else if (raw == -1.0 || raw == 0.0)
          label = -1.0;
        else
          parse_error(lineno, "unknown label '" + std::string(tok) + "'");
        have_label = true;
        continue;
      }

      const auto colon = tok.find(':');
      if (colon == std::string_view::npos || colon == 0)
        parse_error(lineno, "malformed feature '" + std::string(tok) + "'");
      std::size_t one_based = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + colon, one_based);
      if (ec != std::errc{} || ptr != tok.data() + colon || one_based == 0)
        parse_error(lineno, "malformed feature index '" + std::string(tok) + "'");
      const std::size_t i = one_based - 1;
      if (!idx.empty() && i <= idx.back())
        parse_error(lineno, "feature indices not strictly ascending");
      idx.push_back(i);
      val.push_back(parse_double(tok.substr(colon + 1), lineno));
    }
    if (!have_label) continue;  // blank or comment-only line
    d.add_row(idx, val, label);
  }
  if (num_features) d.set_num_features(*num_features);
  return d;
}

Dataset load_libsvm(const std::string& path, std::optional<std::size_t> num_features) {
  // gzread passes uncompressed input through unchanged.
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw std::runtime_error("cannot open dataset '" + path + "'");
  std::string content;
  char buf[1 << 16];
  int got = 0;
  while ((got = gzread(f, buf, sizeof buf)) > 0) content.append(buf, static_cast<std::size_t>(got));
  int err = Z_OK;
  const char* msg = gzerror(f, &err);
  const bool failed = got < 0 || (err != Z_OK && err != Z_STREAM_END);
  const std::string what = failed ? std::string(msg) : std::string();
  gzclose(f);
  if (failed) throw std::runtime_error("error reading '" + path + "': " + what);
  std::istringstream in(content);
  Dataset d = parse_libsvm(in, num_features);
  d.set_name(path);
  return d;
}

void write_libsvm(std::ostream& out, const Dataset& d) {
  char buf[64];
  for (std::size_t i = 0; i < d.num_rows(); ++i) {
    const RowView r = d.row(i);
    out << (r.label > 0 ? "+1" : "-1");
    for (std::size_t k = 0; k < r.indices.size(); ++k) {
      std::snprintf(buf, sizeof buf, " %zu:%.17g", r.indices[k] + 1, r.values[k]);
      out << buf;
    }
    out << '\n';
  }
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& d, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split_train_test: fraction must lie in (0, 1)");
  const std::size_t n = d.num_rows();
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n)
    throw std::invalid_argument("split_train_test: split leaves one side empty");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[static_cast<std::size_t>(rng.uniform_index(i + 1))]);
  const std::span<const std::size_t> all(perm);
  return {d.subset(all.first(n_train)), d.subset(all.subspan(n_train))};
}

double accuracy(ConstVec x, const Dataset& d) {
  if (d.num_rows() == 0) throw std::invalid_argument("accuracy: empty dataset");
  require_same_size(x.size(), d.num_features(), "accuracy");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < d.num_rows(); ++i) {
    const double pred = d.row_dot(i, x) >= 0.0 ? 1.0 : -1.0;
    if (pred == d.row(i).label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(d.num_rows());
}

Dataset make_synthetic(const SyntheticSpec& spec, Rng& rng) {
  if (spec.rows == 0 || spec.features == 0)
    throw std::invalid_argument("make_synthetic: empty shape");
  const std::size_t n = spec.features;

  Vector model(n, 0.0);
  for (double& w : model)
    if (rng.uniform01() < spec.model_density) w = rng.normal();
  if (nnz(model) == 0) model[0] = 1.0;

  const double c = spec.correlation;
  const double s = std::sqrt(1.0 - c * c);
  Dataset d;
  std::vector<std::size_t> idx;
  Vector val;
  for (std::size_t r = 0; r < spec.rows; ++r) {
    idx.clear();
    val.clear();
    if (spec.density >= 1.0) {
      double prev = rng.normal();
      for (std::size_t j = 0; j < n; ++j) {
        const double v = j == 0 ? prev : c * prev + s * rng.normal();
        prev = v;
        idx.push_back(j);
        val.push_back(v);
      }
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        if (rng.uniform01() < spec.density) {
          idx.push_back(j);
          val.push_back(rng.uniform01() + 0.1);  // positive, tf-idf like
        }
      }
    }
    if (spec.normalize_rows) {
      double sq = 0.0;
      for (double v : val) sq += v * v;
      if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (double& v : val) v *= inv;
      }
    }
    double margin = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) margin += val[k] * model[idx[k]];
    double label = margin >= 0.0 ? 1.0 : -1.0;
    if (rng.uniform01() < spec.label_noise) label = -label;
    d.add_row(idx, val, label);
  }
  d.set_num_features(n);
  d.set_name("synthetic");
  return d;
}

}  // namespace seqn
