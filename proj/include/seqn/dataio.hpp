#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqn/rng.hpp"
#include "seqn/vec.hpp"

namespace seqn {

struct RowView {
  std::span<const std::size_t> indices;  // strictly ascending, 0-based
  std::span<const double> values;
  double label;  // -1 or +1
};

/// Labelled sparse rows in compressed-row storage.
class Dataset {
 public:
  Dataset() = default;

  /// Appends a row; indices must be strictly ascending.
  void add_row(std::span<const std::size_t> indices, std::span<const double> values,
               double label);

  std::size_t num_rows() const { return labels_.size(); }
  std::size_t num_features() const { return num_features_; }
  /// Throws if an existing row has an index >= n.
  void set_num_features(std::size_t n);

  RowView row(std::size_t i) const;
  double row_dot(std::size_t i, ConstVec x) const;
  double row_norm_sq(std::size_t i) const;

  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }

  /// Rows in the given order, same feature count.
  Dataset subset(std::span<const std::size_t> rows) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> indices_;
  std::vector<double> values_;
  std::vector<double> labels_;
  std::size_t num_features_ = 0;
  std::string name_;
};

/// LIBSVM text: "<label> <idx>:<val> ..." with 1-based indices, '#' comments.
/// Labels {0, -1} map to -1 and {1, +1} to +1. num_features defaults to the
/// largest index seen.
Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> num_features = std::nullopt);

/// Reads a plain or gzip-compressed LIBSVM file.
Dataset load_libsvm(const std::string& path,
                    std::optional<std::size_t> num_features = std::nullopt);

void write_libsvm(std::ostream& out, const Dataset& d);

/// Seeded shuffle, then the first llround(fraction * N) rows form the train set.
std::pair<Dataset, Dataset> split_train_test(const Dataset& d, double fraction, Rng& rng);

/// Fraction of rows with sign(<a_i, x>) == b_i; a zero margin predicts +1.
double accuracy(ConstVec x, const Dataset& d);

struct SyntheticSpec {
  std::size_t rows = 1000;
  std::size_t features = 50;
  double density = 1.0;     // expected fraction of nonzeros per row
  double correlation = 0.0; // AR(1)-style coupling of neighbouring dense features
  double model_density = 0.2;
  double label_noise = 0.05;
  bool normalize_rows = false;
};

/// Labelled data from a sparse planted linear model.
Dataset make_synthetic(const SyntheticSpec& spec, Rng& rng);

}  // namespace seqn
