#pragma once

#include <cstddef>
#include <vector>

#include "seqn/dataio.hpp"
#include "seqn/problem.hpp"

namespace seqn {

/// log(1 + exp(t)) without overflow.
double softplus(double t);

/// f_i(x) = log(1 + exp(-b_i <a_i, x>)), L_i = ||a_i||^2 / 4.
/// Keeps a reference to the dataset, which must outlive the problem.
class LogRegProblem final : public FiniteSumProblem {
 public:
  explicit LogRegProblem(const Dataset& data);

  std::size_t num_components() const override { return data_.num_rows(); }
  std::size_t dimension() const override { return data_.num_features(); }
  double component_value(std::size_t i, ConstVec x) const override;
  void add_component_gradient(std::size_t i, ConstVec x, double scale,
                              MutVec out) const override;
  double component_lipschitz(std::size_t i) const override { return lipschitz_[i]; }

  const Dataset& data() const { return data_; }

 private:
  const Dataset& data_;
  std::vector<double> lipschitz_;
};

struct SparseVector {
  std::vector<std::size_t> indices;
  std::vector<double> values;
};

/// grad f_i(x) = -b_i a_i / (1 + exp(b_i <a_i, x>)), supported on a_i.
SparseVector logreg_gradient(const LogRegProblem& p, std::size_t i, ConstVec x);

}  // namespace seqn
