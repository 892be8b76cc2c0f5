#include "seqn/logreg.hpp"

#include <cmath>

namespace seqn {

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

namespace {

// 1 / (1 + exp(t)) evaluated on the stable branch.
double logistic_tail(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

}  // namespace

LogRegProblem::LogRegProblem(const Dataset& data) : data_{data} {
  lipschitz_.resize(data.num_rows());
  for (std::size_t i = 0; i < data.num_rows(); ++i) lipschitz_[i] = data.row_norm_sq(i) / 4.0;
  init_lipschitz();
}

double LogRegProblem::component_value(std::size_t i, ConstVec x) const {
  const double b = data_.row(i).label;
  return softplus(-b * data_.row_dot(i, x));
}

void LogRegProblem::add_component_gradient(std::size_t i, ConstVec x, double scale,
                                           MutVec out) const {
  const RowView r = data_.row(i);
  const double coef = -r.label * logistic_tail(r.label * data_.row_dot(i, x)) * scale;
  for (std::size_t k = 0; k < r.indices.size(); ++k) out[r.indices[k]] += coef * r.values[k];
}

SparseVector logreg_gradient(const LogRegProblem& p, std::size_t i, ConstVec x) {
  const RowView r = p.data().row(i);
  const double coef = -r.label * logistic_tail(r.label * p.data().row_dot(i, x));
  SparseVector g;
  g.indices.assign(r.indices.begin(), r.indices.end());
  g.values.resize(r.values.size());
  for (std::size_t k = 0; k < r.values.size(); ++k) g.values[k] = coef * r.values[k];
  return g;
}

}  // namespace seqn
