#include "seqn/problem.hpp"

#include <algorithm>
#include <stdexcept>

namespace seqn {

Vector FiniteSumProblem::component_gradient(std::size_t i, ConstVec x) const {
  Vector g(dimension(), 0.0);
  add_component_gradient(i, x, 1.0, g);
  return g;
}

double FiniteSumProblem::lipschitz_uniform() const { return lipschitz_uniform_; }
double FiniteSumProblem::lipschitz_avg() const { return lipschitz_avg_; }

void FiniteSumProblem::init_lipschitz() {
  const std::size_t n = num_components();
  double mx = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double li = component_lipschitz(i);
    mx = std::max(mx, li);
    sum += li;
  }
  lipschitz_uniform_ = std::max(1.0, mx);
  lipschitz_avg_ = std::max(1.0, n ? sum / static_cast<double>(n) : 0.0);
}

LeastSquaresProblem::LeastSquaresProblem(std::vector<Vector> rows, Vector targets)
    : rows_{std::move(rows)}, targets_{std::move(targets)}, dim_{0} {
  if (rows_.empty()) throw std::invalid_argument("LeastSquaresProblem: no rows");
  require_same_size(rows_.size(), targets_.size(), "LeastSquaresProblem targets");
  dim_ = rows_.front().size();
  for (const auto& r : rows_) require_same_size(r.size(), dim_, "LeastSquaresProblem row");
  init_lipschitz();
}

double LeastSquaresProblem::component_value(std::size_t i, ConstVec x) const {
  const double r = dot(rows_[i], x) - targets_[i];
  return 0.5 * r * r;
}

void LeastSquaresProblem::add_component_gradient(std::size_t i, ConstVec x, double scale,
                                                 MutVec out) const {
  const double r = dot(rows_[i], x) - targets_[i];
  axpy(scale * r, rows_[i], out);
}

double LeastSquaresProblem::component_lipschitz(std::size_t i) const {
  return norm2_sq(rows_[i]);
}

}  // namespace seqn
