#pragma once

#include <cstddef>
#include <vector>

#include "seqn/prox.hpp"
#include "seqn/vec.hpp"

namespace seqn {

/// Finite-sum smooth part f(x) = (1/N) sum_i f_i(x).
///
/// Implementations report a raw per-component Lipschitz constant L_i of
/// grad f_i; the uniform (max) and average constants are floored at 1.
class FiniteSumProblem {
 public:
  virtual ~FiniteSumProblem() = default;

  virtual std::size_t num_components() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual double component_value(std::size_t i, ConstVec x) const = 0;
  /// out += scale * grad f_i(x)
  virtual void add_component_gradient(std::size_t i, ConstVec x, double scale,
                                      MutVec out) const = 0;
  virtual double component_lipschitz(std::size_t i) const = 0;

  Vector component_gradient(std::size_t i, ConstVec x) const;

  /// L = max(1, max_i L_i)
  double lipschitz_uniform() const;
  /// L_f = max(1, mean_i L_i)
  double lipschitz_avg() const;

 protected:
  /// Derived constructors call this once the data is in place.
  void init_lipschitz();

 private:
  double lipschitz_uniform_ = 1.0;
  double lipschitz_avg_ = 1.0;
};

/// Pairing of the smooth finite sum with the nonsmooth regularizer.
struct CompositeProblem {
  const FiniteSumProblem& smooth;
  const ProxFunction& regularizer;
};

/// f_i(x) = 0.5 * (<a_i, x> - t_i)^2 with dense rows; L_i = ||a_i||^2.
class LeastSquaresProblem final : public FiniteSumProblem {
 public:
  LeastSquaresProblem(std::vector<Vector> rows, Vector targets);

  std::size_t num_components() const override { return rows_.size(); }
  std::size_t dimension() const override { return dim_; }
  double component_value(std::size_t i, ConstVec x) const override;
  void add_component_gradient(std::size_t i, ConstVec x, double scale,
                              MutVec out) const override;
  double component_lipschitz(std::size_t i) const override;

  const std::vector<Vector>& rows() const { return rows_; }
  const Vector& targets() const { return targets_; }

 private:
  std::vector<Vector> rows_;
  Vector targets_;
  std::size_t dim_;
};

}  // namespace seqn
