#pragma once

#include <functional>
#include <string>

#include "seqn/vec.hpp"

namespace seqn {

/// Scaled-identity metric Lambda = lambda^{-1} I. Larger lambda means a longer step.
class ScaledMetric {
 public:
  explicit ScaledMetric(double lambda);
  double lambda() const { return lambda_; }

 private:
  double lambda_;
};

/// Convex, prox-friendly regularizer phi.
///
/// prox(metric, x) returns argmin_y phi(y) + ||x - y||^2 / (2 lambda).
class ProxFunction {
 public:
  virtual ~ProxFunction() = default;
  virtual double value(ConstVec x) const = 0;
  virtual void prox(const ScaledMetric& metric, ConstVec x, MutVec out) const = 0;
  virtual std::string name() const = 0;

  Vector prox(const ScaledMetric& metric, ConstVec x) const;
};

class ZeroFunction final : public ProxFunction {
 public:
  double value(ConstVec) const override { return 0.0; }
  void prox(const ScaledMetric& metric, ConstVec x, MutVec out) const override;
  std::string name() const override { return "zero"; }
  using ProxFunction::prox;
};

/// phi(x) = mu * ||x||_1; the prox is soft-thresholding at lambda * mu.
class L1Norm final : public ProxFunction {
 public:
  explicit L1Norm(double mu);
  double mu() const { return mu_; }
  double value(ConstVec x) const override;
  void prox(const ScaledMetric& metric, ConstVec x, MutVec out) const override;
  std::string name() const override { return "l1"; }
  using ProxFunction::prox;

 private:
  double mu_;
};

/// Soft-threshold kernel signature; lets test harnesses inject alternative
/// (e.g. deliberately broken) implementations.
using SoftThresholdFn = std::function<void(ConstVec x, double tau, MutVec out)>;

/// L1Norm variant whose shrinkage is delegated to a caller-supplied kernel.
class CustomL1 final : public ProxFunction {
 public:
  CustomL1(double mu, SoftThresholdFn kernel);
  double value(ConstVec x) const override;
  void prox(const ScaledMetric& metric, ConstVec x, MutVec out) const override;
  std::string name() const override { return "l1-custom"; }
  using ProxFunction::prox;

 private:
  double mu_;
  SoftThresholdFn kernel_;
};

// out_i = sign(x_i) * max(|x_i| - tau, 0), with exact zeros.
void soft_threshold(ConstVec x, double tau, MutVec out);
Vector soft_threshold(ConstVec x, double tau);

/// Inexact natural residual F_v(x) = x - prox(x - lambda v).
void residual(ConstVec x, ConstVec v, const ScaledMetric& metric, const ProxFunction& phi,
              MutVec out);
Vector residual(ConstVec x, ConstVec v, const ScaledMetric& metric, const ProxFunction& phi);

/// Moreau envelope of mu*||.||_1 (Huber form), and its gradient (x - prox(x)) / lambda.
double moreau_envelope(ConstVec x, const ScaledMetric& metric, const L1Norm& phi);
Vector moreau_envelope_gradient(ConstVec x, const ScaledMetric& metric, const L1Norm& phi);

/// For each delta (ascending), returns ||F_v(x)|| / delta with the metric lambda = delta.
/// The sequence is nonincreasing for any convex phi.
std::vector<double> residual_scaling_check(ConstVec x, ConstVec v, const ProxFunction& phi,
                                           const std::vector<double>& deltas);

}  // namespace seqn
