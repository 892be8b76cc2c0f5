#include "seqn/prox.hpp"

#include <cmath>
#include <stdexcept>

namespace seqn {

ScaledMetric::ScaledMetric(double lambda) : lambda_{lambda} {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("ScaledMetric: lambda must be positive and finite");
}

Vector ProxFunction::prox(const ScaledMetric& metric, ConstVec x) const {
  Vector out(x.size());
  prox(metric, x, out);
  return out;
}

void ZeroFunction::prox(const ScaledMetric&, ConstVec x, MutVec out) const {
  require_same_size(x.size(), out.size(), "ZeroFunction::prox");
  std::copy(x.begin(), x.end(), out.begin());
}

L1Norm::L1Norm(double mu) : mu_{mu} {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("L1Norm: mu must be nonnegative and finite");
}

double L1Norm::value(ConstVec x) const {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return mu_ * s;
}

void L1Norm::prox(const ScaledMetric& metric, ConstVec x, MutVec out) const {
  require_same_size(x.size(), out.size(), "L1Norm::prox");
  soft_threshold(x, metric.lambda() * mu_, out);
}

CustomL1::CustomL1(double mu, SoftThresholdFn kernel) : mu_{mu}, kernel_{std::move(kernel)} {
  if (!(mu >= 0.0)) throw std::invalid_argument("CustomL1: mu must be nonnegative");
}

double CustomL1::value(ConstVec x) const {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return mu_ * s;
}

void CustomL1::prox(const ScaledMetric& metric, ConstVec x, MutVec out) const {
  kernel_(x, metric.lambda() * mu_, out);
}

void soft_threshold(ConstVec x, double tau, MutVec out) {
  require_same_size(x.size(), out.size(), "soft_threshold");
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi > tau)
      out[i] = xi - tau;
    else if (xi < -tau)
      out[i] = xi + tau;
    else
      out[i] = 0.0;
  }
}

Vector soft_threshold(ConstVec x, double tau) {
  Vector out(x.size());
  soft_threshold(x, tau, out);
  return out;
}

void residual(ConstVec x, ConstVec v, const ScaledMetric& metric, const ProxFunction& phi,
              MutVec out) {
  require_same_size(x.size(), v.size(), "residual");
  require_same_size(x.size(), out.size(), "residual");
  const double lambda = metric.lambda();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - lambda * v[i];
  Vector p(x.size());
  phi.prox(metric, out, p);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - p[i];
}

Vector residual(ConstVec x, ConstVec v, const ScaledMetric& metric, const ProxFunction& phi) {
  Vector out(x.size());
  residual(x, v, metric, phi, out);
  return out;
}

double moreau_envelope(ConstVec x, const ScaledMetric& metric, const L1Norm& phi) {
  const double lambda = metric.lambda();
  const double mu = phi.mu();
  const double kink = lambda * mu;
  double s = 0.0;
  for (double t : x) {
    const double a = std::abs(t);
    s += (a <= kink) ? t * t / (2.0 * lambda) : mu * a - 0.5 * lambda * mu * mu;
  }
  return s;
}

Vector moreau_envelope_gradient(ConstVec x, const ScaledMetric& metric, const L1Norm& phi) {
  Vector p = phi.prox(metric, x);
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = (x[i] - p[i]) / metric.lambda();
  return p;
}

std::vector<double> residual_scaling_check(ConstVec x, ConstVec v, const ProxFunction& phi,
                                           const std::vector<double>& deltas) {
  std::vector<double> out;
  out.reserve(deltas.size());
  for (double delta : deltas) {
    const ScaledMetric metric{delta};
    out.push_back(norm2(residual(x, v, metric, phi)) / delta);
  }
  return out;
}

}  // namespace seqn
