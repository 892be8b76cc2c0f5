#include "seqn/directions.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace seqn {

namespace {

struct PairView {
  ConstVec u;
  ConstVec y;
  double uy;
};

// W r via the two-loop recursion; pairs ordered oldest first.
Vector two_loop(const std::vector<PairView>& pairs, double gamma, ConstVec r) {
  Vector q(r.begin(), r.end());
  std::vector<double> a(pairs.size());
  for (std::size_t k = pairs.size(); k-- > 0;) {
    const auto& pr = pairs[k];
    a[k] = dot(pr.u, q) / pr.uy;
    axpy(-a[k], pr.y, q);
  }
  for (double& v : q) v *= gamma;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& pr = pairs[k];
    const double b = dot(pr.y, q) / pr.uy;
    axpy(a[k] - b, pr.u, q);
  }
  return q;
}

double gamma_of(const PairView& newest) {
  const double yy = dot(newest.y, newest.y);
  if (!(yy >= kDenominatorFloor)) return 1.0;
  return newest.uy / yy;
}

}  // namespace

CurvatureBuffer::CurvatureBuffer(std::size_t memory, double delta)
    : memory_{memory}, delta_{delta} {
  if (memory == 0) throw std::invalid_argument("CurvatureBuffer: memory must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("CurvatureBuffer: delta must be positive");
}

bool CurvatureBuffer::try_push(ConstVec u, ConstVec y) {
  require_same_size(u.size(), y.size(), "CurvatureBuffer::try_push");
  const double uu = dot(u, u);
  if (uu == 0.0) return false;  // the test is vacuous and rho would be undefined
  const double uy = dot(u, y);
  if (!(uy >= delta_ * uu)) return false;
  if (!(uy >= kDenominatorFloor) || !(dot(y, y) >= kDenominatorFloor)) return false;
  if (pairs_.size() == memory_) pairs_.pop_front();
  pairs_.push_back(CurvaturePair{Vector(u.begin(), u.end()), Vector(y.begin(), y.end()), uy});
  return true;
}

double lbfgs_gamma(const CurvatureBuffer& buffer) {
  if (buffer.empty()) return 1.0;
  const auto& p = buffer.pairs().back();
  return gamma_of(PairView{p.u, p.y, p.uy});
}

Vector lbfgs_apply(const CurvatureBuffer& buffer, ConstVec r) {
  if (buffer.empty()) return Vector(r.begin(), r.end());
  std::vector<PairView> views;
  views.reserve(buffer.size());
  for (const auto& p : buffer.pairs()) {
    require_same_size(p.u.size(), r.size(), "lbfgs_apply");
    views.push_back(PairView{p.u, p.y, p.uy});
  }
  return two_loop(views, gamma_of(views.back()), r);
}

CoordinatePartition coordinate_partition(ConstVec residual, double delta2, double zeta) {
  if (!(delta2 > 0.0)) throw std::invalid_argument("coordinate_partition: delta2 must be > 0");
  CoordinatePartition part;
  part.zeta = zeta;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    if (std::abs(residual[i]) >= delta2)
      part.active.push_back(i);
    else
      part.complement.push_back(i);
  }
  return part;
}

Vector coord_lbfgs_apply(const CurvatureBuffer& buffer, const CoordinatePartition& partition,
                         ConstVec residual, double delta1) {
  const auto& act = partition.active;
  if (act.empty() || buffer.empty()) return lbfgs_apply(buffer, residual);

  const std::size_t m = act.size();
  std::vector<Vector> us;
  std::vector<Vector> ys;
  std::vector<double> uys;
  for (const auto& p : buffer.pairs()) {
    Vector ub(m), yb(m);
    for (std::size_t j = 0; j < m; ++j) {
      ub[j] = p.u[act[j]];
      yb[j] = p.y[act[j]];
    }
    const double uy = dot(ub, yb);
    if (!(std::abs(uy) >= delta1 * dot(p.u, p.u))) continue;
    if (!(std::abs(uy) >= kDenominatorFloor) || !(dot(yb, yb) >= kDenominatorFloor)) continue;
    us.push_back(std::move(ub));
    ys.push_back(std::move(yb));
    uys.push_back(uy);
  }
  if (us.empty()) return lbfgs_apply(buffer, residual);

  std::vector<PairView> views;
  views.reserve(us.size());
  for (std::size_t k = 0; k < us.size(); ++k) views.push_back(PairView{us[k], ys[k], uys[k]});

  Vector rb(m);
  for (std::size_t j = 0; j < m; ++j) rb[j] = residual[act[j]];
  const Vector wb = two_loop(views, gamma_of(views.back()), rb);

  Vector out(residual.size());
  for (std::size_t i : partition.complement) out[i] = partition.zeta * residual[i];
  for (std::size_t j = 0; j < m; ++j) out[act[j]] = wb[j];
  return out;
}

namespace {

// The bound without the overflow warning; generators cache it once.
double bound_value(std::size_t p, double delta1, double ell_bar, double zeta_bar) {
  if (!(delta1 > 0.0) || !(ell_bar >= 0.0) || !(zeta_bar > 0.0))
    throw std::invalid_argument("nu_bar_bound: arguments must be positive");
  const double base = (2.0 + ell_bar + delta1) / delta1;
  const double expo = 2.0 * static_cast<double>(p + 2);
  const double bound = (std::pow(base, expo) - 1.0) / (2.0 + ell_bar);
  if (!std::isfinite(bound)) return std::numeric_limits<double>::infinity();
  return std::max(zeta_bar, bound);
}

}  // namespace

double nu_bar_bound(std::size_t p, double delta1, double ell_bar, double zeta_bar) {
  const double v = bound_value(p, delta1, ell_bar, zeta_bar);
  if (std::isinf(v))
    std::clog << "warning: nu_bar_bound overflows double (p=" << p << ", delta1=" << delta1
              << ", ell_bar=" << ell_bar << "); returning +inf\n";
  return v;
}

Vector IdentityDirection::apply(ConstVec residual) const {
  return Vector(residual.begin(), residual.end());
}

LbfgsDirection::LbfgsDirection(std::size_t memory, double delta, double ell_bar)
    : buffer_{memory, delta}, certificate_{bound_value(memory, delta, ell_bar, 1.0)} {}

Vector LbfgsDirection::apply(ConstVec residual) const { return lbfgs_apply(buffer_, residual); }

void LbfgsDirection::notify_pair(ConstVec u, ConstVec y) {
  if (!buffer_.try_push(u, y)) ++rejected_;
}


CoordLbfgsDirection::CoordLbfgsDirection(std::size_t memory, double delta, double ell_bar,
                                         double delta1, double delta2, double zeta)
    : buffer_{memory, delta}, delta1_{delta1}, delta2_{delta2}, zeta_{zeta} {
  if (!(zeta > 0.0)) throw std::invalid_argument("CoordLbfgsDirection: zeta must be positive");
  // Restricted pairs are filtered with delta1; the full-space fallback uses delta.
  certificate_ = std::max(bound_value(memory, delta1, ell_bar, zeta),
                          bound_value(memory, delta, ell_bar, zeta));
}

Vector CoordLbfgsDirection::apply(ConstVec residual) const {
  return coord_lbfgs_apply(buffer_, coordinate_partition(residual, delta2_, zeta_), residual,
                           delta1_);
}

void CoordLbfgsDirection::notify_pair(ConstVec u, ConstVec y) { buffer_.try_push(u, y); }

Vector direction(const DirectionGenerator& generator, ConstVec residual) {
  Vector d = generator.apply(residual);
  for (double& v : d) v = -v;
  if (!all_finite(d))
    throw std::runtime_error("direction: non-finite output from generator '" + generator.name() +
                             "'");
  const double bound = generator.certificate_bound();
  const double rn = norm2(residual);
  if (norm2(d) > bound * rn * (1.0 + 1e-12) + 1e-300)
    throw std::logic_error("direction: generator '" + generator.name() +
                           "' exceeded its norm certificate");
  return d;
}

}  // namespace seqn
