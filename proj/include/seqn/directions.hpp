#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "seqn/vec.hpp"

namespace seqn {

inline constexpr double kDefaultCurvatureDelta = 1e-4;   // delta in <u,y> >= delta ||u||^2
inline constexpr double kDefaultCoordDelta1 = 1e-4;      // delta_1 of the restricted pair test
inline constexpr double kDefaultCoordDelta2 = 1e-6;      // active-set threshold on |F_i|
inline constexpr std::size_t kDefaultMemory = 10;
inline constexpr double kDenominatorFloor = 1e-300;

struct CurvaturePair {
  Vector u;  // z - x
  Vector y;  // F_z - F_x
  double uy; // <u, y>
};

/// FIFO of at most `memory` accepted curvature pairs, oldest first.
class CurvatureBuffer {
 public:
  explicit CurvatureBuffer(std::size_t memory = kDefaultMemory,
                           double delta = kDefaultCurvatureDelta);

  /// Appends (u, y) iff u != 0 and <u, y> >= delta ||u||^2; evicts the oldest
  /// pair when full. Returns whether the pair was stored.
  bool try_push(ConstVec u, ConstVec y);

  void clear() { pairs_.clear(); }
  bool empty() const { return pairs_.empty(); }
  std::size_t size() const { return pairs_.size(); }
  std::size_t memory() const { return memory_; }
  double delta() const { return delta_; }
  const std::deque<CurvaturePair>& pairs() const { return pairs_; }

 private:
  std::size_t memory_;
  double delta_;
  std::deque<CurvaturePair> pairs_;
};

/// <u,y>/<y,y> of the newest pair; 1 on an empty buffer.
double lbfgs_gamma(const CurvatureBuffer& buffer);

/// W r for the L-BFGS inverse recursion with W^0 = gamma I (two-loop, O(p n)).
Vector lbfgs_apply(const CurvatureBuffer& buffer, ConstVec r);

struct CoordinatePartition {
  std::vector<std::size_t> active;      // I
  std::vector<std::size_t> complement;  // A
  double zeta = 1.0;
};

/// I = {i : |r_i| >= delta2}, A = complement.
CoordinatePartition coordinate_partition(ConstVec residual, double delta2, double zeta = 1.0);

/// Block direction: zeta * r on A and W_II r_I on I, where W_II runs the
/// recursion on the restricted pairs with |<u_I, y_I>| >= delta1 ||u||^2.
/// Falls back to lbfgs_apply when I or the qualifying pair set is empty.
Vector coord_lbfgs_apply(const CurvatureBuffer& buffer, const CoordinatePartition& partition,
                         ConstVec residual, double delta1 = kDefaultCoordDelta1);

/// Operator-norm certificate for L-BFGS type matrices built from pairs with
/// ||y|| <= (2 + ell_bar) ||u|| and curvature constant delta1:
///   max(zeta_bar, ((( 2 + ell_bar + delta1) / delta1)^(2(p+2)) - 1) / (2 + ell_bar)).
/// Returns +inf (and logs a warning) on overflow.
double nu_bar_bound(std::size_t p, double delta1, double ell_bar, double zeta_bar);

/// Generator of d = -W r. apply() returns W r.
class DirectionGenerator {
 public:
  virtual ~DirectionGenerator() = default;
  virtual Vector apply(ConstVec residual) const = 0;
  virtual void notify_pair(ConstVec u, ConstVec y) = 0;
  virtual double certificate_bound() const = 0;
  virtual bool uses_pairs() const = 0;
  virtual void reset() = 0;
  virtual std::string name() const = 0;
};

class IdentityDirection final : public DirectionGenerator {
 public:
  Vector apply(ConstVec residual) const override;
  void notify_pair(ConstVec, ConstVec) override {}
  double certificate_bound() const override { return 1.0; }
  bool uses_pairs() const override { return false; }
  void reset() override {}
  std::string name() const override { return "identity"; }
};

class LbfgsDirection final : public DirectionGenerator {
 public:
  /// ell_bar bounds lambda * L(xi) over the run; it only enters the certificate.
  LbfgsDirection(std::size_t memory, double delta, double ell_bar);

  Vector apply(ConstVec residual) const override;
  void notify_pair(ConstVec u, ConstVec y) override;
  double certificate_bound() const override { return certificate_; }
  bool uses_pairs() const override { return true; }
  void reset() override { buffer_.clear(); }
  std::string name() const override { return "lbfgs"; }

  const CurvatureBuffer& buffer() const { return buffer_; }
  std::size_t rejected_pairs() const { return rejected_; }

 private:
  CurvatureBuffer buffer_;
  double certificate_;
  std::size_t rejected_ = 0;
};

class CoordLbfgsDirection final : public DirectionGenerator {
 public:
  CoordLbfgsDirection(std::size_t memory, double delta, double ell_bar,
                      double delta1 = kDefaultCoordDelta1, double delta2 = kDefaultCoordDelta2,
                      double zeta = 1.0);

  Vector apply(ConstVec residual) const override;
  void notify_pair(ConstVec u, ConstVec y) override;
  double certificate_bound() const override { return certificate_; }
  bool uses_pairs() const override { return true; }
  void reset() override { buffer_.clear(); }
  std::string name() const override { return "coord-lbfgs"; }

  const CurvatureBuffer& buffer() const { return buffer_; }

 private:
  CurvatureBuffer buffer_;
  double delta1_;
  double delta2_;
  double zeta_;
  double certificate_ = 0.0;
};

/// d = -W r. Throws if d is not finite or violates ||d|| <= certificate * ||r||.
Vector direction(const DirectionGenerator& generator, ConstVec residual);

}  // namespace seqn
