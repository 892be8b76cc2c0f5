#pragma once

#include <cstddef>
#include <vector>

#include "seqn/kernels.hpp"
#include "seqn/problem.hpp"
#include "seqn/rng.hpp"

namespace seqn {

/// Distinct component ids in [0, N), stored in ascending order so that
/// mini-batch sums accumulate deterministically.
struct SampleSet {
  std::vector<std::size_t> indices;
  std::size_t size() const { return indices.size(); }
};

/// Uniform b-subset of [0, n). Sparse partial Fisher-Yates for b <= n/2,
/// otherwise the excluded n-b ids are drawn and the complement returned.
SampleSet sample_without_replacement(Rng& rng, std::size_t n, std::size_t b);

SampleSet all_components(std::size_t n);

/// Mean of the component gradients; throws naming the first component whose
/// gradient is not finite.
Vector full_gradient(const FiniteSumProblem& p, ConstVec x, Reduction mode = Reduction::serial);

Vector minibatch_gradient(const FiniteSumProblem& p, ConstVec x, const SampleSet& s);

/// SVRG anchor: x_tilde and grad f(x_tilde), fixed at creation.
struct SvrgSnapshot {
  Vector anchor;
  Vector anchor_gradient;

  static SvrgSnapshot take(const FiniteSumProblem& p, ConstVec x,
                           Reduction mode = Reduction::serial);
};

/// grad f_S(x) - grad f_S(x_tilde) + grad f(x_tilde)
Vector svrg_gradient(const FiniteSumProblem& p, ConstVec x, const SampleSet& s,
                     const SvrgSnapshot& snap);

enum class OracleKind { minibatch, svrg };

/// Stochastic oracle V(point, xi) with the randomness xi = s held fixed, so the
/// same sample set can be evaluated at a second point. Deterministic in its
/// arguments.
Vector oracle_at(OracleKind kind, const FiniteSumProblem& p, ConstVec point, const SampleSet& s,
                 const SvrgSnapshot* snap);

/// max_{i in s} L_i, the Lipschitz modulus of point -> oracle_at(., s).
double sample_lipschitz(const FiniteSumProblem& p, const SampleSet& s);

}  // namespace seqn
