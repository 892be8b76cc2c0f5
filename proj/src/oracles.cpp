#include "seqn/oracles.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace seqn {

namespace {

// First k entries of a virtual random permutation of [0, n), touching O(k) memory.
std::vector<std::size_t> partial_fisher_yates(Rng& rng, std::size_t n, std::size_t k) {
  std::unordered_map<std::size_t, std::size_t> swapped;
  swapped.reserve(2 * k);
  auto at = [&](std::size_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
    const std::size_t vi = at(i);
    const std::size_t vj = at(j);
    out[i] = vj;
    swapped[j] = vi;
  }
  return out;
}

void check_sample(const SampleSet& s, std::size_t n, const char* who) {
  if (s.indices.empty()) throw std::invalid_argument(std::string(who) + ": empty sample set");
  for (std::size_t i : s.indices)
    if (i >= n) throw std::out_of_range(std::string(who) + ": component id out of range");
}

}  // namespace

SampleSet sample_without_replacement(Rng& rng, std::size_t n, std::size_t b) {
  if (b == 0 || b > n)
    throw std::invalid_argument("sample_without_replacement: need 0 < b <= n (b=" +
                                std::to_string(b) + ", n=" + std::to_string(n) + ")");
  SampleSet s;
  if (b == n) {
    s.indices.resize(n);
    std::iota(s.indices.begin(), s.indices.end(), std::size_t{0});
  } else if (2 * b <= n) {
    s.indices = partial_fisher_yates(rng, n, b);
    std::sort(s.indices.begin(), s.indices.end());
  } else {
    auto excluded = partial_fisher_yates(rng, n, n - b);
    std::sort(excluded.begin(), excluded.end());
    s.indices.reserve(b);
    std::size_t e = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (e < excluded.size() && excluded[e] == i) {
        ++e;
        continue;
      }
      s.indices.push_back(i);
    }
  }
  return s;
}

SampleSet all_components(std::size_t n) {
  SampleSet s;
  s.indices.resize(n);
  std::iota(s.indices.begin(), s.indices.end(), std::size_t{0});
  return s;
}

Vector full_gradient(const FiniteSumProblem& p, ConstVec x, Reduction mode) {
  require_same_size(x.size(), p.dimension(), "full_gradient");
  Vector g(p.dimension());
  if (mode == Reduction::parallel)
    kernels::full_gradient_parallel(p, x, g);
  else
    kernels::full_gradient_serial(p, x, g);
  if (!all_finite(g)) {
    for (std::size_t i = 0; i < p.num_components(); ++i) {
      if (!all_finite(p.component_gradient(i, x)))
        throw std::runtime_error("full_gradient: non-finite gradient at component " +
                                 std::to_string(i));
    }
    throw std::runtime_error("full_gradient: non-finite accumulated gradient");
  }
  return g;
}

Vector minibatch_gradient(const FiniteSumProblem& p, ConstVec x, const SampleSet& s) {
  check_sample(s, p.num_components(), "minibatch_gradient");
  Vector g(p.dimension(), 0.0);
  for (std::size_t i : s.indices) p.add_component_gradient(i, x, 1.0, g);
  const double inv = 1.0 / static_cast<double>(s.size());
  for (double& v : g) v *= inv;
  return g;
}

SvrgSnapshot SvrgSnapshot::take(const FiniteSumProblem& p, ConstVec x, Reduction mode) {
  return SvrgSnapshot{Vector(x.begin(), x.end()), full_gradient(p, x, mode)};
}

Vector svrg_gradient(const FiniteSumProblem& p, ConstVec x, const SampleSet& s,
                     const SvrgSnapshot& snap) {
  check_sample(s, p.num_components(), "svrg_gradient");
  require_same_size(snap.anchor.size(), p.dimension(), "svrg_gradient snapshot");
  // Separate accumulators: at x == anchor the two sums are bit-identical and the
  // correction cancels exactly.
  Vector g(p.dimension(), 0.0);
  Vector ga(p.dimension(), 0.0);
  for (std::size_t i : s.indices) {
    p.add_component_gradient(i, x, 1.0, g);
    p.add_component_gradient(i, snap.anchor, 1.0, ga);
  }
  const double inv = 1.0 / static_cast<double>(s.size());
  for (std::size_t j = 0; j < g.size(); ++j)
    g[j] = (g[j] - ga[j]) * inv + snap.anchor_gradient[j];
  return g;
}

Vector oracle_at(OracleKind kind, const FiniteSumProblem& p, ConstVec point, const SampleSet& s,
                 const SvrgSnapshot* snap) {
  if (kind == OracleKind::svrg) {
    if (snap == nullptr) throw std::invalid_argument("oracle_at: svrg oracle needs a snapshot");
    return svrg_gradient(p, point, s, *snap);
  }
  return minibatch_gradient(p, point, s);
}

double sample_lipschitz(const FiniteSumProblem& p, const SampleSet& s) {
  double m = 0.0;
  for (std::size_t i : s.indices) m = std::max(m, p.component_lipschitz(i));
  return m;
}

}  // namespace seqn
