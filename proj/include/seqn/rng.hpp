#pragma once

#include <cstdint>
#include <random>

namespace seqn {

/// Portable seeded generator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are not portable, so bounded integers
/// (Lemire's multiply-shift rejection), uniform doubles (top 53 bits) and
/// normals (Box-Muller, no caching) are derived here. Any change to these
/// derivations must bump kAlgorithm.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/lemire/bm53-v1";

  explicit Rng(std::uint64_t seed) : engine_{seed} {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace seqn
