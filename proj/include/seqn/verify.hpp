#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqn/prox.hpp"

namespace seqn {

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::size_t cases = 0;  // 0 uses each suite's default count
  /// Shrinkage used by the prox suite; empty means the library soft_threshold.
  SoftThresholdFn soft_threshold;
};

struct SuiteReport {
  std::string suite;
  std::size_t cases = 0;
  std::size_t violations = 0;
  std::string property;           // first violated property
  nlohmann::json counterexample;  // replayable instance, null if none
  bool passed() const { return violations == 0; }
};

/// prox, oracles, lbfgs, descent, pointdiff
const std::vector<std::string>& suite_names();

SuiteReport run_suite(const std::string& name, const VerifyOptions& options);

}  // namespace seqn
