#pragma once

#include "seqn/problem.hpp"

namespace seqn {

/// Reduction strategy for full passes over the components.
///
/// serial accumulates in ascending component order and is bit-reproducible.
/// parallel splits the components into contiguous per-thread blocks (OpenMP)
/// and combines the partial sums in thread order; its result depends on the
/// thread count and is excluded from bit-exact guarantees.
enum class Reduction { serial, parallel };

namespace kernels {

void full_gradient_serial(const FiniteSumProblem& p, ConstVec x, MutVec out);
void full_gradient_parallel(const FiniteSumProblem& p, ConstVec x, MutVec out);

double mean_value_serial(const FiniteSumProblem& p, ConstVec x);
double mean_value_parallel(const FiniteSumProblem& p, ConstVec x);

}  // namespace kernels

/// (1/N) sum_i f_i(x)
double smooth_value(const FiniteSumProblem& p, ConstVec x, Reduction mode = Reduction::serial);

/// psi(x) = f(x) + phi(x)
double objective(const CompositeProblem& p, ConstVec x, Reduction mode = Reduction::serial);

}  // namespace seqn
