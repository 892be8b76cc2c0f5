#include "seqn/kernels.hpp"

#include <omp.h>

#include <algorithm>

namespace seqn::kernels {

void full_gradient_serial(const FiniteSumProblem& p, ConstVec x, MutVec out) {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t n = p.num_components();
  for (std::size_t i = 0; i < n; ++i) p.add_component_gradient(i, x, 1.0, out);
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= inv;
}

void full_gradient_parallel(const FiniteSumProblem& p, ConstVec x, MutVec out) {
  const std::size_t n = p.num_components();
  const std::size_t dim = p.dimension();
  const int threads = omp_get_max_threads();
  std::vector<Vector> partial(static_cast<std::size_t>(threads), Vector(dim, 0.0));

#pragma omp parallel num_threads(threads)
  {
    const auto t = static_cast<std::size_t>(omp_get_thread_num());
    const auto nt = static_cast<std::size_t>(omp_get_num_threads());
    const std::size_t lo = n * t / nt;
    const std::size_t hi = n * (t + 1) / nt;
    Vector& acc = partial[t];
    for (std::size_t i = lo; i < hi; ++i) p.add_component_gradient(i, x, 1.0, acc);
  }

  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& acc : partial)
    for (std::size_t j = 0; j < dim; ++j) out[j] += acc[j];
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= inv;
}

double mean_value_serial(const FiniteSumProblem& p, ConstVec x) {
  const std::size_t n = p.num_components();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += p.component_value(i, x);
  return s / static_cast<double>(n);
}

double mean_value_parallel(const FiniteSumProblem& p, ConstVec x) {
  const auto n = static_cast<std::ptrdiff_t>(p.num_components());
  double s = 0.0;
#pragma omp parallel for reduction(+ : s) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) s += p.component_value(static_cast<std::size_t>(i), x);
  return s / static_cast<double>(n);
}

}  // namespace seqn::kernels

namespace seqn {

double smooth_value(const FiniteSumProblem& p, ConstVec x, Reduction mode) {
  return mode == Reduction::parallel ? kernels::mean_value_parallel(p, x)
                                     : kernels::mean_value_serial(p, x);
}

double objective(const CompositeProblem& p, ConstVec x, Reduction mode) {
  return smooth_value(p.smooth, x, mode) + p.regularizer.value(x);
}

}  // namespace seqn
