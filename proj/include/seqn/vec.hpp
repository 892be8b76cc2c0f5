#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqn {

using Vector = std::vector<double>;
using ConstVec = std::span<const double>;
using MutVec = std::span<double>;

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
  }
}

inline double dot(ConstVec a, ConstVec b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2_sq(ConstVec a) { return dot(a, a); }
inline double norm2(ConstVec a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(ConstVec a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// y += alpha * x
inline void axpy(double alpha, ConstVec x, MutVec y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vector sub(ConstVec a, ConstVec b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline double dist_sq(ConstVec a, ConstVec b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline bool all_finite(ConstVec a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

inline std::size_t nnz(ConstVec x) {
  std::size_t c = 0;
  for (double v : x)
    if (v != 0.0) ++c;
  return c;
}

}  // namespace seqn
