#pragma once

#include <cstddef>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "seqn/dataio.hpp"
#include "seqn/directions.hpp"
#include "seqn/logreg.hpp"
#include "seqn/problem.hpp"
#include "seqn/rng.hpp"
#include "seqn/vec.hpp"

namespace seqn::test {

inline Vector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (double& e : v) e = scale * rng.normal();
  return v;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

inline Eigen::VectorXd to_eigen(ConstVec v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// W_{i+1} = (I - rho u y^T) W_i (I - rho y u^T) + rho u u^T, W_0 = gamma I, oldest pair first.
inline Eigen::MatrixXd dense_bfgs(const std::vector<Eigen::VectorXd>& us,
                                  const std::vector<Eigen::VectorXd>& ys, Eigen::Index n) {
  Eigen::MatrixXd W = Eigen::MatrixXd::Identity(n, n);
  if (us.empty()) return W;
  W *= us.back().dot(ys.back()) / ys.back().dot(ys.back());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t k = 0; k < us.size(); ++k) {
    const double rho = 1.0 / us[k].dot(ys[k]);
    const Eigen::MatrixXd V = I - rho * ys[k] * us[k].transpose();
    W = V.transpose() * W * V + rho * us[k] * us[k].transpose();
  }
  return W;
}

inline Eigen::MatrixXd dense_bfgs(const CurvatureBuffer& buf, Eigen::Index n) {
  std::vector<Eigen::VectorXd> us, ys;
  for (const auto& p : buf.pairs()) {
    us.push_back(to_eigen(p.u));
    ys.push_back(to_eigen(p.y));
  }
  return dense_bfgs(us, ys, n);
}

// Block matrix diag(W_II, zeta I_A) with W_II built from the restricted pairs that pass
// |<u_I, y_I>| >= delta1 ||u||^2. Falls back to the full matrix when nothing qualifies.
inline Eigen::MatrixXd dense_coord_bfgs(const CurvatureBuffer& buf, const CoordinatePartition& part,
                                        double delta1, Eigen::Index n) {
  const auto m = static_cast<Eigen::Index>(part.active.size());
  std::vector<Eigen::VectorXd> us, ys;
  for (const auto& p : buf.pairs()) {
    Eigen::VectorXd ub(m), yb(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      ub[j] = p.u[part.active[static_cast<std::size_t>(j)]];
      yb[j] = p.y[part.active[static_cast<std::size_t>(j)]];
    }
    if (std::abs(ub.dot(yb)) >= delta1 * to_eigen(p.u).squaredNorm()) {
      us.push_back(ub);
      ys.push_back(yb);
    }
  }
  if (m == 0 || us.empty()) return dense_bfgs(buf, n);
  const Eigen::MatrixXd Wii = dense_bfgs(us, ys, m);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b)
      W(static_cast<Eigen::Index>(part.active[a]), static_cast<Eigen::Index>(part.active[b])) =
          Wii(a, b);
  for (std::size_t i : part.complement)
    W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = part.zeta;
  return W;
}

inline double spectral_norm(const Eigen::MatrixXd& W) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
  return svd.singularValues()(0);
}

// Pairs y = H u + noise with H symmetric positive definite, so most pass the curvature test.
inline CurvatureBuffer random_buffer(Rng& rng, std::size_t n, std::size_t p) {
  CurvatureBuffer buf(p);
  Eigen::MatrixXd B(n, n);
  for (Eigen::Index i = 0; i < B.rows(); ++i)
    for (Eigen::Index j = 0; j < B.cols(); ++j) B(i, j) = rng.normal();
  const Eigen::MatrixXd H =
      B.transpose() * B / static_cast<double>(n) + 0.1 * Eigen::MatrixXd::Identity(n, n);
  std::size_t guard = 0;
  while (buf.size() < p && guard++ < 100 * p) {
    const Vector u = random_vector(rng, n);
    const Eigen::VectorXd yu = H * to_eigen(u);
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = yu[static_cast<Eigen::Index>(i)] + 0.3 * rng.normal();
    buf.try_push(u, y);
  }
  return buf;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           (tag + "-" + std::to_string(std::rand()) + "-" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// l1-regularized logistic regression on planted synthetic data.
struct LogRegToy {
  Dataset data;
  LogRegProblem smooth;
  L1Norm phi;
  LogRegToy(const SyntheticSpec& spec, std::uint64_t seed, double mu)
      : data{make(spec, seed)}, smooth{data}, phi{mu} {}
  CompositeProblem problem() const { return CompositeProblem{smooth, phi}; }
  Vector zeros() const { return Vector(data.num_features(), 0.0); }

 private:
  static Dataset make(const SyntheticSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    return make_synthetic(spec, rng);
  }
};

inline SyntheticSpec toy_spec(std::size_t rows, std::size_t features) {
  SyntheticSpec s;
  s.rows = rows;
  s.features = features;
  return s;
}

}  // namespace seqn::test
