#pragma once

#include "richspec/spectral_core.hpp"

#include <Eigen/Dense>

#include <random>
#include <string>

namespace testing {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& g, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd M(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) M(i, j) = n(g);
  }
  return M;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& g, Eigen::Index n) {
  return random_matrix(g, n, 1).col(0);
}

inline Eigen::MatrixXd centered(const Eigen::MatrixXd& X) {
  return X.rowwise() - X.colwise().mean();
}

inline Eigen::VectorXd centered(const Eigen::VectorXd& y) {
  return (y.array() - y.mean()).matrix();
}

inline double max_abs(const Eigen::MatrixXd& A) { return A.cwiseAbs().maxCoeff(); }

}  // namespace testing
