#pragma once

#include <Eigen/Dense>

#include "rcon/errors.hpp"

namespace rcon {

/// Normalized mean square error |K_hat - K|_F^2 / |K|_F^2.
inline double nmse(const Eigen::MatrixXd& k_hat, const Eigen::MatrixXd& k_true) {
  if (k_hat.rows() != k_true.rows() || k_hat.cols() != k_true.cols()) {
    throw InvalidArgument("nmse: dimension mismatch");
  }
  const double denom = k_true.squaredNorm();
  if (denom == 0.0) throw InvalidArgument("nmse: true matrix is zero");
  return (k_hat - k_true).squaredNorm() / denom;
}

}  // namespace rcon
