#pragma once

// Asymptotic covariance of sqrt(n) (theta_tilde - theta0) for the
// distributed estimator. Each local estimate is asymptotically
// F_i^{-1} times the mean local score; scores of overlapping local models
// are correlated, with joint fourth moments from Isserlis' theorem.

#include <Eigen/Dense>
#include <vector>

#include "rcon/distributed.hpp"
#include "rcon/graph.hpp"

namespace rcon {

struct AsymptoticCov {
  Eigen::MatrixXd gbar;          // n Cov(theta_bar), blocks F_i^{-1} C_ik F_k^{-1}
  Eigen::MatrixXd jac;           // combiner weights
  Eigen::MatrixXd a;             // jac * gbar * jac^T
  Eigen::MatrixXd score_cov;     // C: per-observation covariance of the stacked local statistics
  Eigen::VectorXd theta0_bar;    // stacked local truths
  std::vector<LocalModel> models;
};

/// Throws NotPositiveDefinite when K(theta0) is outside the cone.
AsymptoticCov asymptotic_cov(const ColouredGraph& g, const Eigen::VectorXd& theta0, int hops, CombineMode mode);

}  // namespace rcon
