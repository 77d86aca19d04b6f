#pragma once

// Maximum likelihood for RCON models by Fisher scoring. The per-observation
// log-likelihood is <theta, ybar> - psi(theta), so the score is ybar - mu and
// the expected information is F.

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "rcon/model.hpp"

namespace rcon {

struct MleResult {
  Eigen::VectorXd theta_hat;
  int iterations = 0;
  bool converged = false;
  double final_gradient_norm = 0.0;     // max-norm of ybar - mu(theta_hat)
  std::vector<double> log_likelihood;   // per observation, at the start and after each iteration
};

/// Per-observation log-likelihood <theta, ybar> + log|K(theta)| / 2, or
/// -infinity outside the cone.
double mle_log_likelihood(const RconSpec& spec, const SampleStats& stats, const Eigen::VectorXd& theta);

/// Fisher scoring from theta_init (default: vertex classes 1, edge classes 0)
/// with up to 30 step halvings per iteration, keeping K in the cone and the
/// likelihood non-decreasing. Stops when |ybar - mu|_inf <= tol. Throws
/// NumericalError when F is singular, NotPositiveDefinite for a bad start.
MleResult fit_mle(const RconSpec& spec, const SampleStats& stats,
                  const std::optional<Eigen::VectorXd>& theta_init = std::nullopt, double tol = 1e-8,
                  int max_iter = 200);

}  // namespace rcon
