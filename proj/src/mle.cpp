#include "rcon/mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rcon/errors.hpp"
#include "rcon/linalg.hpp"

namespace rcon {

namespace {

constexpr int kMaxHalvings = 30;

}  // namespace

double mle_log_likelihood(const RconSpec& spec, const SampleStats& stats, const Eigen::VectorXd& theta) {
  auto llt = linalg::cholesky(k_of_theta(spec, theta));
  if (!llt) return -std::numeric_limits<double>::infinity();
  return theta.dot(stats.ybar) + 0.5 * linalg::log_det(*llt);
}

MleResult fit_mle(const RconSpec& spec, const SampleStats& stats, const std::optional<Eigen::VectorXd>& theta_init,
                  double tol, int max_iter) {
  if (stats.ybar.size() != spec.num_params()) {
    throw InvalidArgument("fit_mle: statistics do not match the model");
  }
  if (max_iter < 0) throw InvalidArgument("fit_mle: max_iter must be non-negative");
  MleResult res;
  if (theta_init) {
    res.theta_hat = *theta_init;
  } else {
    res.theta_hat = Eigen::VectorXd::Zero(spec.num_params());
    res.theta_hat.head(spec.num_vertex_classes()).setOnes();
  }
  double ll = mle_log_likelihood(spec, stats, res.theta_hat);
  if (!std::isfinite(ll)) throw NotPositiveDefinite("fit_mle: initial theta outside the cone");
  res.log_likelihood.push_back(ll);

  Cumulant c = cumulant(spec, res.theta_hat);
  Eigen::VectorXd score = stats.ybar - c.mu;
  res.final_gradient_norm = score.size() ? score.cwiseAbs().maxCoeff() : 0.0;
  while (res.final_gradient_norm > tol && res.iterations < max_iter) {
    Eigen::LLT<Eigen::MatrixXd> f_llt(c.fisher);
    if (f_llt.info() != Eigen::Success) throw NumericalError("fit_mle: Fisher information is singular");
    const Eigen::VectorXd direction = f_llt.solve(score);
    if (!direction.allFinite()) throw NumericalError("fit_mle: Fisher information is singular");

    double step = 1.0;
    bool moved = false;
    for (int h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
      Eigen::VectorXd candidate = res.theta_hat + step * direction;
      const double cand_ll = mle_log_likelihood(spec, stats, candidate);
      // Near the optimum likelihood changes drop below rounding; allow a
      // few ulps so a correct Newton step is not rejected.
      const double slack = 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(ll));
      if (std::isfinite(cand_ll) && cand_ll >= ll - slack) {
        res.theta_hat = std::move(candidate);
        ll = cand_ll;
        moved = true;
        break;
      }
    }
    ++res.iterations;
    if (!moved) break;
    res.log_likelihood.push_back(ll);
    c = cumulant(spec, res.theta_hat);
    score = stats.ybar - c.mu;
    res.final_gradient_norm = score.cwiseAbs().maxCoeff();
  }
  res.converged = res.final_gradient_norm <= tol;
  if (res.converged && res.final_gradient_norm > 0.0) {
    // Scoring converges quadratically; one more step takes the estimate
    // from tol to rounding level.
    Eigen::LLT<Eigen::MatrixXd> f_llt(c.fisher);
    if (f_llt.info() == Eigen::Success) {
      Eigen::VectorXd candidate = res.theta_hat + f_llt.solve(score);
      if (std::isfinite(mle_log_likelihood(spec, stats, candidate))) {
        const Eigen::VectorXd g = stats.ybar - cumulant(spec, candidate).mu;
        if (g.cwiseAbs().maxCoeff() < res.final_gradient_norm) {
          res.theta_hat = std::move(candidate);
          res.final_gradient_norm = g.cwiseAbs().maxCoeff();
          res.log_likelihood.push_back(mle_log_likelihood(spec, stats, res.theta_hat));
        }
      }
    }
  }
  return res;
}

}  // namespace rcon
