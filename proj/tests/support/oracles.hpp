#pragma once

// Independent reference computations used by unit and acceptance tests.
// Nothing here calls the library routine it is meant to check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "rcon/graph.hpp"
#include "rcon/model.hpp"

namespace rcon::testing {

/// -log|K(theta)|/2 by LU, independent of the Cholesky path in cumulant().
inline double psi_by_lu(const RconSpec& spec, const Eigen::VectorXd& theta) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(spec.dim(), spec.dim());
  for (int r = 0; r < spec.num_params(); ++r) k += theta(r) * spec.indicator(r);
  return -0.5 * std::log(Eigen::PartialPivLU<Eigen::MatrixXd>(k).determinant());
}

struct FdComparison {
  double mu_rel_err = 0.0;
  double fisher_rel_err = 0.0;
};

/// Compares mu and F with central differences of psi. mu uses a first
/// difference with step h1, F the four-point mixed second difference with
/// step h2 (a larger step keeps cancellation error below the tolerance).
inline FdComparison fd_compare(const RconSpec& spec, const Eigen::VectorXd& theta,
                               const Eigen::VectorXd& mu, const Eigen::MatrixXd& fisher,
                               double h1 = 1e-5, double h2 = 1e-4) {
  const int m = spec.num_params();
  Eigen::VectorXd mu_fd(m);
  Eigen::MatrixXd f_fd(m, m);
  for (int r = 0; r < m; ++r) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp(r) += h1;
    tm(r) -= h1;
    mu_fd(r) = (psi_by_lu(spec, tp) - psi_by_lu(spec, tm)) / (2 * h1);
  }
  for (int r = 0; r < m; ++r) {
    for (int s = 0; s < m; ++s) {
      auto at = [&](double dr, double ds) {
        Eigen::VectorXd t = theta;
        t(r) += dr;
        t(s) += ds;
        return psi_by_lu(spec, t);
      };
      f_fd(r, s) = (at(h2, h2) - at(h2, -h2) - at(-h2, h2) + at(-h2, -h2)) / (4 * h2 * h2);
    }
  }
  FdComparison out;
  out.mu_rel_err = (mu - mu_fd).cwiseAbs().maxCoeff() / std::max(1e-300, mu.cwiseAbs().maxCoeff());
  out.fisher_rel_err =
      (fisher - f_fd).cwiseAbs().maxCoeff() / std::max(1e-300, fisher.cwiseAbs().maxCoeff());
  return out;
}

struct SchurResult {
  double max_preserved_error = 0.0;  // over P x P and P x B blocks
  double max_fill_outside = 0.0;     // |entries| of the marginal precision at local non-edges
};

/// Marginal precision (Sigma_{N,N})^{-1} by dense LU inversion, compared to
/// K on the protected blocks. Local non-edges are pairs with a protected
/// endpoint that are not edges of g.
inline SchurResult schur_check(const ColouredGraph& g, const Eigen::MatrixXd& k, const std::vector<int>& nv,
                               const std::vector<int>& prot) {
  const Eigen::MatrixXd sigma = k.partialPivLu().inverse();
  const auto q = static_cast<Eigen::Index>(nv.size());
  Eigen::MatrixXd sub(q, q);
  for (Eigen::Index a = 0; a < q; ++a)
    for (Eigen::Index b = 0; b < q; ++b) sub(a, b) = sigma(nv[a], nv[b]);
  const Eigen::MatrixXd kl = sub.partialPivLu().inverse();
  std::set<int> p(prot.begin(), prot.end());
  SchurResult out;
  for (Eigen::Index a = 0; a < q; ++a) {
    for (Eigen::Index b = 0; b < q; ++b) {
      if (!p.count(nv[a]) && !p.count(nv[b])) continue;
      const double scale = std::max(1.0, std::abs(k(nv[a], nv[b])));
      out.max_preserved_error = std::max(out.max_preserved_error, std::abs(kl(a, b) - k(nv[a], nv[b])) / scale);
      if (a != b && !g.has_edge(nv[a], nv[b])) {
        out.max_fill_outside = std::max(out.max_fill_outside, std::abs(kl(a, b)));
      }
    }
  }
  return out;
}

}  // namespace rcon::testing
