#include "rcon/asymptotic.hpp"

#include "rcon/errors.hpp"
#include "rcon/linalg.hpp"
#include "rcon/model.hpp"

namespace rcon {

AsymptoticCov asymptotic_cov(const ColouredGraph& g, const Eigen::VectorXd& theta0, int hops, CombineMode mode) {
  if (hops != 1 && hops != 2) throw InvalidArgument("hops must be 1 or 2");
  const RconSpec spec = build_spec(g);
  const Eigen::MatrixXd k0 = k_of_theta(spec, theta0);
  if (!cone_check(spec, k0).in_cone()) throw NotPositiveDefinite("asymptotic_cov: theta0 outside the cone");
  const Eigen::MatrixXd sigma = linalg::inverse(*linalg::cholesky(k0));
  const int p = g.num_vertices();

  AsymptoticCov out;
  // Entries of every local class in global coordinates, stacked in
  // theta_bar order, and the inverse local Fisher informations.
  std::vector<std::vector<std::pair<int, int>>> stacked;
  std::vector<Eigen::MatrixXd> finv;
  std::vector<int> offset{0};
  std::vector<double> truth;
  for (int i = 0; i < p; ++i) {
    LocalModel lm = local_model(g, i, hops);
    const RconSpec ls = build_spec(lm.graph);
    const Eigen::MatrixXd k_local = marginal_precision(k0, lm.vertices);
    const Eigen::VectorXd th = theta_of_k(ls, k_local).theta;
    finv.push_back(linalg::inverse(*linalg::cholesky(cumulant(ls, th).fisher)));
    for (int r = 0; r < ls.num_params(); ++r) {
      std::vector<std::pair<int, int>> ent;
      for (auto [a, b] : ls.entries(r)) ent.emplace_back(lm.vertices[a], lm.vertices[b]);
      stacked.push_back(std::move(ent));
      truth.push_back(th(r));
    }
    offset.push_back(offset.back() + ls.num_params());
    out.models.push_back(std::move(lm));
  }
  const int total = offset.back();
  out.theta0_bar = Eigen::Map<Eigen::VectorXd>(truth.data(), total);

  // Y_q = -x^T delta_q x / 2, so
  // Cov(Y_q, Y_m) = 1/4 sum_{(a,b) in q} sum_{(c,d) in m} (S_ac S_bd + S_ad S_bc).
  out.score_cov.resize(total, total);
  for (int q = 0; q < total; ++q) {
    for (int m = q; m < total; ++m) {
      double acc = 0.0;
      for (auto [a, b] : stacked[q]) {
        for (auto [c, d] : stacked[m]) acc += sigma(a, c) * sigma(b, d) + sigma(a, d) * sigma(b, c);
      }
      out.score_cov(q, m) = out.score_cov(m, q) = 0.25 * acc;
    }
  }

  Eigen::MatrixXd block_finv = Eigen::MatrixXd::Zero(total, total);
  for (int i = 0; i < p; ++i) {
    const int s = offset[i + 1] - offset[i];
    block_finv.block(offset[i], offset[i], s, s) = finv[i];
  }
  out.gbar = block_finv * out.score_cov * block_finv;
  out.jac = combiner_jacobian(out.models, g, mode);
  out.a = out.jac * out.gbar * out.jac.transpose();
  return out;
}

}  // namespace rcon
