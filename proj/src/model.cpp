#include "rcon/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rcon/errors.hpp"
#include "rcon/linalg.hpp"

namespace rcon {

namespace {

void require_square(const Eigen::MatrixXd& m, int dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim) {
    throw InvalidArgument(std::string(what) + ": expected " + std::to_string(dim) + "x" +
                          std::to_string(dim) + " matrix, got " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()));
  }
}

void require_length(const RconSpec& spec, const Eigen::VectorXd& theta) {
  if (theta.size() != spec.num_params()) {
    throw InvalidArgument("theta has length " + std::to_string(theta.size()) + ", model has " +
                          std::to_string(spec.num_params()) + " parameters");
  }
}

}  // namespace

RconSpec build_spec(const ColouredGraph& g) {
  auto report = validate_coloured_graph(g);
  if (!report.ok()) {
    std::string msg = "invalid coloured graph:";
    for (const auto& v : report.violations) msg += " [" + v.message + "]";
    throw InvalidArgument(msg);
  }
  RconSpec spec;
  const int p = g.num_vertices();
  spec.dim_ = p;
  spec.num_vertex_classes_ = g.num_vertex_classes();
  spec.upper_.resize(g.num_classes());
  spec.full_.resize(g.num_classes());
  spec.entry_class_.assign(static_cast<std::size_t>(p) * p, -1);

  for (int k = 0; k < g.num_vertex_classes(); ++k) {
    auto members = g.vertex_classes()[k];
    std::sort(members.begin(), members.end());
    for (int v : members) {
      spec.upper_[k].emplace_back(v, v);
      spec.full_[k].emplace_back(v, v);
      spec.entry_class_[static_cast<std::size_t>(v) * p + v] = k;
    }
  }
  const int t = g.num_vertex_classes();
  for (int k = 0; k < g.num_edge_classes(); ++k) {
    auto members = g.edge_classes()[k];
    std::sort(members.begin(), members.end());
    for (const Edge& e : members) {
      spec.upper_[t + k].emplace_back(e.u, e.v);
      spec.full_[t + k].emplace_back(e.u, e.v);
      spec.full_[t + k].emplace_back(e.v, e.u);
      spec.entry_class_[static_cast<std::size_t>(e.u) * p + e.v] = t + k;
      spec.entry_class_[static_cast<std::size_t>(e.v) * p + e.u] = t + k;
    }
  }
  return spec;
}

Eigen::MatrixXd RconSpec::indicator(int r) const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(dim_, dim_);
  for (auto [a, b] : full_.at(r)) d(a, b) = 1.0;
  return d;
}

Eigen::MatrixXd k_of_theta(const RconSpec& spec, const Eigen::VectorXd& theta) {
  require_length(spec, theta);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(spec.dim(), spec.dim());
  for (int r = 0; r < spec.num_params(); ++r) {
    for (auto [a, b] : spec.entries(r)) k(a, b) = theta(r);
  }
  return k;
}

Eigen::VectorXd class_traces(const RconSpec& spec, const Eigen::MatrixXd& m) {
  Eigen::VectorXd out(spec.num_params());
  for (int r = 0; r < spec.num_params(); ++r) {
    double s = 0.0;
    // tr(delta_r M) = sum over nonzeros (a, b) of delta_r of M(b, a).
    for (auto [a, b] : spec.entries(r)) s += m(b, a);
    out(r) = s;
  }
  return out;
}

ThetaProjection theta_of_k(const RconSpec& spec, const Eigen::MatrixXd& k, double tol) {
  require_square(k, spec.dim(), "theta_of_k");
  ThetaProjection out;
  out.theta = class_traces(spec, k);
  for (int r = 0; r < spec.num_params(); ++r) {
    out.theta(r) /= spec.class_size(r);
    double lo = k(spec.entries(r)[0].first, spec.entries(r)[0].second);
    double hi = lo;
    for (auto [a, b] : spec.entries(r)) {
      lo = std::min(lo, k(a, b));
      hi = std::max(hi, k(a, b));
    }
    out.max_spread = std::max(out.max_spread, hi - lo);
  }
  out.consistent = out.max_spread <= tol;
  return out;
}

ConeReport cone_check(const RconSpec& spec, const Eigen::MatrixXd& k, double tol) {
  ConeReport rep;
  const int p = spec.dim();
  if (k.rows() != p || k.cols() != p) {
    rep.zero_pattern = rep.colour_equalities = rep.positive_definite = false;
    rep.problems.push_back("dimension mismatch");
    return rep;
  }
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      if (a != b && spec.class_at(a, b) < 0 && std::abs(k(a, b)) > tol) {
        if (rep.zero_pattern) {
          rep.problems.push_back("ZeroPattern: entry (" + std::to_string(a + 1) + "," +
                                 std::to_string(b + 1) + ") should be zero");
        }
        rep.zero_pattern = false;
      }
    }
  }
  auto proj = theta_of_k(spec, k, tol);
  if (!proj.consistent) {
    rep.colour_equalities = false;
    rep.problems.push_back("ColourEquality: within-class spread " + std::to_string(proj.max_spread));
  }
  Eigen::MatrixXd sym = 0.5 * (k + k.transpose());
  rep.min_eigenvalue = linalg::min_eigenvalue(sym);
  if (!(rep.min_eigenvalue > tol)) {
    rep.positive_definite = false;
    rep.problems.push_back("NotPositiveDefinite: smallest eigenvalue " +
                           std::to_string(rep.min_eigenvalue));
  }
  return rep;
}

SampleStats suff_stats_from_scatter(const RconSpec& spec, Eigen::MatrixXd scatter, int n) {
  require_square(scatter, spec.dim(), "suff_stats");
  if (n < 1) throw InvalidArgument("suff_stats needs at least one observation");
  SampleStats st;
  st.n = n;
  st.ybar = class_traces(spec, scatter) * (-0.5 / n);
  st.scatter = std::move(scatter);
  return st;
}

SampleStats suff_stats(const RconSpec& spec, const Eigen::MatrixXd& data) {
  if (data.cols() != spec.dim()) {
    throw InvalidArgument("data has " + std::to_string(data.cols()) + " columns, model has " +
                          std::to_string(spec.dim()) + " variables");
  }
  Eigen::MatrixXd scatter = data.transpose() * data;
  return suff_stats_from_scatter(spec, std::move(scatter), static_cast<int>(data.rows()));
}

Cumulant cumulant(const RconSpec& spec, const Eigen::VectorXd& theta) {
  const Eigen::MatrixXd k = k_of_theta(spec, theta);
  auto llt = linalg::cholesky(k);
  if (!llt) throw NotPositiveDefinite("cumulant: K(theta) is not positive definite");
  const Eigen::MatrixXd sigma = linalg::inverse(*llt);

  Cumulant c;
  c.psi = -0.5 * linalg::log_det(*llt);
  c.mu = -0.5 * class_traces(spec, sigma);

  // F_rs = tr(delta_r Sigma delta_s Sigma) / 2
  //      = sum_{(a,b) in r} sum_{(c,d) in s} Sigma(b,c) Sigma(d,a) / 2.
  const int m = spec.num_params();
  c.fisher.resize(m, m);
  for (int r = 0; r < m; ++r) {
    for (int s = r; s < m; ++s) {
      double acc = 0.0;
      for (auto [a, b] : spec.entries(r)) {
        for (auto [cc, d] : spec.entries(s)) acc += sigma(b, cc) * sigma(d, a);
      }
      c.fisher(r, s) = c.fisher(s, r) = 0.5 * acc;
    }
  }
  return c;
}

Eigen::MatrixXd simulate_data(const Eigen::MatrixXd& k, int n, std::uint64_t seed) {
  if (k.rows() != k.cols()) throw InvalidArgument("simulate_data: K must be square");
  if (n < 0) throw InvalidArgument("simulate_data: negative sample size");
  auto llt = linalg::cholesky(k);
  if (!llt) throw NotPositiveDefinite("K not positive definite");
  const auto p = k.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd z(p, n);
  for (int j = 0; j < n; ++j) {
    for (Eigen::Index a = 0; a < p; ++a) z(a, j) = normal(rng);
  }
  // K = L L^T, x = L^{-T} z has covariance K^{-1}.
  Eigen::MatrixXd x = llt->matrixU().solve(z);
  return x.transpose();
}

Eigen::MatrixXd principal_submatrix(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  const auto q = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd out(q, q);
  for (Eigen::Index a = 0; a < q; ++a) {
    for (Eigen::Index b = 0; b < q; ++b) out(a, b) = m(idx[a], idx[b]);
  }
  return out;
}

Eigen::MatrixXd marginal_precision(const Eigen::MatrixXd& k, const std::vector<int>& vertices) {
  auto llt = linalg::cholesky(k);
  if (!llt) throw NotPositiveDefinite("marginal_precision: K not positive definite");
  const Eigen::MatrixXd sigma = linalg::inverse(*llt);
  auto local = linalg::cholesky(principal_submatrix(sigma, vertices));
  if (!local) throw NotPositiveDefinite("marginal_precision: marginal covariance not positive definite");
  return linalg::inverse(*local);
}

}  // namespace rcon
