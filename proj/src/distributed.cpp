#include "rcon/distributed.hpp"

#include <algorithm>
#include <json.hpp>
#include <numeric>

#include "rcon/errors.hpp"
#include "rcon/linalg.hpp"
#include "rcon/metrics.hpp"
#include "rcon/mle.hpp"
#include "rcon/parallel.hpp"
#include "rcon/seeding.hpp"

namespace rcon {

namespace {

void require_data(const ColouredGraph& g, const Eigen::MatrixXd& data) {
  if (data.cols() != g.num_vertices()) {
    throw InvalidArgument("data has " + std::to_string(data.cols()) + " columns, graph has " +
                          std::to_string(g.num_vertices()) + " vertices");
  }
  if (data.rows() < 1) throw InvalidArgument("data has no rows");
}

CgwParams prior_for(const EstimatorConfig& cfg, const std::vector<int>& vertices) {
  if (!cfg.prior_d) return identity_prior(static_cast<int>(vertices.size()), cfg.delta);
  return CgwParams{cfg.delta, principal_submatrix(*cfg.prior_d, vertices)};
}

void require_prior(const ColouredGraph& g, const EstimatorConfig& cfg) {
  if (!cfg.prior_d) return;
  const int p = g.num_vertices();
  if (cfg.prior_d->rows() != p || cfg.prior_d->cols() != p) {
    throw InvalidArgument("prior D must be " + std::to_string(p) + " x " + std::to_string(p));
  }
  if (!linalg::cholesky(*cfg.prior_d)) throw NotPositiveDefinite("prior D not positive definite");
}

std::vector<int> all_vertices(int p) {
  std::vector<int> v(p);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Centres contributing to global class k: members of V_k, or endpoints of
// the edges of E_k. Ascending.
std::vector<std::vector<int>> contributing_centres(const ColouredGraph& g) {
  std::vector<std::vector<int>> out(g.num_classes());
  for (int k = 0; k < g.num_vertex_classes(); ++k) {
    out[k] = g.vertex_classes()[k];
    std::sort(out[k].begin(), out[k].end());
  }
  for (int k = 0; k < g.num_edge_classes(); ++k) {
    auto& c = out[g.num_vertex_classes() + k];
    for (const Edge& e : g.edge_classes()[k]) {
      c.push_back(e.u);
      c.push_back(e.v);
    }
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  return out;
}

double paper_denominator(const ColouredGraph& g, int k) {
  const int t = g.num_vertex_classes();
  if (k < t) return static_cast<double>(g.vertex_classes()[k].size());
  return 2.0 * static_cast<double>(g.edge_classes()[k - t].size());
}

// Local class of centre i that carries global class k, if any.
std::optional<int> local_class_for(const std::vector<std::optional<int>>& class_map, int k) {
  for (std::size_t j = 0; j < class_map.size(); ++j) {
    if (class_map[j] == k) return static_cast<int>(j);
  }
  return std::nullopt;
}

// Weights of the combiner: for every global class, (centre, local class,
// weight) triples.
std::vector<std::vector<Contribution>> combiner_weights(
    const ColouredGraph& g, const std::vector<const std::vector<std::optional<int>>*>& maps, CombineMode mode) {
  const auto centres = contributing_centres(g);
  std::vector<std::vector<Contribution>> out(g.num_classes());
  for (int k = 0; k < g.num_classes(); ++k) {
    for (int i : centres[k]) {
      if (auto j = local_class_for(*maps.at(i), k)) out[k].push_back(Contribution{i, *j, 0.0});
    }
    if (out[k].empty()) {
      throw NumericalError("combine: global class " + std::to_string(k) + " has no local estimate");
    }
    const double denom =
        mode == CombineMode::Paper ? paper_denominator(g, k) : static_cast<double>(out[k].size());
    for (auto& c : out[k]) c.weight = 1.0 / denom;
  }
  return out;
}

GlobalEstimate finish(const ColouredGraph& g, GlobalEstimate est) {
  auto spec = build_spec(g);
  est.k_mat = k_of_theta(spec, est.theta);
  est.min_eigenvalue = linalg::min_eigenvalue(est.k_mat);
  est.positive_definite = linalg::cholesky(est.k_mat).has_value();
  return est;
}

}  // namespace

const char* to_string(CombineMode mode) { return mode == CombineMode::Paper ? "paper" : "self_normalizing"; }

CombineMode combine_mode_from_string(const std::string& name) {
  if (name == "paper") return CombineMode::Paper;
  if (name == "self" || name == "self_normalizing") return CombineMode::SelfNormalizing;
  throw InvalidArgument("unknown combine mode '" + name + "' (expected paper or self)");
}

std::string method_name(EstimationMethod method, int hops) {
  const std::string suffix = "-" + std::to_string(hops) + "hop";
  return (method == EstimationMethod::Bayes ? "MBE" : "DMLE") + suffix;
}

LocalEstimate estimate_local(const ColouredGraph& g, int i, int hops, const Eigen::MatrixXd& data,
                             const EstimatorConfig& cfg, std::uint64_t seed) {
  require_data(g, data);
  LocalModel lm = local_model(g, i, hops);
  const RconSpec spec = build_spec(lm.graph);
  Eigen::MatrixXd local_data(data.rows(), lm.size());
  for (int a = 0; a < lm.size(); ++a) local_data.col(a) = data.col(lm.vertices[a]);
  const SampleStats stats = suff_stats(spec, local_data);

  LocalEstimate out;
  out.centre = i;
  out.hops = hops;
  out.vertices = lm.vertices;
  out.buffer = lm.buffer;
  out.class_map = lm.class_map;
  out.seed = derive_seed(seed, std::span<const int>(lm.vertices));
  if (cfg.method == EstimationMethod::Bayes) {
    require_prior(g, cfg);
    const CgwParams post = posterior_params(prior_for(cfg, lm.vertices), stats);
    DrawSummary draws = sample(spec, post, cfg.sampler, out.seed);
    out.theta_local = draws.theta_mean;
    out.min_accept_rate = draws.accept_rate.size() ? draws.accept_rate.minCoeff() : 1.0;
    out.completion_failures = draws.completion_failures;
  } else {
    MleResult fit = fit_mle(spec, stats, std::nullopt, cfg.mle_tol, cfg.mle_max_iter);
    out.theta_local = fit.theta_hat;
    out.mle_iterations = fit.iterations;
    out.mle_converged = fit.converged;
    out.mle_gradient_norm = fit.final_gradient_norm;
  }
  return out;
}

Combined combine(const std::vector<LocalEstimate>& locals, const ColouredGraph& g, CombineMode mode) {
  if (static_cast<int>(locals.size()) != g.num_vertices()) {
    throw InvalidArgument("combine: expected one local estimate per vertex");
  }
  std::vector<const std::vector<std::optional<int>>*> maps(locals.size());
  for (std::size_t i = 0; i < locals.size(); ++i) {
    if (locals[i].centre != static_cast<int>(i)) throw InvalidArgument("combine: locals must be ordered by centre");
    maps[i] = &locals[i].class_map;
  }
  Combined out;
  out.contributions = combiner_weights(g, maps, mode);
  out.theta = Eigen::VectorXd::Zero(g.num_classes());
  out.counts.resize(g.num_classes());
  for (int k = 0; k < g.num_classes(); ++k) {
    for (const auto& c : out.contributions[k]) out.theta(k) += c.weight * locals[c.centre].theta_local(c.local_class);
    out.counts[k] = static_cast<int>(out.contributions[k].size());
  }
  return out;
}

Eigen::MatrixXd combiner_jacobian(const std::vector<LocalModel>& models, const ColouredGraph& g, CombineMode mode) {
  if (static_cast<int>(models.size()) != g.num_vertices()) {
    throw InvalidArgument("combiner_jacobian: expected one local model per vertex");
  }
  std::vector<const std::vector<std::optional<int>>*> maps(models.size());
  std::vector<int> offset(models.size() + 1, 0);
  for (std::size_t i = 0; i < models.size(); ++i) {
    maps[i] = &models[i].class_map;
    offset[i + 1] = offset[i] + models[i].num_params();
  }
  auto weights = combiner_weights(g, maps, mode);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(g.num_classes(), offset.back());
  for (int k = 0; k < g.num_classes(); ++k) {
    for (const auto& c : weights[k]) jac(k, offset[c.centre] + c.local_class) = c.weight;
  }
  return jac;
}

GlobalEstimate estimate_distributed(const ColouredGraph& g, const Eigen::MatrixXd& data, int hops,
                                    const EstimatorConfig& cfg, std::uint64_t seed, int workers) {
  require_data(g, data);
  if (hops != 1 && hops != 2) throw InvalidArgument("hops must be 1 or 2");
  const int p = g.num_vertices();
  std::vector<LocalEstimate> locals(p);
  auto errors = parallel_for(p, workers, [&](int i) { locals[i] = estimate_local(g, i, hops, data, cfg, seed); });
  std::vector<std::pair<int, std::string>> failures;
  for (int i = 0; i < p; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      failures.emplace_back(i, e.what());
    }
  }
  if (!failures.empty()) throw EstimationError(std::move(failures));

  GlobalEstimate est;
  est.method = method_name(cfg.method, hops);
  est.hops = hops;
  est.combine = cfg.combine;
  auto combined = combine(locals, g, cfg.combine);
  est.theta = std::move(combined.theta);
  est.contribution_counts = std::move(combined.counts);
  est.locals = std::move(locals);
  for (const auto& l : est.locals) est.mle_converged = est.mle_converged && l.mle_converged;
  return finish(g, std::move(est));
}

GlobalEstimate estimate_global_bayes(const ColouredGraph& g, const Eigen::MatrixXd& data, const EstimatorConfig& cfg,
                                     std::uint64_t seed) {
  require_data(g, data);
  const RconSpec spec = build_spec(g);
  const SampleStats stats = suff_stats(spec, data);
  const auto vertices = all_vertices(g.num_vertices());
  require_prior(g, cfg);
  const CgwParams post = posterior_params(prior_for(cfg, vertices), stats);
  DrawSummary draws = sample(spec, post, cfg.sampler, derive_seed(seed, std::span<const int>(vertices)));
  GlobalEstimate est;
  est.method = "GBE";
  est.theta = draws.theta_mean;
  est.contribution_counts.assign(spec.num_params(), 1);
  est.min_accept_rate = draws.accept_rate.size() ? draws.accept_rate.minCoeff() : 1.0;
  return finish(g, std::move(est));
}

GlobalEstimate estimate_global_mle(const ColouredGraph& g, const Eigen::MatrixXd& data, const EstimatorConfig& cfg) {
  require_data(g, data);
  const RconSpec spec = build_spec(g);
  MleResult fit = fit_mle(spec, suff_stats(spec, data), std::nullopt, cfg.mle_tol, cfg.mle_max_iter);
  GlobalEstimate est;
  est.method = "GMLE";
  est.theta = fit.theta_hat;
  est.contribution_counts.assign(spec.num_params(), 1);
  est.mle_iterations = fit.iterations;
  est.mle_converged = fit.converged;
  return finish(g, std::move(est));
}

std::string report_json(const GlobalEstimate& est, const Eigen::MatrixXd* k_true) {
  using nlohmann::json;
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json j;
  j["method"] = est.method;
  if (est.hops > 0) {
    j["hops"] = est.hops;
    j["combine"] = to_string(est.combine);
  }
  j["theta"] = vec(est.theta);
  j["contribution_counts"] = est.contribution_counts;
  j["positive_definite"] = est.positive_definite;
  j["min_eigenvalue"] = est.min_eigenvalue;
  if (k_true) j["nmse"] = nmse(est.k_mat, *k_true);
  json diag = json::object();
  if (est.method == "GBE") diag["min_accept_rate"] = est.min_accept_rate;
  if (est.method == "GMLE") {
    diag["mle_iterations"] = est.mle_iterations;
    diag["mle_converged"] = est.mle_converged;
  }
  j["diagnostics"] = diag;
  json locals = json::array();
  for (const auto& l : est.locals) {
    json lj;
    lj["centre"] = l.centre + 1;
    std::vector<int> verts, buf;
    for (int v : l.vertices) verts.push_back(v + 1);
    for (int v : l.buffer) buf.push_back(v + 1);
    lj["vertices"] = verts;
    lj["buffer"] = buf;
    lj["theta_local"] = vec(l.theta_local);
    json cm = json::array();
    for (const auto& c : l.class_map) cm.push_back(c ? json(*c) : json(nullptr));
    lj["class_map"] = cm;
    if (est.method.rfind("MBE", 0) == 0) {
      lj["min_accept_rate"] = l.min_accept_rate;
      lj["completion_failures"] = l.completion_failures;
    } else {
      lj["mle_iterations"] = l.mle_iterations;
      lj["mle_converged"] = l.mle_converged;
      lj["mle_gradient_norm"] = l.mle_gradient_norm;
    }
    locals.push_back(std::move(lj));
  }
  if (!est.locals.empty()) j["locals"] = std::move(locals);
  return j.dump(2);
}

}  // namespace rcon
