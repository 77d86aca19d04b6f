#pragma once

// Distributed estimation: every vertex fits its relaxed local model (by
// posterior mean or MLE), and the local parameters that carry a global class
// are averaged into the global estimate.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcon/graph.hpp"
#include "rcon/model.hpp"
#include "rcon/sampler.hpp"

namespace rcon {

enum class EstimationMethod { Bayes, Mle };

/// Paper: divide by |V_k| or 2|E_k|. SelfNormalizing: divide by the number
/// of contributing local parameters.
enum class CombineMode { Paper, SelfNormalizing };

const char* to_string(CombineMode mode);
/// Accepts "paper", "self" and "self_normalizing".
CombineMode combine_mode_from_string(const std::string& name);

struct EstimatorConfig {
  EstimationMethod method = EstimationMethod::Bayes;
  double delta = 3.0;  // local prior (delta, D restricted to N_i)
  std::optional<Eigen::MatrixXd> prior_d;  // global D, identity when unset
  SamplerConfig sampler;
  double mle_tol = 1e-8;
  int mle_max_iter = 200;
  CombineMode combine = CombineMode::SelfNormalizing;
};

struct LocalEstimate {
  int centre = 0;
  int hops = 1;
  std::vector<int> vertices;
  std::vector<int> buffer;
  Eigen::VectorXd theta_local;
  std::vector<std::optional<int>> class_map;  // nullopt: buffer class, never combined
  std::uint64_t seed = 0;

  // Sampler diagnostics (Bayes).
  double min_accept_rate = 0.0;
  long completion_failures = 0;
  // MLE diagnostics.
  int mle_iterations = 0;
  bool mle_converged = true;
  double mle_gradient_norm = 0.0;
};

/// Fits the local model of vertex i on the columns N_i of data (n x p).
/// Bayes runs the sampler on the posterior with prior (delta, I); the chain
/// seed is derived from seed and the local vertex set.
LocalEstimate estimate_local(const ColouredGraph& g, int i, int hops, const Eigen::MatrixXd& data,
                             const EstimatorConfig& cfg, std::uint64_t seed);

struct Contribution {
  int centre;
  int local_class;
  double weight;
};

struct Combined {
  Eigen::VectorXd theta;
  std::vector<int> counts;                               // contributing terms per global class
  std::vector<std::vector<Contribution>> contributions;  // per global class
};

/// Vertex class V_k takes the local parameter mapped to it from every centre
/// i in V_k; edge class E_k from every centre incident to an edge of E_k.
/// Throws NumericalError if a class gets no contribution.
Combined combine(const std::vector<LocalEstimate>& locals, const ColouredGraph& g, CombineMode mode);

/// d combine / d theta_bar, where theta_bar stacks the local parameter
/// vectors of the centres 0..p-1 in order. The map is linear, so this is
/// the constant weight matrix.
Eigen::MatrixXd combiner_jacobian(const std::vector<LocalModel>& models, const ColouredGraph& g, CombineMode mode);

struct GlobalEstimate {
  std::string method;  // MBE-1hop, MBE-2hop, GBE, GMLE, DMLE-1hop, DMLE-2hop
  int hops = 0;        // 0 for the global methods
  CombineMode combine = CombineMode::SelfNormalizing;
  Eigen::VectorXd theta;
  Eigen::MatrixXd k_mat;
  std::vector<int> contribution_counts;
  bool positive_definite = false;
  double min_eigenvalue = 0.0;
  std::vector<LocalEstimate> locals;  // one per vertex for distributed methods
  // Global-run diagnostics (GBE / GMLE).
  double min_accept_rate = 0.0;
  int mle_iterations = 0;
  bool mle_converged = true;
};

std::string method_name(EstimationMethod method, int hops);

/// Runs estimate_local for every vertex on `workers` threads and combines.
/// The result does not depend on workers. Per-vertex failures are collected
/// into one EstimationError.
GlobalEstimate estimate_distributed(const ColouredGraph& g, const Eigen::MatrixXd& data, int hops,
                                    const EstimatorConfig& cfg, std::uint64_t seed, int workers);

/// GBE: one posterior sampler run on the full model.
GlobalEstimate estimate_global_bayes(const ColouredGraph& g, const Eigen::MatrixXd& data, const EstimatorConfig& cfg,
                                     std::uint64_t seed);

/// GMLE: Fisher scoring on the full model.
GlobalEstimate estimate_global_mle(const ColouredGraph& g, const Eigen::MatrixXd& data, const EstimatorConfig& cfg);

/// JSON report with 1-based vertex ids. k_true, when given, adds nmse.
std::string report_json(const GlobalEstimate& est, const Eigen::MatrixXd* k_true = nullptr);

}  // namespace rcon
