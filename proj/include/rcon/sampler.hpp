#pragma once

// Metropolis-Hastings sampling from the coloured G-Wishart distribution
//
//   pi(K | delta, D)  propto  |K|^{(delta-2)/2} exp(-tr(K D) / 2),  K in the cone.
//
// Two samplers share ChainState:
//   * RwSampler  - single-coordinate Gaussian random walk on theta. Needs no
//                  Jacobian and serves as the reference implementation.
//   * PsiSampler - works on the free entries of Psi = Phi Q^{-1}, where
//                  K = Phi^T Phi and D^{-1} = Q^T Q are upper Cholesky
//                  factorizations. Non-free entries are completed so that K
//                  satisfies the zero and colour constraints.

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "rcon/model.hpp"

namespace rcon {

struct CgwParams {
  double delta = 3.0;
  Eigen::MatrixXd d_mat;
};

CgwParams identity_prior(int p, double delta = 3.0);

/// Unnormalized log density; -infinity when K(theta) leaves the cone.
double log_density(const RconSpec& spec, const Eigen::VectorXd& theta, const CgwParams& params);

/// Conjugate update (delta + n, D + S).
CgwParams posterior_params(const CgwParams& prior, const SampleStats& stats);

enum class SamplerMode { RandomWalk, Psi };

const char* to_string(SamplerMode mode);
SamplerMode sampler_mode_from_string(const std::string& name);

struct SamplerConfig {
  int iters = 5000;    // retained-phase sweeps, after burn-in
  int burn_in = 1000;  // sweeps with step-size adaptation towards 0.3 acceptance
  int thin = 1;
  SamplerMode mode = SamplerMode::Psi;
  bool keep_draws = false;
};

struct ChainState {
  Eigen::VectorXd theta;
  double log_target = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd step_sizes;
  std::vector<long> accepts;
  std::vector<long> proposals;
  // Psi sampler kernel choice: per coordinate, burn-in trials and accepts
  // of the independence proposal, and the frozen choice.
  std::vector<long> indep_trials;
  std::vector<long> indep_accepts;
  std::vector<char> independent;
  int next_coord = 0;
  bool adapting = false;
  long completion_failures = 0;
  std::mt19937_64 rng;

  // Psi form (PsiSampler only). psi is upper triangular, phi = psi * Q.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> psi;
  Eigen::MatrixXd phi;
  // Proposal workspace.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> psi_work;
  Eigen::MatrixXd phi_work;
  Eigen::VectorXd theta_work;

  void reset_counters();
};

class RwSampler {
 public:
  RwSampler(const RconSpec& spec, CgwParams params);

  /// Chain started at K = I restricted to the model (vertex classes 1,
  /// edge classes 0).
  ChainState init(std::uint64_t seed) const;
  ChainState init(const Eigen::VectorXd& theta, std::uint64_t seed) const;

  /// One Gaussian random-walk proposal on the next coordinate (cycled).
  void step(ChainState& state) const;
  /// Freezes step sizes and clears the counters.
  void end_adaptation(ChainState& state) const;
  int num_coordinates() const { return spec_.num_params(); }

  double fresh_log_target(const ChainState& state) const;

 private:
  const RconSpec& spec_;
  CgwParams params_;
};

class PsiSampler {
 public:
  PsiSampler(const RconSpec& spec, CgwParams params);

  ChainState init(std::uint64_t seed) const;
  /// Start from any K(theta) in the cone. Throws NotPositiveDefinite.
  ChainState init(const Eigen::VectorXd& theta, std::uint64_t seed) const;

  /// One MH update of the next free Psi coordinate (cycled). While
  /// adapting, a coordinate alternates between a random-walk proposal and an
  /// independence proposal drawn from its own factor of the target.
  void step(ChainState& state) const;
  /// Freezes step sizes and, per coordinate, keeps the independence
  /// proposal when it accepted at least half of its burn-in trials.
  void end_adaptation(ChainState& state) const;
  int num_coordinates() const { return static_cast<int>(free_positions_.size()); }

  /// Rebuild Psi from its free entries in place. Returns false when a tied
  /// diagonal has no positive completion.
  bool complete(ChainState& state) const;
  double fresh_log_target(const ChainState& state) const;
  Eigen::MatrixXd k_of_psi(const ChainState& state) const;

  const Eigen::MatrixXd& q() const { return q_; }
  bool is_free_diagonal(int coord) const;

 private:
  enum class Kind { FreeDiag, FreeOff, TiedDiag, TiedOff, Zero };
  struct Position {
    int a;
    int b;
    Kind kind;
    int cls;
  };

  template <class PsiMat>
  bool complete_from(std::size_t start, PsiMat& psi, Eigen::MatrixXd& phi,
                     Eigen::VectorXd& theta) const;
  template <class PsiMat>
  double log_target_of(const PsiMat& psi) const;

  const RconSpec& spec_;
  CgwParams params_;
  Eigen::MatrixXd q_;
  std::vector<Position> positions_;
  std::vector<std::size_t> free_positions_;  // coordinate -> index in positions_
  Eigen::VectorXd diag_exponent_;            // delta - 2 + jacobian power, per row
};

struct DrawSummary {
  Eigen::MatrixXd k_mean;
  Eigen::VectorXd theta_mean;
  Eigen::VectorXd theta_mc_se;  // batch-means standard errors
  Eigen::VectorXd accept_rate;  // per sampler coordinate, post burn-in
  int retained = 0;
  long completion_failures = 0;
  int independent_coords = 0;  // psi coordinates frozen on the independence proposal
  double max_cache_error = 0.0;
  std::vector<Eigen::VectorXd> draws;  // theta draws when keep_draws is set
};

/// Runs burn_in + iters sweeps (a sweep updates every coordinate once) and
/// averages the retained K draws. Deterministic given seed and mode.
DrawSummary sample(const RconSpec& spec, const CgwParams& params, const SamplerConfig& cfg,
                   std::uint64_t seed);

}  // namespace rcon
