#pragma once

// RCON parameterization: theta <-> K, cone membership, sufficient
// statistics, the cumulant function and Gaussian data simulation.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rcon/graph.hpp"

namespace rcon {

/// Parameter layout of an RCON model: theta holds one value per colour
/// class, vertex classes first. Each class r owns the matrix entries where
/// its indicator delta_r is one.
class RconSpec {
 public:
  RconSpec() = default;

  int dim() const { return dim_; }
  int num_params() const { return static_cast<int>(upper_.size()); }
  int num_vertex_classes() const { return num_vertex_classes_; }

  /// Entries (a, b) with a <= b belonging to class r.
  const std::vector<std::pair<int, int>>& upper_entries(int r) const { return upper_[r]; }
  /// All nonzeros of delta_r, both triangles.
  const std::vector<std::pair<int, int>>& entries(int r) const { return full_[r]; }
  /// tau_r, the number of nonzeros of delta_r.
  int class_size(int r) const { return static_cast<int>(full_[r].size()); }
  /// Class owning entry (a, b), or -1 for a structural zero.
  int class_at(int a, int b) const { return entry_class_[static_cast<std::size_t>(a) * dim_ + b]; }

  Eigen::MatrixXd indicator(int r) const;

  friend RconSpec build_spec(const ColouredGraph& g);

 private:
  int dim_ = 0;
  int num_vertex_classes_ = 0;
  std::vector<std::vector<std::pair<int, int>>> upper_;
  std::vector<std::vector<std::pair<int, int>>> full_;
  std::vector<int> entry_class_;
};

/// Throws InvalidArgument listing the violations when g is not a valid
/// coloured graph.
RconSpec build_spec(const ColouredGraph& g);

Eigen::MatrixXd k_of_theta(const RconSpec& spec, const Eigen::VectorXd& theta);

struct ThetaProjection {
  Eigen::VectorXd theta;
  bool consistent = true;
  double max_spread = 0.0;
};

/// Class averages theta_r = tr(delta_r K) / tau_r. Flags the result when the
/// entries of some class differ by more than tol.
ThetaProjection theta_of_k(const RconSpec& spec, const Eigen::MatrixXd& k, double tol = 1e-9);

struct ConeReport {
  bool zero_pattern = true;
  bool colour_equalities = true;
  bool positive_definite = true;
  double min_eigenvalue = 0.0;
  std::vector<std::string> problems;

  bool in_cone() const { return zero_pattern && colour_equalities && positive_definite; }
};

ConeReport cone_check(const RconSpec& spec, const Eigen::MatrixXd& k, double tol = 1e-9);

struct SampleStats {
  int n = 0;
  Eigen::MatrixXd scatter;  // sum_j x_j x_j^T
  Eigen::VectorXd ybar;     // ybar_r = -tr(delta_r S) / (2n)
};

SampleStats suff_stats(const RconSpec& spec, const Eigen::MatrixXd& data);
/// Same statistics from a precomputed scatter matrix.
SampleStats suff_stats_from_scatter(const RconSpec& spec, Eigen::MatrixXd scatter, int n);

/// tr(delta_r M) for every class r.
Eigen::VectorXd class_traces(const RconSpec& spec, const Eigen::MatrixXd& m);

struct Cumulant {
  double psi = 0.0;
  Eigen::VectorXd mu;
  Eigen::MatrixXd fisher;
};

/// psi = -log|K|/2, mu = psi', F = psi''. Throws NotPositiveDefinite.
Cumulant cumulant(const RconSpec& spec, const Eigen::VectorXd& theta);

/// n x p matrix of N(0, K^{-1}) rows. Throws NotPositiveDefinite.
Eigen::MatrixXd simulate_data(const Eigen::MatrixXd& k, int n, std::uint64_t seed);

/// Precision of the marginal of the given vertices: (Sigma_{N,N})^{-1}.
Eigen::MatrixXd marginal_precision(const Eigen::MatrixXd& k, const std::vector<int>& vertices);

Eigen::MatrixXd principal_submatrix(const Eigen::MatrixXd& m, const std::vector<int>& idx);

}  // namespace rcon
