#pragma once

// Simulation study: scenario generators, the experiment runner, the
// asymptotic-normality check and condition diagnostics.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "rcon/distributed.hpp"
#include "rcon/graph.hpp"
#include "rcon/metrics.hpp"

namespace rcon {

struct Scenario {
  std::string name;
  ColouredGraph graph;
  Eigen::VectorXd theta_true;
  Eigen::MatrixXd k_true;
  std::string notes;
};

/// Cycle 1-2-...-p-1 with one of three colourings:
///   a: vertex classes odd/even, edge classes odd edges / even edges + (1,p)
///   b: vertex classes odd/even, every edge its own class
///   c: every vertex its own class, edge classes as in a
/// Throws InvalidArgument for odd p, p < 4 or an unknown pattern.
Scenario scenario_cycle(int p, char pattern);

/// rows x cols grid, vertex v = i + cols (j - 1) for column i and row j.
/// Horizontal edges share one class with value 1; vertical edges and the
/// diagonal are singleton classes.
Scenario scenario_grid(int rows = 10, int cols = 10);

/// Names like "cycle-20-a" or "grid-10x10". Throws InvalidArgument.
Scenario scenario_by_name(const std::string& name);

enum class Method { MbeOneHop, MbeTwoHop, Gbe, Gmle, DmleOneHop, DmleTwoHop };

std::string to_string(Method m);
Method method_from_string(const std::string& name);
int method_hops(Method m);  // 0 for the global methods
const std::vector<Method>& all_methods();

struct ExperimentOptions {
  EstimatorConfig estimator;   // sampler budget, delta, combine mode
  int workers = 1;             // parallel cells
  bool record_time = true;     // false writes wall_time_s = 0 for byte-identical reruns
  bool verbose = false;        // progress to stderr
};

struct ExperimentRow {
  std::string scenario;
  std::string method;
  int hops = 0;
  int n = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  double nmse = 0.0;
  double wall_time_s = 0.0;
  std::string flags;  // ';'-separated diagnostics, empty when clean
};

struct AggregateRow {
  std::string scenario;
  std::string method;
  int hops = 0;
  int n = 0;
  int count = 0;
  double nmse_mean = 0.0;
  double nmse_std = 0.0;  // sample standard deviation, 0 for one replicate
  double time_mean_s = 0.0;
};

struct CellFailure {
  std::string method;
  int n = 0;
  int replicate = 0;
  std::string message;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  std::vector<AggregateRow> aggregates;
  std::vector<CellFailure> failures;
};

/// Simulates reps data sets per n from N(0, K_true^{-1}) and runs every
/// method on each. Rows are ordered by (n, replicate, method) whatever the
/// worker count. Cell failures are recorded, not thrown.
ExperimentReport run_experiment(const Scenario& scenario, const std::vector<int>& n_list, int reps,
                                const std::vector<Method>& methods, std::uint64_t seed,
                                const ExperimentOptions& opts);

/// Mean, sample standard deviation and mean time per (scenario, method, n).
std::vector<AggregateRow> aggregate(const std::vector<ExperimentRow>& rows);

std::string report_csv(const std::vector<ExperimentRow>& rows);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);
/// One row per (scenario, n), one column of mean NMSE per method.
std::string plot_csv(const std::vector<AggregateRow>& rows);

/// Writes report.csv, aggregate.csv and plot.csv into dir (created if
/// missing). Throws std::runtime_error on I/O failure.
void write_report(const ExperimentReport& report, const std::string& dir);

struct NormalityReport {
  int n = 0;
  int reps = 0;
  Eigen::VectorXd theta0;
  Eigen::MatrixXd empirical_cov;    // sample covariance of sqrt(n) (theta_tilde - theta0)
  Eigen::MatrixXd asymptotic;       // A
  double rel_frobenius = 0.0;       // |empirical - A|_F / |A|_F
  Eigen::VectorXd mean_scaled_error;  // mean of sqrt(n) (theta_tilde - theta0)
  Eigen::VectorXd bias_band;          // 3 sqrt(diag(A) / reps)
  bool bias_within_band = false;
  int failures = 0;
};

/// Monte Carlo check of the asymptotic covariance for the distributed
/// estimator configured in opts.estimator (MBE by default). Throws
/// InsufficientReplicates when reps < 2.
NormalityReport normality_check(const Scenario& scenario, int n, int reps, int hops, std::uint64_t seed,
                                const ExperimentOptions& opts);

struct LocalCondition {
  int vertex = 0;
  int hops = 1;
  int p_i = 0;
  int s_i = 0;
  int max_class_size = 0;
};

struct ConditionReport {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  int max_global_class_size = 0;
  std::vector<LocalCondition> locals;  // every vertex, hops 1 and 2
};

/// Eigenvalues are NaN when the scenario carries no k_true.
ConditionReport condition_report(const Scenario& scenario);

}  // namespace rcon
