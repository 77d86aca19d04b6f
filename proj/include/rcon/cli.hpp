#pragma once

// Command-line front end. Everything lives here rather than in main() so the
// commands can be driven from tests with captured streams.
//
// Exit codes: 0 success, 1 runtime estimation failure, 2 configuration or
// validation error.

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcon/bench.hpp"
#include "rcon/distributed.hpp"

namespace rcon::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Bad configuration: exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BenchmarkPlan {
  std::string name;
  std::vector<std::string> scenarios;
  std::vector<int> n_list;
  int reps = 1;
  std::vector<Method> methods;
};

/// table2-desk, figure2-desk, timing-desk and grid-desk.
const std::vector<BenchmarkPlan>& benchmark_presets();
std::optional<BenchmarkPlan> find_preset(const std::string& name);

/// Headerless CSV of floats. Throws ConfigError on unreadable files or
/// ragged rows.
Eigen::MatrixXd read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);

/// Runs one command line. argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rcon::cli
