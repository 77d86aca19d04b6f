#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "rcon/cli.hpp"
#include "rcon/linalg.hpp"

using namespace rcon;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rcon");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return (path / name).string();
  }
  std::string str(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli simulate") {
  Result a = run_cli({"simulate", "--preset", "cycle-20-a", "--n", "100", "--seed", "7"});
  Result b = run_cli({"simulate", "--preset", "cycle-20-a", "--n", "100", "--seed", "7"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  std::stringstream lines(a.out);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 19);
  }
  CHECK(rows == 100);

  Result none = run_cli({"simulate"});
  CHECK(none.code == 2);
  CHECK(none.err.find("no model specified") != std::string::npos);

  TempDir dir("rcon_cli_simulate");
  const auto bad = dir.file("bad.json", R"({"K": [[1, 2], [2, 1]]})");
  Result nonpd = run_cli({"simulate", "--config", bad});
  CHECK(nonpd.code == 2);
  CHECK(nonpd.err.find("K not positive definite") != std::string::npos);

  const auto typo = dir.file("typo.json", R"({"scenrio": "cycle-20-a"})");
  CHECK(run_cli({"simulate", "--config", typo}).code == 2);
  CHECK(run_cli({"simulate", "--bogus"}).code == 2);
  CHECK(run_cli({}).code == 2);
}

TEST_CASE("cli estimate on toys") {
  TempDir dir("rcon_cli_estimate");
  // Complete graph, singleton classes: GMLE is the inverse sample covariance.
  const auto cfg = dir.file("complete.json", R"({"graph": {"p": 3, "edges": [[1,2],[2,3],[1,3]]},
      "K": [[2, 0.5, 0.3], [0.5, 1.5, 0.2], [0.3, 0.2, 1.0]], "n": 50, "seed": 3})");
  REQUIRE(run_cli({"simulate", "--config", cfg, "--out", dir.str("sim")}).code == 0);
  const auto data_path = dir.str("sim/data.csv");
  Result r = run_cli({"estimate", "--config", cfg, "--data", data_path, "--method", "GMLE", "--out", dir.str("est")});
  REQUIRE(r.code == 0);
  const Eigen::MatrixXd x = cli::read_matrix_csv(data_path);
  const Eigen::MatrixXd k_hat = cli::read_matrix_csv(dir.str("est/k_hat.csv"));
  const Eigen::MatrixXd s = x.transpose() * x / x.rows();
  CHECK((k_hat - linalg::inverse(*linalg::cholesky(s))).norm() < 1e-7 * k_hat.norm());
  auto report = nlohmann::json::parse(slurp(dir.str("est/estimate.json")));
  CHECK(report["method"] == "GMLE");
  CHECK(report.contains("nmse"));

  // One vertex: GBE is the gamma posterior mean (delta + n) / (1 + sum x^2).
  const auto one = dir.file("one.json", R"({"graph": {"p": 1}, "K": [[4.0]], "n": 40, "seed": 5})");
  REQUIRE(run_cli({"simulate", "--config", one, "--out", dir.str("one")}).code == 0);
  const Eigen::MatrixXd y = cli::read_matrix_csv(dir.str("one/data.csv"));
  Result g = run_cli({"estimate", "--config", one, "--data", dir.str("one/data.csv"), "--method", "GBE", "--iters",
                      "20000"});
  REQUIRE(g.code == 0);
  const double k = nlohmann::json::parse(g.out)["theta"][0].get<double>();
  CHECK(k == doctest::Approx((3.0 + 40) / (1.0 + y.squaredNorm())).epsilon(0.02));

  // Column mismatch and contradictory hops are configuration errors.
  Result mismatch = run_cli({"estimate", "--preset", "cycle-6-a", "--data", data_path});
  CHECK(mismatch.code == 2);
  CHECK(mismatch.err.find("columns") != std::string::npos);
  CHECK(run_cli({"estimate", "--config", cfg, "--data", data_path, "--method", "MBE-1hop", "--hops", "2"}).code == 2);
  CHECK(run_cli({"estimate", "--config", cfg}).code == 2);

  // Unbounded local likelihoods are runtime failures with per-vertex detail.
  const auto single = dir.file("single.csv", "1,2,3\n");
  Result fail = run_cli({"estimate", "--config", cfg, "--data", single, "--method", "DMLE-1hop"});
  CHECK(fail.code == 1);
  CHECK(fail.err.find("vertex 2") != std::string::npos);
}

TEST_CASE("cli estimate reports nmse on the 20-cycle") {
  TempDir dir("rcon_cli_cycle");
  REQUIRE(run_cli({"simulate", "--preset", "cycle-20-a", "--n", "100", "--out", dir.str("sim")}).code == 0);
  Result r = run_cli({"estimate", "--preset", "cycle-20-a", "--data", dir.str("sim/data.csv"), "--method", "MBE",
                      "--hops", "1", "--combine", "paper"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["method"] == "MBE-1hop");
  CHECK(j["combine"] == "paper");
  CHECK(j["nmse"].get<double>() < 0.1);
}

TEST_CASE("cli benchmark") {
  TempDir dir("rcon_cli_bench");
  CHECK(run_cli({"benchmark", "--preset", "nope"}).code == 2);
  CHECK(run_cli({"benchmark"}).code == 2);
  const auto cfg = dir.file("bench.json", R"({"benchmark": {"scenarios": ["cycle-6-a", "cycle-6-c"], "n": [30, 60],
      "reps": 2, "methods": ["MBE-1hop", "GMLE", "DMLE-2hop"]}, "sampler": {"iters": 200, "burn_in": 100}})");
  Result a = run_cli({"benchmark", "--config", cfg, "--workers", "1", "--no-timing", "--out", dir.str("a")});
  Result b = run_cli({"benchmark", "--config", cfg, "--workers", "3", "--no-timing", "--out", dir.str("b")});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  for (const char* f : {"report.csv", "aggregate.csv", "plot.csv"}) {
    CHECK(slurp(dir.str(std::string("a/") + f)) == slurp(dir.str(std::string("b/") + f)));
  }
  const std::string report = slurp(dir.str("a/report.csv"));
  CHECK(std::count(report.begin(), report.end(), '\n') == 1 + 2 * 2 * 2 * 3);
  CHECK(a.out.rfind("scenario,method,hops,n,nmse_mean,nmse_std,time_mean_s", 0) == 0);
}

TEST_CASE("cli check") {
  Result grid = run_cli({"check", "--preset", "grid-10x10"});
  CHECK(grid.code == 0);
  CHECK(grid.out.find("hops 2 (p_i, S_i):") != std::string::npos);
  CHECK(grid.out.find("colouring: valid") != std::string::npos);

  TempDir dir("rcon_cli_check");
  const auto bad = dir.file("bad.json", R"({"graph": {"p": 3, "edges": [[1,2],[2,3]],
      "vertex_classes": [[1,2]], "edge_classes": [[[1,2]],[[1,3]]]}})");
  Result r = run_cli({"check", "--config", bad});
  CHECK(r.code == 2);
  CHECK(r.err.find("UncoveredVertex") != std::string::npos);
  CHECK(r.err.find("UnknownEdge") != std::string::npos);
  CHECK(r.err.find("UncoveredEdge") != std::string::npos);
  CHECK(run_cli({"check", "--preset", "table2-desk"}).code == 0);
}
