#include "rcon/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "rcon/errors.hpp"
#include "rcon/linalg.hpp"
#include "rcon/parallel.hpp"
#include "rcon/seeding.hpp"

namespace rcon::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<BenchmarkPlan>& benchmark_presets() {
  static const std::vector<BenchmarkPlan> presets{
      {"table2-desk",
       {"cycle-20-a", "cycle-20-b", "cycle-20-c"},
       {100},
       20,
       {Method::MbeOneHop, Method::MbeTwoHop, Method::Gbe, Method::Gmle}},
      {"figure2-desk",
       {"cycle-20-a", "cycle-20-b", "cycle-20-c"},
       {50, 75, 100},
       20,
       {Method::MbeOneHop, Method::MbeTwoHop, Method::Gbe, Method::Gmle}},
      {"timing-desk",
       {"cycle-20-a", "cycle-20-b", "cycle-20-c"},
       {100},
       3,
       {Method::MbeOneHop, Method::MbeTwoHop, Method::Gbe}},
      {"grid-desk", {"grid-10x10"}, {100}, 1, {Method::MbeOneHop}},
  };
  return presets;
}

std::optional<BenchmarkPlan> find_preset(const std::string& name) {
  for (const auto& p : benchmark_presets()) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(field, &used));
        if (field.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": not a number: '" + field + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(rows.front().size()) +
                        " columns, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError(path + " is empty");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  char buf[32];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("cannot write " + path);
}

namespace {

struct Flags {
  std::string config;
  std::string preset;
  std::string method;
  std::string combine;
  std::string data;
  std::string out;
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> hops;
  std::optional<int> n;
  std::optional<int> reps;
  std::optional<int> iters;
  std::optional<int> burn_in;
  bool verbose = false;
  bool no_timing = false;
};

struct Model {
  std::string name;
  std::optional<ColouredGraph> graph;
  std::optional<Eigen::MatrixXd> k_true;
};

class Context {
 public:
  Context(const Flags& flags, std::ostream& out, std::ostream& err) : flags_(flags), out_(out), err_(err) {
    if (!flags.config.empty()) {
      std::ifstream in(flags.config);
      if (!in) throw ConfigError("cannot read config " + flags.config);
      try {
        doc_ = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError("config " + flags.config + " is not valid JSON: " + e.what());
      }
      if (!doc_.is_object()) throw ConfigError("config must be a JSON object");
      base_ = fs::path(flags.config).parent_path();
      static const std::vector<std::string> known{"scenario", "graph",   "theta",  "K",     "n",
                                                  "seed",     "workers", "out",    "data",  "method",
                                                  "hops",     "combine", "sampler", "mle", "benchmark"};
      for (auto it = doc_.begin(); it != doc_.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
          throw ConfigError("unknown config key '" + it.key() + "'");
        }
      }
    }
  }

  std::uint64_t seed() const { return flags_.seed ? *flags_.seed : doc_.value("seed", std::uint64_t{1}); }

  int workers() const {
    const int w = flags_.workers ? *flags_.workers : doc_.value("workers", default_workers());
    if (w < 1) throw ConfigError("workers must be at least 1");
    return w;
  }

  bool verbose() const { return flags_.verbose; }
  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }

  std::string out_dir() const {
    if (!flags_.out.empty()) return flags_.out;
    if (doc_.contains("out")) return path_of(doc_["out"].get<std::string>());
    return {};
  }

  std::string path_of(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() || base_.empty() ? path.string() : (base_ / path).string();
  }

  std::string data_path() const {
    if (!flags_.data.empty()) return flags_.data;
    if (doc_.contains("data")) return path_of(doc_["data"].get<std::string>());
    return {};
  }

  int n() const {
    const int n = flags_.n ? *flags_.n : doc_.value("n", 100);
    if (n < 1) throw ConfigError("n must be at least 1");
    return n;
  }

  EstimatorConfig estimator() const {
    EstimatorConfig cfg;
    if (doc_.contains("sampler")) {
      const json& s = doc_["sampler"];
      cfg.delta = s.value("delta", cfg.delta);
      cfg.sampler.iters = s.value("iters", cfg.sampler.iters);
      cfg.sampler.burn_in = s.value("burn_in", cfg.sampler.burn_in);
      cfg.sampler.thin = s.value("thin", cfg.sampler.thin);
      if (s.contains("mode")) cfg.sampler.mode = sampler_mode_from_string(s["mode"].get<std::string>());
      if (s.contains("D")) {
        const std::string d = s["D"].get<std::string>();
        if (d != "identity") cfg.prior_d = read_matrix_csv(path_of(d));
      }
    }
    if (doc_.contains("mle")) {
      cfg.mle_tol = doc_["mle"].value("tol", cfg.mle_tol);
      cfg.mle_max_iter = doc_["mle"].value("max_iter", cfg.mle_max_iter);
    }
    if (flags_.iters) cfg.sampler.iters = *flags_.iters;
    if (flags_.burn_in) cfg.sampler.burn_in = *flags_.burn_in;
    if (!flags_.mode.empty()) cfg.sampler.mode = sampler_mode_from_string(flags_.mode);
    const std::string combine = !flags_.combine.empty() ? flags_.combine : doc_.value("combine", std::string("self"));
    cfg.combine = combine_mode_from_string(combine);

    if (!(cfg.delta > 0.0)) throw ConfigError("sampler.delta must be positive");
    if (cfg.sampler.iters < 1) throw ConfigError("sampler.iters must be at least 1");
    if (cfg.sampler.burn_in < 0) throw ConfigError("sampler.burn_in must be non-negative");
    if (cfg.sampler.thin < 1) throw ConfigError("sampler.thin must be at least 1");
    if (!(cfg.mle_tol > 0.0) || cfg.mle_max_iter < 1) throw ConfigError("mle settings out of range");
    return cfg;
  }

  /// Method name with hops folded in: "MBE" + --hops 2 gives MBE-2hop.
  Method method() const {
    std::string name = !flags_.method.empty() ? flags_.method : doc_.value("method", std::string("MBE-1hop"));
    std::optional<int> hops = flags_.hops;
    if (!hops && doc_.contains("hops")) hops = doc_["hops"].get<int>();
    if (hops && *hops != 1 && *hops != 2) throw ConfigError("hops must be 1 or 2");
    if (name == "MBE" || name == "DMLE") name += "-" + std::to_string(hops.value_or(1)) + "hop";
    const Method m = method_from_string(name);
    if (hops && method_hops(m) != 0 && method_hops(m) != *hops) {
      throw ConfigError("--hops " + std::to_string(*hops) + " contradicts method " + name);
    }
    return m;
  }

  Model model() const {
    if (!flags_.preset.empty()) return from_scenario(flags_.preset);
    if (doc_.contains("scenario")) return from_scenario(doc_["scenario"].get<std::string>());
    Model m;
    if (doc_.contains("graph")) {
      m.graph = parse_graph(doc_["graph"]);
      m.name = "config";
    }
    if (doc_.contains("theta") && doc_.contains("K")) throw ConfigError("give theta or K, not both");
    if (doc_.contains("theta")) {
      if (!m.graph) throw ConfigError("theta needs a graph");
      const RconSpec spec = build_spec(*m.graph);
      const auto values = doc_["theta"].get<std::vector<double>>();
      if (static_cast<int>(values.size()) != spec.num_params()) {
        throw ConfigError("theta has " + std::to_string(values.size()) + " entries, the colouring has " +
                          std::to_string(spec.num_params()) + " classes");
      }
      Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(values.data(), values.size());
      m.k_true = k_of_theta(spec, theta);
      if (!linalg::cholesky(*m.k_true)) throw ConfigError("K not positive definite (from theta)");
    } else if (doc_.contains("K")) {
      const auto rows = doc_["K"].get<std::vector<std::vector<double>>>();
      const int p = static_cast<int>(rows.size());
      Eigen::MatrixXd k(p, p);
      for (int r = 0; r < p; ++r) {
        if (static_cast<int>(rows[r].size()) != p) throw ConfigError("K must be square");
        for (int c = 0; c < p; ++c) k(r, c) = rows[r][c];
      }
      if (p == 0) throw ConfigError("K is empty");
      if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + k.cwiseAbs().maxCoeff())) {
        throw ConfigError("K not symmetric");
      }
      if (!linalg::cholesky(k)) throw ConfigError("K not positive definite");
      if (m.graph) {
        if (m.graph->num_vertices() != p) throw ConfigError("K and graph disagree on p");
        const ConeReport cone = cone_check(build_spec(*m.graph), k);
        if (!cone.in_cone()) {
          std::string msg = "K does not follow the coloured graph:";
          for (const auto& pr : cone.problems) msg += "\n  " + pr;
          throw ConfigError(msg);
        }
      }
      m.k_true = k;
      if (m.name.empty()) m.name = "config";
    }
    if (!m.graph && !m.k_true) {
      throw ConfigError("no model specified (use --preset <scenario> or a config with scenario, graph or K)");
    }
    return m;
  }

  std::optional<BenchmarkPlan> plan() const {
    std::optional<BenchmarkPlan> plan;
    if (!flags_.preset.empty()) {
      plan = find_preset(flags_.preset);
      if (!plan) {
        std::string known;
        for (const auto& p : benchmark_presets()) known += (known.empty() ? "" : ", ") + p.name;
        throw ConfigError("unknown preset '" + flags_.preset + "' (known: " + known + ")");
      }
    } else if (doc_.contains("benchmark")) {
      const json& b = doc_["benchmark"];
      plan = BenchmarkPlan{"config", {}, {100}, 1, {}};
      if (b.contains("scenarios")) plan->scenarios = b["scenarios"].get<std::vector<std::string>>();
      if (b.contains("n")) plan->n_list = b["n"].get<std::vector<int>>();
      plan->reps = b.value("reps", 1);
      if (b.contains("methods")) {
        for (const auto& name : b["methods"].get<std::vector<std::string>>()) plan->methods.push_back(method_from_string(name));
      } else {
        plan->methods = {Method::MbeOneHop, Method::MbeTwoHop, Method::Gbe, Method::Gmle};
      }
      if (plan->scenarios.empty()) throw ConfigError("benchmark.scenarios is empty");
    } else {
      return std::nullopt;
    }
    if (flags_.n) plan->n_list = {*flags_.n};
    if (flags_.reps) plan->reps = *flags_.reps;
    if (!flags_.method.empty() || flags_.hops) plan->methods = {method()};
    if (plan->reps < 1) throw ConfigError("reps must be at least 1");
    for (int n : plan->n_list) {
      if (n < 1) throw ConfigError("sample sizes must be positive");
    }
    return plan;
  }

  bool record_time() const { return !flags_.no_timing; }
  const std::string& preset_flag() const { return flags_.preset; }

 private:
  static Model from_scenario(const std::string& name) {
    Scenario sc = scenario_by_name(name);
    return Model{sc.name, sc.graph, sc.k_true};
  }

  static Edge edge_of(const json& e) {
    if (!e.is_array() || e.size() != 2) throw ConfigError("edges are [a, b] pairs, got " + e.dump());
    return Edge(e[0].get<int>() - 1, e[1].get<int>() - 1);
  }

  static ColouredGraph parse_graph(const json& j) {
    const int p = j.at("p").get<int>();
    if (p < 1) throw ConfigError("graph.p must be at least 1");
    std::vector<Edge> edges;
    if (j.contains("edges")) {
      for (const auto& e : j["edges"]) edges.push_back(edge_of(e));
    }
    std::vector<std::vector<int>> vc;
    if (j.contains("vertex_classes")) {
      for (const auto& cls : j["vertex_classes"]) {
        std::vector<int> c;
        for (int v : cls.get<std::vector<int>>()) c.push_back(v - 1);
        vc.push_back(std::move(c));
      }
    } else {
      for (int v = 0; v < p; ++v) vc.push_back({v});
    }
    std::vector<std::vector<Edge>> ec;
    if (j.contains("edge_classes")) {
      for (const auto& cls : j["edge_classes"]) {
        std::vector<Edge> c;
        for (const auto& e : cls) c.push_back(edge_of(e));
        ec.push_back(std::move(c));
      }
    } else {
      for (const Edge& e : edges) ec.push_back({e});
    }
    ColouredGraph g;
    try {
      g = ColouredGraph(p, edges, vc, ec);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("invalid graph: ") + e.what());
    }
    const ValidationReport report = validate_coloured_graph(g);
    if (!report.ok()) {
      std::string msg = "invalid colouring (" + std::to_string(report.violations.size()) + " violation(s)):";
      for (const auto& v : report.violations) msg += "\n  " + std::string(to_string(v.kind)) + ": " + v.message;
      throw ConfigError(msg);
    }
    return g;
  }

  const Flags& flags_;
  std::ostream& out_;
  std::ostream& err_;
  json doc_ = json::object();
  fs::path base_;
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
}

int cmd_simulate(Context& ctx) {
  const Model m = ctx.model();
  if (!m.k_true) throw ConfigError("no model specified: the graph needs theta or K to simulate from");
  const int n = ctx.n();
  Eigen::MatrixXd data;
  try {
    data = simulate_data(*m.k_true, n, ctx.seed());
  } catch (const NotPositiveDefinite&) {
    throw ConfigError("K not positive definite");
  }
  const std::string dir = ctx.out_dir();
  if (dir.empty()) {
    char buf[32];
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
      for (Eigen::Index c = 0; c < data.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", data(r, c));
        ctx.out() << (c ? "," : "") << buf;
      }
      ctx.out() << '\n';
    }
    return kExitOk;
  }
  ensure_dir(dir);
  write_matrix_csv((fs::path(dir) / "data.csv").string(), data);
  write_matrix_csv((fs::path(dir) / "k_true.csv").string(), *m.k_true);
  ctx.out() << "wrote " << n << " x " << data.cols() << " samples of " << m.name << " to "
            << (fs::path(dir) / "data.csv").string() << "\n";
  return kExitOk;
}

int cmd_estimate(Context& ctx) {
  const Model m = ctx.model();
  if (!m.graph) throw ConfigError("no graph specified: estimate needs a scenario or a config graph");
  const std::string data_path = ctx.data_path();
  if (data_path.empty()) throw ConfigError("no data given (use --data or the config key \"data\")");
  const Eigen::MatrixXd data = read_matrix_csv(data_path);
  if (data.cols() != m.graph->num_vertices()) {
    throw ConfigError("data has " + std::to_string(data.cols()) + " columns, the graph has " +
                      std::to_string(m.graph->num_vertices()) + " vertices");
  }
  const Method method = ctx.method();
  EstimatorConfig cfg = ctx.estimator();
  GlobalEstimate est;
  switch (method) {
    case Method::Gbe: est = estimate_global_bayes(*m.graph, data, cfg, ctx.seed()); break;
    case Method::Gmle: est = estimate_global_mle(*m.graph, data, cfg); break;
    default:
      cfg.method = (method == Method::MbeOneHop || method == Method::MbeTwoHop) ? EstimationMethod::Bayes
                                                                                 : EstimationMethod::Mle;
      est = estimate_distributed(*m.graph, data, method_hops(method), cfg, ctx.seed(), ctx.workers());
  }
  if (ctx.verbose()) {
    for (const auto& l : est.locals) {
      ctx.err() << "vertex " << l.centre + 1 << ": p_i=" << l.vertices.size() << " S_i=" << l.theta_local.size();
      if (cfg.method == EstimationMethod::Bayes) {
        ctx.err() << " min_accept=" << l.min_accept_rate;
      } else {
        ctx.err() << " iterations=" << l.mle_iterations << (l.mle_converged ? "" : " (not converged)");
      }
      ctx.err() << "\n";
    }
  }
  if (!est.positive_definite) ctx.err() << "warning: the combined estimate is not positive definite\n";
  const std::string report = report_json(est, m.k_true ? &*m.k_true : nullptr);
  const std::string dir = ctx.out_dir();
  if (dir.empty()) {
    ctx.out() << report << "\n";
    return kExitOk;
  }
  ensure_dir(dir);
  std::ofstream(fs::path(dir) / "estimate.json") << report << "\n";
  write_matrix_csv((fs::path(dir) / "k_hat.csv").string(), est.k_mat);
  ctx.out() << est.method << " estimate written to " << (fs::path(dir) / "estimate.json").string() << "\n";
  return kExitOk;
}

int cmd_benchmark(Context& ctx) {
  const auto plan = ctx.plan();
  if (!plan) throw ConfigError("no benchmark specified (use --preset or a config with a \"benchmark\" block)");
  ExperimentOptions opts;
  opts.estimator = ctx.estimator();
  opts.workers = ctx.workers();
  opts.record_time = ctx.record_time();
  opts.verbose = ctx.verbose();
  std::vector<Scenario> scenarios;
  for (const auto& name : plan->scenarios) scenarios.push_back(scenario_by_name(name));

  ExperimentReport total;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    ctx.err() << "[" << s + 1 << "/" << scenarios.size() << "] " << scenarios[s].name << ": " << plan->n_list.size()
              << " sample size(s) x " << plan->reps << " replicate(s) x " << plan->methods.size() << " method(s)\n";
    ExperimentReport r = run_experiment(scenarios[s], plan->n_list, plan->reps, plan->methods,
                                        derive_seed(ctx.seed(), {static_cast<std::uint64_t>(s)}), opts);
    total.rows.insert(total.rows.end(), r.rows.begin(), r.rows.end());
    total.failures.insert(total.failures.end(), r.failures.begin(), r.failures.end());
    for (const auto& f : r.failures) {
      ctx.err() << "  failed: " << f.method << " n=" << f.n << " replicate=" << f.replicate << ": " << f.message
                << "\n";
    }
  }
  total.aggregates = aggregate(total.rows);
  const std::string dir = ctx.out_dir().empty() ? "benchmark-out" : ctx.out_dir();
  write_report(total, dir);
  ctx.out() << aggregate_csv(total.aggregates);
  ctx.err() << "wrote " << total.rows.size() << " rows to " << dir << " (" << total.failures.size()
            << " failed cell(s))\n";
  return kExitOk;
}

void print_condition(Context& ctx, const Model& m) {
  std::ostream& out = ctx.out();
  out << "model: " << m.name << "\n";
  if (m.graph) {
    const ColouredGraph& g = *m.graph;
    out << "  vertices " << g.num_vertices() << ", edges " << g.edges().size() << ", vertex classes "
        << g.num_vertex_classes() << ", edge classes " << g.num_edge_classes() << "\n";
    out << "  colouring: valid\n";
  }
  Scenario sc{m.name, m.graph ? *m.graph : ColouredGraph(), {}, m.k_true ? *m.k_true : Eigen::MatrixXd(), ""};
  if (m.k_true) {
    out << "  K: positive definite, lambda_min " << linalg::min_eigenvalue(*m.k_true) << ", lambda_max "
        << linalg::max_eigenvalue(*m.k_true) << "\n";
  }
  if (!m.graph) return;
  const ConditionReport rep = condition_report(sc);
  out << "  largest class: " << rep.max_global_class_size << " entries\n";
  for (int hops = 1; hops <= 2; ++hops) {
    std::map<std::pair<int, int>, int> counts;
    int max_class = 0;
    for (const auto& l : rep.locals) {
      if (l.hops != hops) continue;
      ++counts[{l.p_i, l.s_i}];
      max_class = std::max(max_class, l.max_class_size);
      if (ctx.verbose()) {
        out << "    hops " << hops << " vertex " << l.vertex + 1 << ": p_i=" << l.p_i << " S_i=" << l.s_i
            << " max class " << l.max_class_size << "\n";
      }
    }
    out << "  hops " << hops << " (p_i, S_i):";
    for (const auto& [key, count] : counts) out << " (" << key.first << ", " << key.second << ") x" << count;
    out << "; largest local class " << max_class << " entries\n";
  }
}

int cmd_check(Context& ctx) {
  if (!ctx.preset_flag().empty()) {
    if (auto plan = find_preset(ctx.preset_flag())) {
      for (const auto& name : plan->scenarios) {
        Scenario sc = scenario_by_name(name);
        print_condition(ctx, Model{sc.name, sc.graph, sc.k_true});
      }
      return kExitOk;
    }
  }
  print_condition(ctx, ctx.model());
  return kExitOk;
}

void add_shared(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "master seed (default 1)");
  cmd->add_option("--workers", f.workers, "worker threads (default: hardware concurrency)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--preset", f.preset, "builtin scenario (cycle-20-a, grid-10x10, ...) or benchmark preset");
  cmd->add_option("--method", f.method, "MBE-1hop, MBE-2hop, GBE, GMLE, DMLE-1hop, DMLE-2hop (or MBE/DMLE with --hops)");
  cmd->add_option("--hops", f.hops, "neighbourhood radius, 1 or 2");
  cmd->add_option("--combine", f.combine, "paper or self");
  cmd->add_option("--n", f.n, "sample size");
  cmd->add_option("--data", f.data, "headerless CSV, one row per observation");
  cmd->add_option("--reps", f.reps, "benchmark replicates");
  cmd->add_option("--iters", f.iters, "sampler sweeps after burn-in");
  cmd->add_option("--burn-in", f.burn_in, "sampler burn-in sweeps");
  cmd->add_option("--sampler", f.mode, "psi or rw");
  cmd->add_flag("--no-timing", f.no_timing, "write wall_time_s = 0 so reruns are byte-identical");
  cmd->add_flag("-v,--verbose", f.verbose, "progress and per-vertex detail on stderr");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed Bayesian estimation of coloured Gaussian graphical models", "rcon"};
  app.require_subcommand(1);
  Flags flags;
  CLI::App* simulate = app.add_subcommand("simulate", "draw N(0, K^{-1}) data from a model");
  CLI::App* estimate = app.add_subcommand("estimate", "estimate K from a data file");
  CLI::App* benchmark = app.add_subcommand("benchmark", "run a simulation study");
  CLI::App* check = app.add_subcommand("check", "validate a model and print condition diagnostics");
  for (CLI::App* cmd : {simulate, estimate, benchmark, check}) add_shared(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    Context ctx(flags, out, err);
    if (*simulate) return cmd_simulate(ctx);
    if (*estimate) return cmd_estimate(ctx);
    if (*benchmark) return cmd_benchmark(ctx);
    return cmd_check(ctx);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "error: bad config value: " << e.what() << "\n";
    return kExitConfig;
  } catch (const EstimationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace rcon::cli
