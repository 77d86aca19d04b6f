#include "rcon/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <regex>
#include <sstream>

#include "rcon/asymptotic.hpp"
#include "rcon/errors.hpp"
#include "rcon/linalg.hpp"
#include "rcon/parallel.hpp"
#include "rcon/seeding.hpp"

namespace rcon {

namespace {

// Seed stream tags.
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kMethodStream = 2;
constexpr std::uint64_t kNormalityData = 3;
constexpr std::uint64_t kNormalityChain = 4;

struct Builder {
  int p;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> vc;
  std::vector<std::vector<Edge>> ec;
  Eigen::MatrixXd k;

  explicit Builder(int dim) : p(dim), k(Eigen::MatrixXd::Zero(dim, dim)) {}

  // 1-based helpers, values set symmetrically.
  void diag(int i, double v) { k(i - 1, i - 1) = v; }
  Edge edge(int i, int j, double v) {
    Edge e(i - 1, j - 1);
    edges.push_back(e);
    k(e.u, e.v) = k(e.v, e.u) = v;
    return e;
  }

  Scenario finish(std::string name, std::string notes) {
    Scenario s{std::move(name), ColouredGraph(p, edges, vc, ec), {}, {}, std::move(notes)};
    const RconSpec spec = build_spec(s.graph);
    auto proj = theta_of_k(spec, k);
    if (!proj.consistent) throw NumericalError("scenario " + s.name + ": values break the colouring");
    s.theta_true = proj.theta;
    s.k_true = k_of_theta(spec, s.theta_true);
    if (!cone_check(spec, s.k_true).in_cone()) throw NotPositiveDefinite("scenario " + s.name + ": K not in the cone");
    return s;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) out += (out.empty() ? "" : ";") + f;
  return out;
}

}  // namespace

Scenario scenario_cycle(int p, char pattern) {
  if (p < 4 || p % 2 != 0) throw InvalidArgument("cycle scenario needs an even p >= 4, got " + std::to_string(p));
  if (pattern != 'a' && pattern != 'b' && pattern != 'c') {
    throw InvalidArgument(std::string("unknown cycle pattern '") + pattern + "' (expected a, b or c)");
  }
  Builder b(p);
  std::vector<int> odd_v, even_v;
  for (int i = 1; i <= p; ++i) {
    const bool odd = i % 2 == 1;
    double v = 0.0;
    switch (pattern) {
      case 'a': v = odd ? 0.1 : 0.03; break;
      case 'b': v = odd ? 0.1 : 0.3; break;
      default: v = odd ? 0.1 + 0.1 * i : 0.03 + 0.01 * i; break;
    }
    b.diag(i, v);
    (odd ? odd_v : even_v).push_back(i - 1);
  }
  if (pattern == 'c') {
    for (int v = 0; v < p; ++v) b.vc.push_back({v});
  } else {
    b.vc = {odd_v, even_v};
  }

  std::vector<Edge> odd_e, even_e;
  for (int i = 1; i < p; ++i) {
    const bool odd = i % 2 == 1;
    double v = 0.0;
    switch (pattern) {
      case 'b': v = odd ? 0.01 + 0.001 * i : 0.01 + 0.002 * i; break;
      default: v = odd ? 0.01 : 0.02; break;
    }
    Edge e = b.edge(i, i + 1, v);
    if (pattern == 'b') {
      b.ec.push_back({e});
    } else {
      (odd ? odd_e : even_e).push_back(e);
    }
  }
  Edge closing = b.edge(1, p, pattern == 'b' ? 0.01 : 0.02);
  if (pattern == 'b') {
    b.ec.push_back({closing});
  } else {
    even_e.push_back(closing);
    b.ec = {odd_e, even_e};
  }
  const char* colouring = pattern == 'a'   ? "vertex and edge colours"
                          : pattern == 'b' ? "vertex colours, free edges"
                                           : "edge colours, free vertices";
  return b.finish("cycle-" + std::to_string(p) + "-" + pattern,
                  "cycle of length " + std::to_string(p) + ", " + colouring);
}

Scenario scenario_grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw InvalidArgument("grid needs positive dimensions");
  Builder b(rows * cols);
  auto vid = [cols](int i, int j) { return i + cols * (j - 1); };
  for (int v = 1; v <= rows * cols; ++v) {
    b.diag(v, 10.0 + 0.01 * v);
    b.vc.push_back({v - 1});
  }
  std::vector<Edge> horizontal;
  for (int j = 1; j <= rows; ++j) {
    for (int i = 1; i < cols; ++i) horizontal.push_back(b.edge(vid(i, j), vid(i + 1, j), 1.0));
  }
  if (!horizontal.empty()) b.ec.push_back(horizontal);
  for (int j = 1; j < rows; ++j) {
    for (int i = 1; i <= cols; ++i) b.ec.push_back({b.edge(vid(i, j), vid(i, j + 1), 1.0 + 0.01 * i + 0.1 * j)});
  }
  return b.finish("grid-" + std::to_string(rows) + "x" + std::to_string(cols),
                  "grid, horizontal edges share one colour, everything else free");
}

Scenario scenario_by_name(const std::string& name) {
  std::smatch m;
  static const std::regex cycle(R"(cycle-(\d+)-([abc]))");
  static const std::regex grid(R"(grid-(\d+)x(\d+))");
  if (std::regex_match(name, m, cycle)) return scenario_cycle(std::stoi(m[1]), m[2].str()[0]);
  if (std::regex_match(name, m, grid)) return scenario_grid(std::stoi(m[1]), std::stoi(m[2]));
  throw InvalidArgument("unknown scenario '" + name + "' (expected cycle-<p>-<a|b|c> or grid-<rows>x<cols>)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::MbeOneHop: return "MBE-1hop";
    case Method::MbeTwoHop: return "MBE-2hop";
    case Method::Gbe: return "GBE";
    case Method::Gmle: return "GMLE";
    case Method::DmleOneHop: return "DMLE-1hop";
    case Method::DmleTwoHop: return "DMLE-2hop";
  }
  return "?";
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> all{Method::MbeOneHop, Method::MbeTwoHop, Method::Gbe,
                                       Method::Gmle,      Method::DmleOneHop, Method::DmleTwoHop};
  return all;
}

Method method_from_string(const std::string& name) {
  for (Method m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  throw InvalidArgument("unknown method '" + name + "' (expected MBE-1hop, MBE-2hop, GBE, GMLE, DMLE-1hop or DMLE-2hop)");
}

int method_hops(Method m) {
  switch (m) {
    case Method::MbeOneHop:
    case Method::DmleOneHop: return 1;
    case Method::MbeTwoHop:
    case Method::DmleTwoHop: return 2;
    default: return 0;
  }
}

namespace {

GlobalEstimate run_method(Method m, const Scenario& sc, const Eigen::MatrixXd& data, const EstimatorConfig& base,
                          std::uint64_t seed) {
  EstimatorConfig cfg = base;
  switch (m) {
    case Method::Gbe: return estimate_global_bayes(sc.graph, data, cfg, seed);
    case Method::Gmle: return estimate_global_mle(sc.graph, data, cfg);
    case Method::MbeOneHop:
    case Method::MbeTwoHop:
      cfg.method = EstimationMethod::Bayes;
      return estimate_distributed(sc.graph, data, method_hops(m), cfg, seed, 1);
    case Method::DmleOneHop:
    case Method::DmleTwoHop:
      cfg.method = EstimationMethod::Mle;
      return estimate_distributed(sc.graph, data, method_hops(m), cfg, seed, 1);
  }
  throw InvalidArgument("unknown method");
}

}  // namespace

ExperimentReport run_experiment(const Scenario& scenario, const std::vector<int>& n_list, int reps,
                                const std::vector<Method>& methods, std::uint64_t seed,
                                const ExperimentOptions& opts) {
  if (reps < 1) throw InvalidArgument("reps must be at least 1");
  if (methods.empty()) throw InvalidArgument("no methods given");
  for (int n : n_list) {
    if (n < 1) throw InvalidArgument("sample sizes must be positive");
  }
  struct Cell {
    int n;
    int rep;
  };
  std::vector<Cell> cells;
  for (int n : n_list) {
    for (int r = 0; r < reps; ++r) cells.push_back({n, r});
  }
  std::vector<std::vector<ExperimentRow>> rows(cells.size());
  std::vector<std::vector<CellFailure>> failures(cells.size());
  std::mutex log_mutex;

  auto errors = parallel_for(static_cast<int>(cells.size()), opts.workers, [&](int c) {
    const auto [n, rep] = cells[c];
    const auto data_seed = derive_seed(seed, {kDataStream, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)});
    const auto method_seed =
        derive_seed(seed, {kMethodStream, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)});
    const Eigen::MatrixXd data = simulate_data(scenario.k_true, n, data_seed);
    for (Method m : methods) {
      const auto start = std::chrono::steady_clock::now();
      try {
        GlobalEstimate est = run_method(m, scenario, data, opts.estimator, method_seed);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        std::vector<std::string> flags;
        if (!est.positive_definite) flags.push_back("not_pd");
        if (!est.mle_converged) flags.push_back("mle_not_converged");
        rows[c].push_back(ExperimentRow{scenario.name, to_string(m), method_hops(m), n, rep, method_seed,
                                        nmse(est.k_mat, scenario.k_true),
                                        opts.record_time ? elapsed.count() : 0.0, join_flags(flags)});
        if (opts.verbose) {
          std::lock_guard<std::mutex> lock(log_mutex);
          std::cerr << scenario.name << " n=" << n << " rep=" << rep << " " << to_string(m)
                    << " nmse=" << rows[c].back().nmse << " time=" << elapsed.count() << "s\n";
        }
      } catch (const std::exception& e) {
        failures[c].push_back(CellFailure{to_string(m), n, rep, e.what()});
        if (opts.verbose) {
          std::lock_guard<std::mutex> lock(log_mutex);
          std::cerr << scenario.name << " n=" << n << " rep=" << rep << " " << to_string(m) << " FAILED: " << e.what()
                    << "\n";
        }
      }
    }
  });

  ExperimentReport report;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (errors[c]) {
      // Data simulation itself failed: every method of the cell is lost.
      std::string what = "unknown error";
      try {
        std::rethrow_exception(errors[c]);
      } catch (const std::exception& e) {
        what = e.what();
      }
      for (Method m : methods) report.failures.push_back(CellFailure{to_string(m), cells[c].n, cells[c].rep, what});
      continue;
    }
    report.rows.insert(report.rows.end(), rows[c].begin(), rows[c].end());
    report.failures.insert(report.failures.end(), failures[c].begin(), failures[c].end());
  }
  report.aggregates = aggregate(report.rows);
  return report;
}

std::vector<AggregateRow> aggregate(const std::vector<ExperimentRow>& rows) {
  std::vector<AggregateRow> out;
  std::map<std::tuple<std::string, std::string, int>, std::size_t> index;
  std::vector<std::vector<const ExperimentRow*>> members;
  for (const auto& r : rows) {
    auto key = std::make_tuple(r.scenario, r.method, r.n);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back(AggregateRow{r.scenario, r.method, r.hops, r.n, 0, 0.0, 0.0, 0.0});
      members.emplace_back();
    }
    members[it->second].push_back(&r);
  }
  for (std::size_t a = 0; a < out.size(); ++a) {
    const auto& ms = members[a];
    const double cnt = static_cast<double>(ms.size());
    double sum = 0.0, tsum = 0.0;
    for (const auto* r : ms) {
      sum += r->nmse;
      tsum += r->wall_time_s;
    }
    const double mean = sum / cnt;
    double ss = 0.0;
    for (const auto* r : ms) ss += (r->nmse - mean) * (r->nmse - mean);
    out[a].count = static_cast<int>(ms.size());
    out[a].nmse_mean = mean;
    out[a].nmse_std = ms.size() > 1 ? std::sqrt(ss / (cnt - 1.0)) : 0.0;
    out[a].time_mean_s = tsum / cnt;
  }
  return out;
}

std::string report_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream os;
  os << "scenario,method,hops,n,replicate,seed,nmse,wall_time_s,flags\n";
  for (const auto& r : rows) {
    os << r.scenario << ',' << r.method << ',' << r.hops << ',' << r.n << ',' << r.replicate << ',' << r.seed << ','
       << fmt(r.nmse) << ',' << fmt(r.wall_time_s) << ',' << r.flags << '\n';
  }
  return os.str();
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream os;
  os << "scenario,method,hops,n,nmse_mean,nmse_std,time_mean_s\n";
  for (const auto& r : rows) {
    os << r.scenario << ',' << r.method << ',' << r.hops << ',' << r.n << ',' << fmt(r.nmse_mean) << ','
       << fmt(r.nmse_std) << ',' << fmt(r.time_mean_s) << '\n';
  }
  return os.str();
}

std::string plot_csv(const std::vector<AggregateRow>& rows) {
  std::vector<std::string> methods;
  std::vector<std::pair<std::string, int>> keys;
  std::map<std::pair<std::string, int>, std::map<std::string, double>> table;
  for (const auto& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    auto key = std::make_pair(r.scenario, r.n);
    if (!table.count(key)) keys.push_back(key);
    table[key][r.method] = r.nmse_mean;
  }
  std::ostringstream os;
  os << "scenario,n";
  for (const auto& m : methods) os << ',' << m;
  os << '\n';
  for (const auto& key : keys) {
    os << key.first << ',' << key.second;
    for (const auto& m : methods) {
      os << ',';
      auto it = table[key].find(m);
      if (it != table[key].end()) os << fmt(it->second);
    }
    os << '\n';
  }
  return os.str();
}

void write_report(const ExperimentReport& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
  auto write = [&](const std::string& file, const std::string& text) {
    const auto path = std::filesystem::path(dir) / file;
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
  };
  write("report.csv", report_csv(report.rows));
  write("aggregate.csv", aggregate_csv(report.aggregates));
  write("plot.csv", plot_csv(report.aggregates));
}

NormalityReport normality_check(const Scenario& scenario, int n, int reps, int hops, std::uint64_t seed,
                                const ExperimentOptions& opts) {
  if (reps < 2) throw InsufficientReplicates("normality check needs at least 2 replicates, got " + std::to_string(reps));
  if (n < 1) throw InvalidArgument("sample size must be positive");
  const int m = static_cast<int>(scenario.theta_true.size());
  std::vector<Eigen::VectorXd> estimates(reps);
  std::vector<char> ok(reps, 0);
  parallel_for(reps, opts.workers, [&](int r) {
    const auto rr = static_cast<std::uint64_t>(r);
    const Eigen::MatrixXd data = simulate_data(scenario.k_true, n, derive_seed(seed, {kNormalityData, rr}));
    GlobalEstimate est =
        estimate_distributed(scenario.graph, data, hops, opts.estimator, derive_seed(seed, {kNormalityChain, rr}), 1);
    estimates[r] = est.theta;
    ok[r] = 1;
  });

  NormalityReport rep;
  rep.n = n;
  rep.theta0 = scenario.theta_true;
  std::vector<Eigen::VectorXd> z;
  for (int r = 0; r < reps; ++r) {
    if (ok[r]) {
      z.push_back(std::sqrt(static_cast<double>(n)) * (estimates[r] - scenario.theta_true));
    } else {
      ++rep.failures;
    }
  }
  if (z.size() < 2) throw InsufficientReplicates("fewer than 2 replicates succeeded");
  rep.reps = static_cast<int>(z.size());
  rep.mean_scaled_error = Eigen::VectorXd::Zero(m);
  for (const auto& v : z) rep.mean_scaled_error += v;
  rep.mean_scaled_error /= rep.reps;
  rep.empirical_cov = Eigen::MatrixXd::Zero(m, m);
  for (const auto& v : z) {
    const Eigen::VectorXd d = v - rep.mean_scaled_error;
    rep.empirical_cov += d * d.transpose();
  }
  rep.empirical_cov /= (rep.reps - 1.0);

  rep.asymptotic = asymptotic_cov(scenario.graph, scenario.theta_true, hops, opts.estimator.combine).a;
  rep.rel_frobenius = (rep.empirical_cov - rep.asymptotic).norm() / rep.asymptotic.norm();
  rep.bias_band = 3.0 * (rep.asymptotic.diagonal() / rep.reps).cwiseSqrt();
  rep.bias_within_band = (rep.mean_scaled_error.cwiseAbs().array() <= rep.bias_band.array()).all();
  return rep;
}

ConditionReport condition_report(const Scenario& scenario) {
  ConditionReport rep;
  if (scenario.k_true.size() > 0) {
    rep.lambda_min = linalg::min_eigenvalue(scenario.k_true);
    rep.lambda_max = linalg::max_eigenvalue(scenario.k_true);
  } else {
    rep.lambda_min = rep.lambda_max = std::numeric_limits<double>::quiet_NaN();
  }
  const RconSpec spec = build_spec(scenario.graph);
  for (int r = 0; r < spec.num_params(); ++r) rep.max_global_class_size = std::max(rep.max_global_class_size, spec.class_size(r));
  for (int hops = 1; hops <= 2; ++hops) {
    for (int i = 0; i < scenario.graph.num_vertices(); ++i) {
      LocalModel lm = local_model(scenario.graph, i, hops);
      const RconSpec ls = build_spec(lm.graph);
      LocalCondition lc{i, hops, lm.size(), ls.num_params(), 0};
      for (int r = 0; r < ls.num_params(); ++r) lc.max_class_size = std::max(lc.max_class_size, ls.class_size(r));
      rep.locals.push_back(lc);
    }
  }
  return rep;
}

}  // namespace rcon
