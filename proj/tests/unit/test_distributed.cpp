#include <doctest.h>

#include <json.hpp>
#include <random>

#include "fixtures.hpp"
#include "rcon/asymptotic.hpp"
#include "rcon/bench.hpp"
#include "rcon/distributed.hpp"
#include "rcon/errors.hpp"
#include "rcon/linalg.hpp"
#include "rcon/metrics.hpp"

using namespace rcon;
using rcon::testing::e1;

namespace {

EstimatorConfig quick_bayes(int iters = 2000, int burn_in = 500) {
  EstimatorConfig cfg;
  cfg.sampler.iters = iters;
  cfg.sampler.burn_in = burn_in;
  return cfg;
}

// Locals whose parameter j reads 10 * (global class) + centre, or -999 for
// buffer classes, so the combined value is readable by hand.
std::vector<LocalEstimate> tagged_locals(const ColouredGraph& g, int hops) {
  std::vector<LocalEstimate> out;
  for (int i = 0; i < g.num_vertices(); ++i) {
    LocalModel lm = local_model(g, i, hops);
    LocalEstimate le;
    le.centre = i;
    le.hops = hops;
    le.vertices = lm.vertices;
    le.class_map = lm.class_map;
    le.theta_local.resize(lm.num_params());
    for (int j = 0; j < lm.num_params(); ++j) {
      le.theta_local(j) = lm.class_map[j] ? 10.0 * *lm.class_map[j] + i : -999.0;
    }
    out.push_back(std::move(le));
  }
  return out;
}

}  // namespace

TEST_CASE("combine averages the contributing centres by hand") {
  const ColouredGraph g = rcon::testing::cycle6_pattern_a();
  for (CombineMode mode : {CombineMode::SelfNormalizing, CombineMode::Paper}) {
    for (int hops : {1, 2}) {
      Combined c = combine(tagged_locals(g, hops), g, mode);
      // odd vertices: centres 0,2,4; even: 1,3,5; each edge class touches all six.
      CHECK(c.theta(0) == doctest::Approx(0.0 + 2.0));
      CHECK(c.theta(1) == doctest::Approx(10.0 + 3.0));
      CHECK(c.theta(2) == doctest::Approx(20.0 + 2.5));
      CHECK(c.theta(3) == doctest::Approx(30.0 + 2.5));
      CHECK(c.counts == std::vector<int>{3, 3, 6, 6});
    }
  }
}

TEST_CASE("paper and self-normalizing denominators differ on a coloured path") {
  // Path 1-2-3 with both edges in one class: 3 contributing centres, 2|E_k| = 4.
  ColouredGraph g(3, {e1(1, 2), e1(2, 3)}, {{0, 1, 2}}, {{e1(1, 2), e1(2, 3)}});
  auto locals = tagged_locals(g, 1);
  Combined self = combine(locals, g, CombineMode::SelfNormalizing);
  Combined paper = combine(locals, g, CombineMode::Paper);
  CHECK(self.counts[1] == 3);
  CHECK(self.theta(1) == doctest::Approx(10.0 + 1.0));
  CHECK(paper.theta(1) == doctest::Approx((3 * 10.0 + 0 + 1 + 2) / 4.0));
  CHECK(paper.theta(0) == doctest::Approx(self.theta(0)));
  CHECK(std::string(to_string(CombineMode::Paper)) == "paper");
  CHECK(combine_mode_from_string("self") == CombineMode::SelfNormalizing);
  CHECK_THROWS_AS(combine_mode_from_string("median"), InvalidArgument);
}

TEST_CASE("jacobian times stacked locals reproduces combine") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 5; ++trial) {
    ColouredGraph g = rcon::testing::random_coloured_graph(rng, 7, 0.4, 3);
    for (int hops : {1, 2}) {
      for (CombineMode mode : {CombineMode::SelfNormalizing, CombineMode::Paper}) {
        std::vector<LocalModel> models;
        std::vector<LocalEstimate> locals;
        std::vector<double> stacked;
        bool ok = true;
        for (int i = 0; i < g.num_vertices(); ++i) {
          models.push_back(local_model(g, i, hops));
          LocalEstimate le;
          le.centre = i;
          le.class_map = models.back().class_map;
          le.theta_local.resize(models.back().num_params());
          for (int j = 0; j < le.theta_local.size(); ++j) stacked.push_back(le.theta_local(j) = z(rng));
          locals.push_back(le);
        }
        Eigen::VectorXd direct;
        try {
          direct = combine(locals, g, mode).theta;
        } catch (const NumericalError&) {
          ok = false;  // a class with no contributing centre cannot occur, flag it
        }
        REQUIRE(ok);
        Eigen::MatrixXd jac = combiner_jacobian(models, g, mode);
        Eigen::VectorXd via = jac * Eigen::Map<Eigen::VectorXd>(stacked.data(), stacked.size());
        CHECK((via - direct).norm() < 1e-12 * (1.0 + direct.norm()));
      }
    }
  }
}

TEST_CASE("distributed estimate does not depend on the worker count") {
  Scenario sc = scenario_cycle(8, 'a');
  const Eigen::MatrixXd data = simulate_data(sc.k_true, 60, 11);
  const EstimatorConfig cfg = quick_bayes(500, 200);
  for (int hops : {1, 2}) {
    GlobalEstimate a = estimate_distributed(sc.graph, data, hops, cfg, 3, 1);
    GlobalEstimate b = estimate_distributed(sc.graph, data, hops, cfg, 3, 8);
    CHECK(a.theta == b.theta);
    CHECK(a.method == (hops == 1 ? "MBE-1hop" : "MBE-2hop"));
  }
}

TEST_CASE("on a complete graph every local model is the full model") {
  const ColouredGraph g = rcon::testing::complete_singletons(4);
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd k = rcon::testing::random_spd(rng, 4);
  const Eigen::MatrixXd data = simulate_data(k, 40, 9);

  EstimatorConfig cfg = quick_bayes(800, 200);
  GlobalEstimate gbe = estimate_global_bayes(g, data, cfg, 21);
  GlobalEstimate mbe = estimate_distributed(g, data, 1, cfg, 21, 2);
  CHECK(gbe.method == "GBE");
  CHECK((gbe.theta - mbe.theta).norm() < 1e-12 * gbe.theta.norm());

  cfg.method = EstimationMethod::Mle;
  GlobalEstimate gmle = estimate_global_mle(g, data, cfg);
  GlobalEstimate dmle = estimate_distributed(g, data, 2, cfg, 21, 1);
  CHECK(gmle.method == "GMLE");
  CHECK(dmle.method == "DMLE-2hop");
  CHECK((gmle.theta - dmle.theta).norm() < 1e-12 * gmle.theta.norm());
  // Saturated model: the MLE is the inverse sample covariance.
  const Eigen::MatrixXd s = data.transpose() * data / data.rows();
  CHECK((gmle.k_mat - linalg::inverse(*linalg::cholesky(s))).norm() < 1e-7 * gmle.k_mat.norm());
}

TEST_CASE("one vertex: GBE is the gamma posterior mean") {
  const ColouredGraph g = rcon::testing::single_vertex();
  Eigen::MatrixXd data(30, 1);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0.0, 0.5);
  for (int r = 0; r < 30; ++r) data(r, 0) = z(rng);
  EstimatorConfig cfg = quick_bayes(20000, 1000);
  GlobalEstimate est = estimate_global_bayes(g, data, cfg, 4);
  // density k^{(delta-2)/2} exp(-k d / 2): Gamma(delta/2, rate d/2), mean delta/d
  const double expected = (cfg.delta + 30) / (1.0 + data.squaredNorm());
  CHECK(est.theta(0) == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("MBE recovers the 20-cycle") {
  Scenario sc = scenario_cycle(20, 'a');
  const Eigen::MatrixXd data = simulate_data(sc.k_true, 100, 1);
  GlobalEstimate est = estimate_distributed(sc.graph, data, 1, quick_bayes(), 1, 1);
  CHECK(est.positive_definite);
  CHECK(nmse(est.k_mat, sc.k_true) < 0.1);
  CHECK(est.contribution_counts == std::vector<int>{10, 10, 20, 20});
}

TEST_CASE("estimators validate their input") {
  const ColouredGraph g = rcon::testing::cycle6_pattern_a();
  const Eigen::MatrixXd bad(10, 5);
  CHECK_THROWS_AS(estimate_distributed(g, bad, 1, quick_bayes(), 1, 1), InvalidArgument);
  const Eigen::MatrixXd ok = Eigen::MatrixXd::Random(10, 6);
  CHECK_THROWS_AS(estimate_distributed(g, ok, 3, quick_bayes(), 1, 1), InvalidArgument);

  EstimationError err({{0, "boom"}, {4, "bang"}});
  const std::string what = err.what();
  CHECK(what.find("2 vertex(es)") != std::string::npos);
  CHECK(what.find("vertex 1: boom") != std::string::npos);
  CHECK(what.find("vertex 5: bang") != std::string::npos);
}

TEST_CASE("report json uses 1-based vertices") {
  Scenario sc = scenario_cycle(6, 'a');
  const Eigen::MatrixXd data = simulate_data(sc.k_true, 200, 3);
  EstimatorConfig cfg;
  cfg.method = EstimationMethod::Mle;
  GlobalEstimate est = estimate_distributed(sc.graph, data, 1, cfg, 1, 1);
  auto j = nlohmann::json::parse(report_json(est, &sc.k_true));
  CHECK(j["method"] == "DMLE-1hop");
  CHECK(j.contains("nmse"));
  CHECK(j["nmse"].get<double>() == doctest::Approx(nmse(est.k_mat, sc.k_true)));
  CHECK(j["locals"][0]["centre"] == 1);
}

// Asymptotic covariance.

TEST_CASE("asymptotic covariance of one vertex is 2 k^2") {
  const ColouredGraph g = rcon::testing::single_vertex();
  Eigen::VectorXd theta(1);
  theta << 1.7;
  AsymptoticCov a = asymptotic_cov(g, theta, 1, CombineMode::SelfNormalizing);
  CHECK(a.a(0, 0) == doctest::Approx(2.0 * 1.7 * 1.7));
}

TEST_CASE("asymptotic covariance on a complete graph is the inverse Fisher") {
  const ColouredGraph g = rcon::testing::complete_singletons(4);
  const RconSpec spec = build_spec(g);
  std::mt19937_64 rng(3);
  const Eigen::VectorXd theta = rcon::testing::random_cone_theta(rng, spec);
  AsymptoticCov a = asymptotic_cov(g, theta, 1, CombineMode::SelfNormalizing);
  const Eigen::MatrixXd finv = linalg::inverse(*linalg::cholesky(cumulant(spec, theta).fisher));
  CHECK((a.a - finv).norm() < 1e-9 * finv.norm());
}

TEST_CASE("asymptotic pieces are consistent") {
  Scenario sc = scenario_cycle(8, 'b');
  for (int hops : {1, 2}) {
    AsymptoticCov a = asymptotic_cov(sc.graph, sc.theta_true, hops, CombineMode::SelfNormalizing);
    // Diagonal blocks of the score covariance are the local Fisher matrices.
    int off = 0;
    for (const LocalModel& lm : a.models) {
      const RconSpec ls = build_spec(lm.graph);
      const Eigen::VectorXd th = a.theta0_bar.segment(off, lm.num_params());
      const Eigen::MatrixXd f = cumulant(ls, th).fisher;
      CHECK((a.score_cov.block(off, off, lm.num_params(), lm.num_params()) - f).norm() < 1e-10 * f.norm());
      off += lm.num_params();
    }
    // The combiner is exact at the truth.
    CHECK((a.jac * a.theta0_bar - sc.theta_true).norm() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.a);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
  Eigen::VectorXd outside = sc.theta_true;
  outside(0) = -1.0;
  CHECK_THROWS_AS(asymptotic_cov(sc.graph, outside, 1, CombineMode::SelfNormalizing), NotPositiveDefinite);
}
