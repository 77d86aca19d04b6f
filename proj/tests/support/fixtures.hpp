#pragma once

// Small graphs and random generators shared by the unit tests.

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <vector>

#include "rcon/graph.hpp"
#include "rcon/model.hpp"

namespace rcon::testing {

/// 1-based edge helper so test data reads like the maths.
inline Edge e1(int a, int b) { return Edge(a - 1, b - 1); }

/// 6-cycle with odd/even vertex classes and odd/even edge classes, the
/// closing edge (1,6) joining the even edges.
inline ColouredGraph cycle6_pattern_a() {
  std::vector<Edge> edges{e1(1, 2), e1(2, 3), e1(3, 4), e1(4, 5), e1(5, 6), e1(1, 6)};
  std::vector<std::vector<int>> vc{{0, 2, 4}, {1, 3, 5}};
  std::vector<std::vector<Edge>> ec{{e1(1, 2), e1(3, 4), e1(5, 6)}, {e1(2, 3), e1(4, 5), e1(1, 6)}};
  return ColouredGraph(6, edges, vc, ec);
}

inline ColouredGraph complete_singletons(int p) {
  std::vector<Edge> edges;
  std::vector<std::vector<int>> vc;
  std::vector<std::vector<Edge>> ec;
  for (int a = 0; a < p; ++a) {
    vc.push_back({a});
    for (int b = a + 1; b < p; ++b) {
      edges.emplace_back(a, b);
      ec.push_back({Edge(a, b)});
    }
  }
  return ColouredGraph(p, edges, vc, ec);
}

inline ColouredGraph single_vertex() { return ColouredGraph(1, {}, {{0}}, {}); }

/// Random graph with edge probability `density` and random colourings into
/// at most `colours` classes per kind.
inline ColouredGraph random_coloured_graph(std::mt19937_64& rng, int p, double density, int colours) {
  std::bernoulli_distribution keep(density);
  std::uniform_int_distribution<int> pick(0, colours - 1);
  std::vector<Edge> edges;
  for (int a = 0; a < p; ++a) {
    for (int b = a + 1; b < p; ++b) {
      if (keep(rng)) edges.emplace_back(a, b);
    }
  }
  std::vector<std::vector<int>> vc(colours);
  for (int v = 0; v < p; ++v) vc[pick(rng)].push_back(v);
  std::vector<std::vector<Edge>> ec(colours);
  for (const Edge& e : edges) ec[pick(rng)].push_back(e);
  auto drop_empty = [](auto& classes) {
    classes.erase(std::remove_if(classes.begin(), classes.end(), [](const auto& c) { return c.empty(); }),
                  classes.end());
  };
  drop_empty(vc);
  drop_empty(ec);
  return ColouredGraph(p, edges, vc, ec);
}

/// A random point of the cone: random class values, then the vertex
/// classes are shifted until K is comfortably positive definite.
inline Eigen::VectorXd random_cone_theta(std::mt19937_64& rng, const RconSpec& spec) {
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  std::uniform_real_distribution<double> diag(0.5, 2.0);
  Eigen::VectorXd theta(spec.num_params());
  for (int r = 0; r < spec.num_params(); ++r) {
    theta(r) = r < spec.num_vertex_classes() ? diag(rng) : off(rng);
  }
  for (;;) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k_of_theta(spec, theta), Eigen::EigenvaluesOnly);
    if (spec.dim() == 0 || es.eigenvalues()(0) > 0.2) break;
    theta.head(spec.num_vertex_classes()).array() += 0.5;
  }
  return theta;
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int p) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) a(i, j) = normal(rng);
  return a * a.transpose() / p + Eigen::MatrixXd::Identity(p, p);
}

}  // namespace rcon::testing
