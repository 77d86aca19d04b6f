#pragma once

// Coloured undirected graphs, neighbourhoods and relaxed local models.
//
// Vertices are 0-based internally. Human-facing text (violation messages,
// JSON configs) uses 1-based labels.

#include <compare>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rcon {

struct Edge {
  int u = 0;
  int v = 0;

  Edge() = default;
  /// Stored with u <= v so that (a,b) and (b,a) compare equal.
  Edge(int a, int b) : u(a < b ? a : b), v(a < b ? b : a) {}

  auto operator<=>(const Edge&) const = default;
};

/// Skeleton (V, E) plus a vertex-class partition and an edge-class
/// partition. Class ids are global: vertex classes 0..T-1, then edge
/// classes T..T+S-1.
///
/// Construction never throws on inconsistent input; use
/// validate_coloured_graph() to get a list of problems.
class ColouredGraph {
 public:
  ColouredGraph() = default;
  ColouredGraph(int p, std::vector<Edge> edges,
                std::vector<std::vector<int>> vertex_classes,
                std::vector<std::vector<Edge>> edge_classes);

  int num_vertices() const { return p_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::vector<int>>& vertex_classes() const { return vertex_classes_; }
  const std::vector<std::vector<Edge>>& edge_classes() const { return edge_classes_; }

  int num_vertex_classes() const { return static_cast<int>(vertex_classes_.size()); }
  int num_edge_classes() const { return static_cast<int>(edge_classes_.size()); }
  int num_classes() const { return num_vertex_classes() + num_edge_classes(); }

  bool contains(int v) const { return v >= 0 && v < p_; }
  bool has_edge(int a, int b) const;
  /// Sorted neighbour list of v (self-loops and out-of-range endpoints skipped).
  const std::vector<int>& neighbours(int v) const { return adjacency_.at(v); }

  /// Global class id of the matrix entry (a, b): a vertex class when a == b,
  /// an edge class otherwise. -1 for a structural zero or an unclassified
  /// entry.
  int class_of(int a, int b) const;

 private:
  int p_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> vertex_classes_;
  std::vector<std::vector<Edge>> edge_classes_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<int> entry_class_;  // p*p, -1 when unset
};

enum class ViolationKind {
  VertexOutOfRange,
  SelfLoop,
  DuplicateEdge,
  EmptyClass,
  PartitionViolation,
  UncoveredVertex,
  UnknownEdge,
  UncoveredEdge,
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
};

ValidationReport validate_coloured_graph(const ColouredGraph& g);

/// {i} u ne(i) for hops == 1; additionally the neighbours of the neighbours
/// for hops == 2. Ascending order.
std::vector<int> neighbourhood(const ColouredGraph& g, int i, int hops);

struct BufferSplit {
  std::vector<int> protected_vertices;
  std::vector<int> buffer;
};

/// Buffer vertices are the members of `vertices` with a neighbour outside it.
BufferSplit buffer_split(const ColouredGraph& g, const std::vector<int>& vertices);

/// Relaxed marginal model around a centre vertex.
///
/// The local graph lives on indices 0..p_i-1 which follow `vertices`.
/// Protected vertices and preserved edges (at least one protected endpoint)
/// keep their global colour, one local class per global class. Every buffer
/// vertex and every buffer-buffer pair is its own fresh class, mapped to
/// nullopt in `class_map`.
struct LocalModel {
  int centre = 0;
  int hops = 1;
  std::vector<int> vertices;
  std::vector<int> protected_vertices;
  std::vector<int> buffer;
  ColouredGraph graph;
  std::vector<std::optional<int>> class_map;

  int size() const { return static_cast<int>(vertices.size()); }
  int num_params() const { return static_cast<int>(class_map.size()); }
  std::optional<int> local_index(int global_vertex) const;
};

LocalModel local_model(const ColouredGraph& g, int i, int hops);

}  // namespace rcon
