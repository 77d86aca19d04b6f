#include "rcon/graph.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "rcon/errors.hpp"

namespace rcon {

namespace {

std::string label(int v) { return std::to_string(v + 1); }

std::string label(const Edge& e) { return "(" + label(e.u) + "," + label(e.v) + ")"; }

void require_vertex(const ColouredGraph& g, int i) {
  if (!g.contains(i)) {
    throw InvalidArgument("vertex " + std::to_string(i + 1) + " is not in the graph (p = " +
                          std::to_string(g.num_vertices()) + ")");
  }
}

}  // namespace

ColouredGraph::ColouredGraph(int p, std::vector<Edge> edges,
                             std::vector<std::vector<int>> vertex_classes,
                             std::vector<std::vector<Edge>> edge_classes)
    : p_(p),
      edges_(std::move(edges)),
      vertex_classes_(std::move(vertex_classes)),
      edge_classes_(std::move(edge_classes)) {
  if (p_ < 0) throw InvalidArgument("negative vertex count");
  adjacency_.assign(p_, {});
  entry_class_.assign(static_cast<std::size_t>(p_) * p_, -1);
  for (const Edge& e : edges_) {
    if (!contains(e.u) || !contains(e.v) || e.u == e.v) continue;
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  for (auto& nb : adjacency_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  // First assignment wins; overlaps are reported by validation.
  for (int k = 0; k < num_vertex_classes(); ++k) {
    for (int v : vertex_classes_[k]) {
      if (!contains(v)) continue;
      int& slot = entry_class_[static_cast<std::size_t>(v) * p_ + v];
      if (slot < 0) slot = k;
    }
  }
  const int t = num_vertex_classes();
  for (int k = 0; k < num_edge_classes(); ++k) {
    for (const Edge& e : edge_classes_[k]) {
      if (!has_edge(e.u, e.v)) continue;
      int& slot = entry_class_[static_cast<std::size_t>(e.u) * p_ + e.v];
      if (slot < 0) {
        slot = t + k;
        entry_class_[static_cast<std::size_t>(e.v) * p_ + e.u] = t + k;
      }
    }
  }
}

bool ColouredGraph::has_edge(int a, int b) const {
  if (!contains(a) || !contains(b) || a == b) return false;
  const auto& nb = adjacency_[a];
  return std::binary_search(nb.begin(), nb.end(), b);
}

int ColouredGraph::class_of(int a, int b) const {
  if (!contains(a) || !contains(b)) return -1;
  return entry_class_[static_cast<std::size_t>(a) * p_ + b];
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::VertexOutOfRange: return "VertexOutOfRange";
    case ViolationKind::SelfLoop: return "SelfLoop";
    case ViolationKind::DuplicateEdge: return "DuplicateEdge";
    case ViolationKind::EmptyClass: return "EmptyClass";
    case ViolationKind::PartitionViolation: return "PartitionViolation";
    case ViolationKind::UncoveredVertex: return "UncoveredVertex";
    case ViolationKind::UnknownEdge: return "UnknownEdge";
    case ViolationKind::UncoveredEdge: return "UncoveredEdge";
  }
  return "Unknown";
}

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

ValidationReport validate_coloured_graph(const ColouredGraph& g) {
  ValidationReport report;
  auto add = [&report](ViolationKind kind, std::string msg) {
    report.violations.push_back({kind, std::move(msg)});
  };
  const int p = g.num_vertices();

  std::set<Edge> seen_edges;
  for (const Edge& e : g.edges()) {
    if (!g.contains(e.u) || !g.contains(e.v)) {
      add(ViolationKind::VertexOutOfRange, "edge " + label(e) + " has an endpoint outside 1.." +
                                               std::to_string(p));
      continue;
    }
    if (e.u == e.v) {
      add(ViolationKind::SelfLoop, "self-loop at vertex " + label(e.u));
      continue;
    }
    if (!seen_edges.insert(e).second) {
      add(ViolationKind::DuplicateEdge, "edge " + label(e) + " listed more than once");
    }
  }

  std::vector<int> vertex_owner(p, -1);
  for (int k = 0; k < g.num_vertex_classes(); ++k) {
    const auto& cls = g.vertex_classes()[k];
    if (cls.empty()) add(ViolationKind::EmptyClass, "vertex class " + std::to_string(k) + " is empty");
    for (int v : cls) {
      if (!g.contains(v)) {
        add(ViolationKind::VertexOutOfRange,
            "vertex class " + std::to_string(k) + " contains unknown vertex " + label(v));
        continue;
      }
      if (vertex_owner[v] >= 0) {
        add(ViolationKind::PartitionViolation,
            "vertex " + label(v) + " repeated in vertex classes " + std::to_string(vertex_owner[v]) +
                " and " + std::to_string(k));
      } else {
        vertex_owner[v] = k;
      }
    }
  }
  for (int v = 0; v < p; ++v) {
    if (vertex_owner[v] < 0) {
      add(ViolationKind::UncoveredVertex, "vertex " + label(v) + " has no vertex class");
    }
  }

  std::map<Edge, int> edge_owner;
  const int t = g.num_vertex_classes();
  for (int k = 0; k < g.num_edge_classes(); ++k) {
    const auto& cls = g.edge_classes()[k];
    if (cls.empty()) {
      add(ViolationKind::EmptyClass, "edge class " + std::to_string(t + k) + " is empty");
    }
    for (const Edge& e : cls) {
      if (!seen_edges.count(e)) {
        add(ViolationKind::UnknownEdge, "edge class " + std::to_string(t + k) + " contains " +
                                            label(e) + " which is not an edge");
        continue;
      }
      auto [it, inserted] = edge_owner.emplace(e, t + k);
      if (!inserted) {
        add(ViolationKind::PartitionViolation, "edge " + label(e) + " repeated in edge classes " +
                                                   std::to_string(it->second) + " and " +
                                                   std::to_string(t + k));
      }
    }
  }
  for (const Edge& e : seen_edges) {
    if (!edge_owner.count(e)) {
      add(ViolationKind::UncoveredEdge, "edge " + label(e) + " has no edge class");
    }
  }
  return report;
}

std::vector<int> neighbourhood(const ColouredGraph& g, int i, int hops) {
  require_vertex(g, i);
  if (hops != 1 && hops != 2) throw InvalidArgument("hops must be 1 or 2");
  std::vector<int> out{i};
  for (int j : g.neighbours(i)) {
    out.push_back(j);
    if (hops == 2) {
      for (int k : g.neighbours(j)) out.push_back(k);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

BufferSplit buffer_split(const ColouredGraph& g, const std::vector<int>& vertices) {
  std::vector<char> inside(g.num_vertices(), 0);
  for (int v : vertices) {
    require_vertex(g, v);
    inside[v] = 1;
  }
  BufferSplit split;
  for (int v : vertices) {
    const auto& nb = g.neighbours(v);
    bool leaves = std::any_of(nb.begin(), nb.end(), [&](int w) { return !inside[w]; });
    (leaves ? split.buffer : split.protected_vertices).push_back(v);
  }
  return split;
}

std::optional<int> LocalModel::local_index(int global_vertex) const {
  auto it = std::lower_bound(vertices.begin(), vertices.end(), global_vertex);
  if (it == vertices.end() || *it != global_vertex) return std::nullopt;
  return static_cast<int>(it - vertices.begin());
}

LocalModel local_model(const ColouredGraph& g, int i, int hops) {
  LocalModel m;
  m.centre = i;
  m.hops = hops;
  m.vertices = neighbourhood(g, i, hops);
  auto split = buffer_split(g, m.vertices);
  m.protected_vertices = std::move(split.protected_vertices);
  m.buffer = std::move(split.buffer);

  const int pl = m.size();
  std::vector<char> is_protected(pl, 0);
  for (int v : m.protected_vertices) is_protected[*m.local_index(v)] = 1;

  std::vector<Edge> local_edges;
  // Global class id -> members, for inherited classes (ordered by global id).
  std::map<int, std::vector<int>> inherited_vertices;
  std::map<int, std::vector<Edge>> inherited_edges;
  std::vector<int> fresh_vertices;
  std::vector<Edge> fresh_edges;

  for (int a = 0; a < pl; ++a) {
    if (is_protected[a]) {
      inherited_vertices[g.class_of(m.vertices[a], m.vertices[a])].push_back(a);
    } else {
      fresh_vertices.push_back(a);
    }
    for (int b = a + 1; b < pl; ++b) {
      if (is_protected[a] || is_protected[b]) {
        if (g.has_edge(m.vertices[a], m.vertices[b])) {
          local_edges.emplace_back(a, b);
          inherited_edges[g.class_of(m.vertices[a], m.vertices[b])].emplace_back(a, b);
        }
      } else {
        local_edges.emplace_back(a, b);
        fresh_edges.emplace_back(a, b);
      }
    }
  }

  std::vector<std::vector<int>> vclasses;
  std::vector<std::vector<Edge>> eclasses;
  std::vector<std::optional<int>> vmap;
  std::vector<std::optional<int>> emap;
  for (auto& [gid, members] : inherited_vertices) {
    vclasses.push_back(members);
    vmap.emplace_back(gid < 0 ? std::nullopt : std::optional<int>(gid));
  }
  for (int a : fresh_vertices) {
    vclasses.push_back({a});
    vmap.emplace_back(std::nullopt);
  }
  for (auto& [gid, members] : inherited_edges) {
    eclasses.push_back(members);
    emap.emplace_back(gid < 0 ? std::nullopt : std::optional<int>(gid));
  }
  for (const Edge& e : fresh_edges) {
    eclasses.push_back({e});
    emap.emplace_back(std::nullopt);
  }

  m.class_map = std::move(vmap);
  m.class_map.insert(m.class_map.end(), emap.begin(), emap.end());
  m.graph = ColouredGraph(pl, std::move(local_edges), std::move(vclasses), std::move(eclasses));
  return m;
}

}  // namespace rcon
