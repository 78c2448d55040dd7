#include "apro/grid_graph.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "apro/errors.hpp"

namespace apro {

namespace {

// Plain disjoint set for Kruskal; global propagation carries its own tagged forest.
class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), NodeId{0});
  }

  NodeId find(NodeId v) {
    NodeId root = v;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[v] != root) {
      const NodeId next = parent_[v];
      parent_[v] = root;
      v = next;
    }
    return root;
  }

  bool unite(NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<NodeId> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace

double SpanningTree::total_weight() const noexcept {
  double total = 0.0;
  for (const auto& e : edges) total += e.w;
  return total;
}

void SpanningTree::validate() const {
  const std::size_t n = nodes();
  if (n == 0) throw ValidationError("spanning tree has no nodes");
  if (edges.size() != n - 1) {
    throw ValidationError("spanning tree over " + std::to_string(n) + " nodes has " +
                          std::to_string(edges.size()) + " edges");
  }
  DisjointSet sets(n);
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n) throw ValidationError("spanning tree edge references a missing node");
    if (!(e.w >= 0.0)) throw ValidationError("spanning tree edge has a negative or NaN weight");
    if (!sets.unite(e.u, e.v)) throw ValidationError("spanning tree edges contain a cycle");
  }
}

double guide_distance(const GuideTensor& guide, NodeId a, NodeId b) {
  const auto pa = guide.pixel(a);
  const auto pb = guide.pixel(b);
  double w = 0.0;
  for (std::size_t c = 0; c < pa.size(); ++c) {
    const double d = pa[c] - pb[c];
    w += d * d;
  }
  return w;
}

PlanarGraph build_planar_graph(const GuideTensor& guide) {
  guide.validate();
  const std::size_t h = guide.height();
  const std::size_t w = guide.width();

  PlanarGraph graph;
  graph.height = h;
  graph.width = w;
  graph.edges.reserve(grid_edge_count(h, w));
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x + 1 < w; ++x) {
      const auto a = static_cast<NodeId>(y * w + x);
      graph.edges.push_back({a, a + 1, guide_distance(guide, a, a + 1)});
    }
  }
  for (std::size_t y = 0; y + 1 < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const auto a = static_cast<NodeId>(y * w + x);
      const auto b = static_cast<NodeId>(a + w);
      graph.edges.push_back({a, b, guide_distance(guide, a, b)});
    }
  }
  return graph;
}

SpanningTree minimum_spanning_tree(const PlanarGraph& graph) {
  const std::size_t n = graph.nodes();
  if (n == 0) throw ValidationError("minimum_spanning_tree: empty graph");

  std::vector<std::uint32_t> order(graph.edges.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return graph.edges[a].w < graph.edges[b].w;
  });

  SpanningTree tree;
  tree.height = graph.height;
  tree.width = graph.width;
  tree.edges.reserve(n - 1);
  DisjointSet sets(n);
  for (const std::uint32_t idx : order) {
    const auto& e = graph.edges[idx];
    if (sets.unite(e.u, e.v)) {
      tree.edges.push_back(e);
      if (tree.edges.size() == n - 1) break;
    }
  }
  if (tree.edges.size() != n - 1) {
    throw ValidationError("minimum_spanning_tree: graph is not connected");
  }
  return tree;
}

SpanningTree guide_spanning_tree(const GuideTensor& guide) {
  return minimum_spanning_tree(build_planar_graph(guide));
}

}  // namespace apro
