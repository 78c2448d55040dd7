#pragma once

#include <cstddef>
#include <vector>

#include "apro/tensor.hpp"

namespace apro {

/// Undirected edge between 4-adjacent pixels; w is the squared guide distance.
struct WeightedEdge {
  NodeId u = 0;
  NodeId v = 0;
  double w = 0.0;

  bool operator==(const WeightedEdge&) const = default;
};

/// 4-connected grid graph over an H x W guide.
///
/// Edges are ordered all horizontal pairs row-major, then all vertical pairs
/// row-major; there are exactly 2HW - H - W of them.
struct PlanarGraph {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<WeightedEdge> edges;

  std::size_t nodes() const noexcept { return height * width; }
};

/// N - 1 edges spanning the grid, stored in ascending weight order.
struct SpanningTree {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<WeightedEdge> edges;

  std::size_t nodes() const noexcept { return height * width; }
  double total_weight() const noexcept;

  /// Checks edge count, node ranges and that the edges connect every node.
  void validate() const;
};

/// Number of 4-adjacencies in an H x W grid.
constexpr std::size_t grid_edge_count(std::size_t height, std::size_t width) noexcept {
  return height * width == 0 ? 0 : 2 * height * width - height - width;
}

/// Squared Euclidean distance between two guide pixels, summed over channels.
double guide_distance(const GuideTensor& guide, NodeId a, NodeId b);

PlanarGraph build_planar_graph(const GuideTensor& guide);

/// Kruskal over the edge list stably sorted by (weight, edge index).
SpanningTree minimum_spanning_tree(const PlanarGraph& graph);

/// Convenience: build_planar_graph followed by minimum_spanning_tree.
SpanningTree guide_spanning_tree(const GuideTensor& guide);

}  // namespace apro
