#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "apro/grid_graph.hpp"
#include "apro/tensor.hpp"

namespace apro {

/// Disjoint-set forest carrying deferred (lazy) aggregation tags.
///
/// Each node holds `lanes` tag values. Lane 0 aggregates the all-ones field
/// (the normaliser), lanes 1..K aggregate the K score channels. At any time
/// the true aggregate of node i in lane d is
///
///     value_i[d] + sum of tag[r][d] over r in {i} and every ancestor of i,
///
/// which is what `aggregate` evaluates after the final compression.
class LazyForest {
 public:
  /// `initial` is node-major with `lanes` values per node; it seeds the union sums.
  LazyForest(std::size_t nodes, std::size_t lanes, std::span<const double> initial);

  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t lanes() const noexcept { return lanes_; }

  /// Root of v. Compresses v's ancestor chain onto the root; every node whose
  /// parent changes absorbs the tags of the parent it left.
  NodeId find(NodeId v);

  /// Merges the unions rooted at `a` and `b` (both roots, distinct) joined by an
  /// edge whose affinity is `affinity`. The larger union's root stays root
  /// (`a` on ties). Returns the surviving root.
  NodeId unite(NodeId a, NodeId b, double affinity);

  /// Cache hints for a node that will be looked up soon: `prefetch` touches
  /// the node itself, `prefetch_parent` its current parent.
  void prefetch(NodeId v) const noexcept {
    const double* rec = record(v);
    __builtin_prefetch(rec);
    __builtin_prefetch(rec + stride_ - 1);
  }
  void prefetch_parent(NodeId v) const noexcept { prefetch(link(v).parent); }

  /// Union cardinality; meaningful at roots.
  std::size_t union_size(NodeId root) const { return link(root).size; }
  NodeId parent(NodeId v) const { return link(v).parent; }
  std::span<const double> tags(NodeId v) const { return {tag_of(v), lanes_}; }
  std::span<const double> sums(NodeId root) const { return {sum_of(root), lanes_}; }

  /// Writes the aggregate of v into `out` (size lanes). Compresses v first.
  void aggregate(NodeId v, std::span<const double> value, std::span<double> out);

 private:
  struct Link {
    NodeId parent;
    std::uint32_t size;
  };
  static_assert(sizeof(Link) == sizeof(double));

  // Everything about a node lives in one record, [link | tag x lanes | sum x lanes],
  // so a random visit touches a single cache line for small lane counts.
  double* record(NodeId v) { return records_.data() + v * stride_; }
  const double* record(NodeId v) const { return records_.data() + v * stride_; }
  Link link(NodeId v) const {
    Link l;
    std::memcpy(&l, record(v), sizeof l);
    return l;
  }
  void set_link(NodeId v, Link l) { std::memcpy(record(v), &l, sizeof l); }
  double* tag_of(NodeId v) { return record(v) + 1; }
  const double* tag_of(NodeId v) const { return record(v) + 1; }
  double* sum_of(NodeId v) { return record(v) + 1 + lanes_; }
  const double* sum_of(NodeId v) const { return record(v) + 1 + lanes_; }

  std::size_t nodes_;
  std::size_t lanes_;
  std::size_t stride_;
  std::vector<double> records_;
  std::vector<NodeId> path_;
};

/// Global affinity propagation over a minimum spanning tree.
///
/// y_i = sum_j exp(-cost(i,j)/zeta^2) phi_j / sum_j exp(-cost(i,j)/zeta^2), where
/// cost(i,j) is the largest edge weight on the tree path between i and j.
/// Runs in O(N log N): edges are consumed in ascending weight order, so the
/// joining edge is the path maximum for every pair it connects.
DenseField global_propagate(const SpanningTree& tree, const DenseField& phi, double zeta_g);

/// exp(-cost(query, j)/zeta^2) for every pixel j, as a single-channel field.
DenseField global_affinity_map(const SpanningTree& tree, NodeId query, double zeta_g);

}  // namespace apro
