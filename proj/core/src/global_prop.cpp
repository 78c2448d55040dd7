#include "apro/global_prop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "apro/errors.hpp"

namespace apro {

LazyForest::LazyForest(std::size_t nodes, std::size_t lanes, std::span<const double> initial)
    : nodes_(nodes), lanes_(lanes), stride_(1 + 2 * lanes) {
  if (lanes == 0) throw ValidationError("LazyForest: at least one lane required");
  if (initial.size() != nodes * lanes) {
    throw ValidationError("LazyForest: initial values do not match nodes x lanes");
  }
  if (nodes > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("LazyForest: too many nodes");
  }
  records_.assign(nodes * stride_, 0.0);
  for (std::size_t i = 0; i < nodes; ++i) {
    const auto v = static_cast<NodeId>(i);
    set_link(v, {v, 1});
    std::copy_n(initial.data() + i * lanes, lanes, sum_of(v));
  }
}

NodeId LazyForest::find(NodeId v) {
  path_.clear();
  NodeId root = v;
  for (NodeId up = link(root).parent; up != root; up = link(root).parent) {
    path_.push_back(root);
    root = up;
  }
  // Walk top-down so each node's parent already holds every tag between it and the root.
  for (std::size_t i = path_.size(); i-- > 0;) {
    const NodeId node = path_[i];
    Link l = link(node);
    if (l.parent == root) continue;
    double* dst = tag_of(node);
    const double* src = tag_of(l.parent);
    for (std::size_t d = 0; d < lanes_; ++d) dst[d] += src[d];
    l.parent = root;
    set_link(node, l);
  }
  return root;
}

NodeId LazyForest::unite(NodeId a, NodeId b, double affinity) {
  Link la = link(a);
  Link lb = link(b);
  if (la.size < lb.size) {
    std::swap(a, b);
    std::swap(la, lb);
  }
  double* tag_a = tag_of(a);
  double* tag_b = tag_of(b);
  double* sum_a = sum_of(a);
  const double* sum_b = sum_of(b);
  for (std::size_t d = 0; d < lanes_; ++d) {
    tag_a[d] += affinity * sum_b[d];
    // b's subtree will also see a's tag through the new parent link.
    tag_b[d] += affinity * sum_a[d] - tag_a[d];
    sum_a[d] += sum_b[d];
  }
  la.size += lb.size;
  lb.parent = a;
  set_link(a, la);
  set_link(b, lb);
  return a;
}

void LazyForest::aggregate(NodeId v, std::span<const double> value, std::span<double> out) {
  const NodeId root = find(v);
  const double* own = tag_of(v);
  for (std::size_t d = 0; d < lanes_; ++d) out[d] = value[d] + own[d];
  if (root != v) {
    const double* top = tag_of(root);
    for (std::size_t d = 0; d < lanes_; ++d) out[d] += top[d];
  }
}

namespace {

void check_tree_field(const SpanningTree& tree, const DenseField& phi, double zeta_g) {
  if (!(zeta_g > 0.0) || !std::isfinite(zeta_g)) {
    throw ValidationError("global_propagate: zeta_g must be positive and finite");
  }
  phi.validate();
  if (tree.height != phi.height() || tree.width != phi.width()) {
    throw ValidationError("global_propagate: tree is " + std::to_string(tree.height) + "x" +
                          std::to_string(tree.width) + " but phi is " +
                          std::to_string(phi.height()) + "x" + std::to_string(phi.width()));
  }
  if (tree.edges.size() + 1 != tree.nodes()) {
    throw ValidationError("global_propagate: tree over " + std::to_string(tree.nodes()) +
                          " nodes has " + std::to_string(tree.edges.size()) + " edges");
  }
}

bool ascending(const std::vector<WeightedEdge>& edges) {
  return std::is_sorted(edges.begin(), edges.end(),
                        [](const WeightedEdge& a, const WeightedEdge& b) { return a.w < b.w; });
}

}  // namespace

DenseField global_propagate(const SpanningTree& tree, const DenseField& phi, double zeta_g) {
  check_tree_field(tree, phi, zeta_g);
  const std::size_t n = phi.pixels();
  const std::size_t k = phi.channels();
  if (n == 1) return phi;

  // Trees from minimum_spanning_tree are already ascending; anything else is
  // stably re-sorted so equal weights keep their given order.
  std::vector<WeightedEdge> sorted_edges;
  const std::vector<WeightedEdge>* edges = &tree.edges;
  if (!ascending(tree.edges)) {
    sorted_edges = tree.edges;
    std::stable_sort(sorted_edges.begin(), sorted_edges.end(),
                     [](const WeightedEdge& a, const WeightedEdge& b) { return a.w < b.w; });
    edges = &sorted_edges;
  }

  const std::size_t lanes = k + 1;
  std::vector<double> values(n * lanes);
  for (std::size_t i = 0; i < n; ++i) {
    values[i * lanes] = 1.0;
    for (std::size_t c = 0; c < k; ++c) values[i * lanes + 1 + c] = phi.plane(c)[i];
  }

  const double inv_zeta2 = 1.0 / (zeta_g * zeta_g);
  std::vector<double> affinity(edges->size());
  for (std::size_t i = 0; i < edges->size(); ++i) {
    const auto& e = (*edges)[i];
    if (e.u >= n || e.v >= n || e.u == e.v) {
      throw ValidationError("global_propagate: tree edge references an invalid node");
    }
    if (!(e.w >= 0.0) || !std::isfinite(e.w)) {
      throw ValidationError("global_propagate: tree edge weight must be finite and non-negative");
    }
    affinity[i] = std::exp(-e.w * inv_zeta2);
  }

  // Edge endpoints are scattered over the grid; prefetch a few edges ahead,
  // first the endpoints, then (once those have arrived) their parents.
  constexpr std::size_t near_ahead = 8;
  constexpr std::size_t far_ahead = 16;
  LazyForest forest(n, lanes, values);
  const std::size_t m = edges->size();
  for (std::size_t i = 0; i < m; ++i) {
    if (i + far_ahead < m) {
      forest.prefetch((*edges)[i + far_ahead].u);
      forest.prefetch((*edges)[i + far_ahead].v);
    }
    if (i + near_ahead < m) {
      forest.prefetch_parent((*edges)[i + near_ahead].u);
      forest.prefetch_parent((*edges)[i + near_ahead].v);
    }
    const auto& e = (*edges)[i];
    const NodeId a = forest.find(e.u);
    const NodeId b = forest.find(e.v);
    if (a == b) throw ValidationError("global_propagate: tree edges contain a cycle");
    forest.unite(a, b, affinity[i]);
  }

  DenseField out(k, phi.height(), phi.width());
  std::vector<double> agg(lanes);
  for (std::size_t i = 0; i < n; ++i) {
    if (i + near_ahead < n) forest.prefetch_parent(static_cast<NodeId>(i + near_ahead));
    forest.aggregate(static_cast<NodeId>(i), {values.data() + i * lanes, lanes}, agg);
    for (std::size_t c = 0; c < k; ++c) out.plane(c)[i] = agg[1 + c] / agg[0];
  }
  return out;
}

DenseField global_affinity_map(const SpanningTree& tree, NodeId query, double zeta_g) {
  if (!(zeta_g > 0.0) || !std::isfinite(zeta_g)) {
    throw ValidationError("global_affinity_map: zeta_g must be positive and finite");
  }
  const std::size_t n = tree.nodes();
  if (query >= n) {
    throw ValidationError("global_affinity_map: query " + std::to_string(query) +
                          " outside a tree of " + std::to_string(n) + " nodes");
  }
  if (tree.edges.size() + 1 != n) throw ValidationError("global_affinity_map: malformed tree");

  // CSR adjacency.
  std::vector<std::size_t> offset(n + 1, 0);
  for (const auto& e : tree.edges) {
    ++offset[e.u + 1];
    ++offset[e.v + 1];
  }
  std::partial_sum(offset.begin(), offset.end(), offset.begin());
  std::vector<std::pair<NodeId, double>> adj(offset[n]);
  std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
  for (const auto& e : tree.edges) {
    adj[fill[e.u]++] = {e.v, e.w};
    adj[fill[e.v]++] = {e.u, e.w};
  }

  std::vector<double> cost(n, -1.0);
  std::vector<NodeId> stack{query};
  cost[query] = 0.0;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (std::size_t j = offset[v]; j < offset[v + 1]; ++j) {
      const auto [to, w] = adj[j];
      if (cost[to] >= 0.0) continue;
      cost[to] = std::max(cost[v], w);
      stack.push_back(to);
    }
  }

  DenseField map(1, tree.height, tree.width);
  const double inv_zeta2 = 1.0 / (zeta_g * zeta_g);
  auto plane = map.plane(0);
  for (std::size_t i = 0; i < n; ++i) {
    if (cost[i] < 0.0) throw ValidationError("global_affinity_map: tree is not connected");
    plane[i] = std::exp(-cost[i] * inv_zeta2);
  }
  return map;
}

}  // namespace apro
