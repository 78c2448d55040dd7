#include "apro/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "apro/errors.hpp"

namespace apro::oracle {

namespace {

using Adjacency = std::vector<std::vector<std::pair<NodeId, double>>>;

Adjacency adjacency_of(const SpanningTree& tree) {
  const std::size_t n = tree.nodes();
  if (n == 0 || tree.edges.size() != n - 1) throw ValidationError("oracle: malformed tree");
  Adjacency adj(n);
  for (const auto& e : tree.edges) {
    if (e.u >= n || e.v >= n) throw ValidationError("oracle: tree edge out of range");
    adj[e.u].emplace_back(e.v, e.w);
    adj[e.v].emplace_back(e.u, e.w);
  }
  return adj;
}

// Path maxima from `source` to every node; throws if the tree is disconnected.
void costs_from(const Adjacency& adj, NodeId source, std::vector<double>& cost,
                std::deque<NodeId>& queue) {
  std::fill(cost.begin(), cost.end(), -1.0);
  cost[source] = 0.0;
  queue.assign(1, source);
  std::size_t reached = 1;
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (const auto& [to, w] : adj[v]) {
      if (cost[to] >= 0.0) continue;
      cost[to] = cost[v] > w ? cost[v] : w;
      ++reached;
      queue.push_back(to);
    }
  }
  if (reached != adj.size()) throw ValidationError("oracle: tree is not connected");
}

}  // namespace

double minimax_path_cost(const SpanningTree& tree, NodeId u, NodeId v) {
  const std::size_t n = tree.nodes();
  if (u >= n || v >= n) {
    throw ValidationError("minimax_path_cost: node out of range for a tree of " +
                          std::to_string(n) + " nodes");
  }
  if (u == v) return 0.0;
  const Adjacency adj = adjacency_of(tree);
  std::vector<double> cost(n);
  std::deque<NodeId> queue;
  costs_from(adj, u, cost, queue);
  return cost[v];
}

DenseField gp_bruteforce(const SpanningTree& tree, const DenseField& phi, double zeta_g) {
  if (!(zeta_g > 0.0) || !std::isfinite(zeta_g)) {
    throw ValidationError("gp_bruteforce: zeta_g must be positive and finite");
  }
  phi.validate();
  if (tree.height != phi.height() || tree.width != phi.width()) {
    throw ValidationError("gp_bruteforce: tree and phi dimensions differ");
  }
  const std::size_t n = tree.nodes();
  const std::size_t k = phi.channels();
  const Adjacency adj = adjacency_of(tree);

  DenseField out(k, phi.height(), phi.width());
  std::vector<double> cost(n);
  std::vector<double> numer(k);
  std::deque<NodeId> queue;
  for (std::size_t i = 0; i < n; ++i) {
    costs_from(adj, static_cast<NodeId>(i), cost, queue);
    double denom = 0.0;
    std::fill(numer.begin(), numer.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = std::exp(-cost[j] / (zeta_g * zeta_g));
      denom += a;
      for (std::size_t c = 0; c < k; ++c) numer[c] += a * phi.values()[c * n + j];
    }
    for (std::size_t c = 0; c < k; ++c) out.values()[c * n + i] = numer[c] / denom;
  }
  return out;
}

DenseField lp_direct(const GuideTensor& guide, const DenseField& phi, double zeta_s, int radius,
                     int iterations) {
  guide.validate();
  phi.validate();
  if (!(zeta_s > 0.0) || !std::isfinite(zeta_s)) throw ValidationError("lp_direct: bad zeta_s");
  if (radius < 1 || iterations < 1) throw ValidationError("lp_direct: bad radius or iterations");
  if (guide.height() != phi.height() || guide.width() != phi.width()) {
    throw ValidationError("lp_direct: guide and phi dimensions differ");
  }
  const auto h = static_cast<long>(guide.height());
  const auto w = static_cast<long>(guide.width());
  const long r = radius;
  const std::size_t channels = guide.channels();

  DenseField y = phi;
  DenseField next = phi;
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t k = 0; k < phi.channels(); ++k) {
      for (long py = 0; py < h; ++py) {
        for (long px = 0; px < w; ++px) {
          double numer = 0.0;
          double denom = 0.0;
          for (long qy = py - r; qy <= py + r; ++qy) {
            for (long qx = px - r; qx <= px + r; ++qx) {
              if (qy < 0 || qy >= h || qx < 0 || qx >= w) continue;
              double dist = 0.0;
              for (std::size_t c = 0; c < channels; ++c) {
                const double d = guide.at(py, px, c) - guide.at(qy, qx, c);
                dist += d * d;
              }
              const double a = std::exp(-dist / (zeta_s * zeta_s));
              numer += a * y.at(k, qy, qx);
              denom += a;
            }
          }
          next.at(k, py, px) = numer / denom;
        }
      }
    }
    std::swap(y, next);
  }
  return y;
}

}  // namespace apro::oracle
