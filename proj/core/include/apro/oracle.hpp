#pragma once

#include "apro/grid_graph.hpp"
#include "apro/tensor.hpp"

// Quadratic reference implementations. They share no code with the fast
// kernels beyond the data types, and back the equivalence tests and the naive
// arm of the runtime benchmark.
namespace apro::oracle {

/// Largest edge weight on the tree path u..v (0 when u == v), by breadth-first search.
double minimax_path_cost(const SpanningTree& tree, NodeId u, NodeId v);

/// Global propagation by one breadth-first traversal per node: O(N^2 K).
DenseField gp_bruteforce(const SpanningTree& tree, const DenseField& phi, double zeta_g);

/// Local propagation written as explicit per-pixel window loops.
DenseField lp_direct(const GuideTensor& guide, const DenseField& phi, double zeta_s, int radius,
                     int iterations);

}  // namespace apro::oracle
