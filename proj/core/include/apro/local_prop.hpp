#pragma once

#include "apro/tensor.hpp"

namespace apro {

/// Iterated local affinity propagation.
///
/// Each iteration replaces y_i by the psi_s-weighted mean of y over the
/// (2r+1)x(2r+1) window around i (clipped to the image, centre included),
/// with psi_s(i,j) = exp(-|I_i - I_j|^2 / zeta_s^2). The kernel depends only on
/// the guide, so it is built once and reused by every iteration.
DenseField local_propagate(const GuideTensor& guide, const DenseField& phi, double zeta_s,
                           int radius, int iterations);

/// psi_s(query, j) inside the query's window, zero elsewhere.
DenseField local_kernel_window(const GuideTensor& guide, NodeId query, double zeta_s, int radius);

}  // namespace apro
