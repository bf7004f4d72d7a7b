#pragma once

#include <span>
#include <vector>

#include "nlcl/grid.hpp"

namespace nlcl {

// Discrete nonlocal term W_j = sum_{k=0}^{P-j} gamma_k q_{j+k}: the
// downstream-weighted average of one state row.
//
// Two routes are kept. nonlocal_direct sums literally in O(P^2) and serves as
// the reference; nonlocal_fast uses the geometric structure
// gamma_{k+1} = r gamma_k, giving W_P = gamma_0 q_P and
// W_j = gamma_0 q_j + r W_{j+1}.

std::vector<double> nonlocal_direct(std::span<const double> q_row, const KernelWeights& kernel);
std::vector<double> nonlocal_fast(std::span<const double> q_row, const KernelWeights& kernel);

/// Allocation-free variant of nonlocal_fast for inner loops.
void nonlocal_fast_into(std::span<const double> q_row, const KernelWeights& kernel,
                        std::span<double> out);

/// Transpose of the nonlocal map: out_j = sum_{i=0}^{j} gamma_{j-i} d_i,
/// evaluated by the forward recursion out_j = gamma_0 d_j + r out_{j-1}.
std::vector<double> nonlocal_transpose(std::span<const double> d, const KernelWeights& kernel);
void nonlocal_transpose_into(std::span<const double> d, const KernelWeights& kernel,
                             std::span<double> out);

/// O(P^2) literal form of nonlocal_transpose.
std::vector<double> nonlocal_transpose_direct(std::span<const double> d,
                                              const KernelWeights& kernel);

}  // namespace nlcl
