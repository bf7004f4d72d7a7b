#pragma once

#include <span>
#include <vector>

#include "nlcl/grid.hpp"

// Serial, literal transcriptions of the scheme and of its discrete adjoint.
// They recompute every kernel sum from scratch (O(P^2) per row) and exist to
// check the production kernels and to benchmark against.

namespace nlcl::reference {

/// Forward step with the kernel sums spelled out per cell:
/// V(sum_{k=0}^{P-j+1} gamma_k q_{j-1+k}) and V(sum_{k=0}^{P-j-1} gamma_k q_{j+1+k}).
std::vector<double> step(std::span<const double> q_row, const Discretization& disc);

/// The five-case backward recursion (j = 0, 1, interior, P-1, P) written
/// with the partial sums S_{l,m,r} = sum_{k=l}^{m} gamma_k q_{k+r}. Needs P >= 4.
std::vector<double> adjoint_step(std::span<const double> q_row, std::span<const double> p_next,
                                 const Discretization& disc);

}  // namespace nlcl::reference
