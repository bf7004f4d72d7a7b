#include "nlcl/nonlocal.hpp"

#include "nlcl/matrix.hpp"

namespace nlcl {

std::vector<double> nonlocal_direct(std::span<const double> q_row, const KernelWeights& kernel) {
  require_length(q_row, kernel.gamma.size(), "nonlocal_direct");
  const std::size_t n = q_row.size();
  std::vector<double> W(n, 0.0);
#pragma omp parallel for schedule(static) if (n >= 2048)
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; j + k < n; ++k) acc += kernel.gamma[k] * q_row[j + k];
    W[j] = acc;
  }
  return W;
}

void nonlocal_fast_into(std::span<const double> q_row, const KernelWeights& kernel,
                        std::span<double> out) {
  require_length(q_row, kernel.gamma.size(), "nonlocal_fast");
  require_length(out, q_row.size(), "nonlocal_fast output");
  const double g0 = kernel.gamma[0];
  const double r = kernel.ratio;
  double acc = 0.0;
  for (std::size_t j = q_row.size(); j-- > 0;) {
    acc = g0 * q_row[j] + r * acc;
    out[j] = acc;
  }
}

std::vector<double> nonlocal_fast(std::span<const double> q_row, const KernelWeights& kernel) {
  std::vector<double> W(q_row.size());
  nonlocal_fast_into(q_row, kernel, W);
  return W;
}

void nonlocal_transpose_into(std::span<const double> d, const KernelWeights& kernel,
                             std::span<double> out) {
  require_length(d, kernel.gamma.size(), "nonlocal_transpose");
  require_length(out, d.size(), "nonlocal_transpose output");
  const double g0 = kernel.gamma[0];
  const double r = kernel.ratio;
  double acc = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    acc = g0 * d[j] + r * acc;
    out[j] = acc;
  }
}

std::vector<double> nonlocal_transpose(std::span<const double> d, const KernelWeights& kernel) {
  std::vector<double> out(d.size());
  nonlocal_transpose_into(d, kernel, out);
  return out;
}

std::vector<double> nonlocal_transpose_direct(std::span<const double> d,
                                              const KernelWeights& kernel) {
  require_length(d, kernel.gamma.size(), "nonlocal_transpose_direct");
  std::vector<double> out(d.size(), 0.0);
  for (std::size_t j = 0; j < d.size(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i <= j; ++i) acc += kernel.gamma[j - i] * d[i];
    out[j] = acc;
  }
  return out;
}

}  // namespace nlcl
