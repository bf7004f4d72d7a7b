#pragma once

// Test-only oracles. Nothing here calls into the production kernels they
// check: sums are brute-force loops, integrals use adaptive quadrature,
// derivatives use finite differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

/// W_j = sum_{k=0}^{P-j} gamma_k q_{j+k}, gamma from the closed form in long double.
inline std::vector<double> nonlocal_brute(const std::vector<double>& q, double dx, double eta) {
  const std::size_t n = q.size();
  std::vector<double> W(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    long double acc = 0.0L;
    for (std::size_t k = 0; j + k < n; ++k) {
      const long double g = std::exp(-static_cast<long double>(k) * dx / eta) -
                            std::exp(-static_cast<long double>(k + 1) * dx / eta);
      acc += g * q[j + k];
    }
    W[j] = static_cast<double>(acc);
  }
  return W;
}

namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-14) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson(f, a, b, fa, fm, fb, whole, tol, 50);
}

/// Entropy solution of q_t + (q(1-q))_x = 0 from chi_[0,1], valid for t <= 1:
/// stationary shock at 0, rarefaction fan centered at x = 1.
inline double greenshields_indicator_solution(double x, double t) {
  if (x < 0.0) return 0.0;
  if (x < 1.0 - t) return 1.0;
  if (x <= 1.0 + t) return 0.5 * (1.0 - (x - 1.0) / t);
  return 0.0;
}

/// Extended-precision transcription of the scheme for an affine velocity
/// V(w) = v0 + v1 w, used to take finite differences with less round-off
/// than the double-precision solver under test.
struct ExtendedScheme {
  long double dx, dt, alpha, eta, v0, v1;
  int steps;

  std::vector<long double> nonlocal(const std::vector<long double>& q) const {
    const std::size_t n = q.size();
    const long double r = std::exp(-dx / eta);
    const long double g0 = -std::expm1(-dx / eta);
    std::vector<long double> W(n);
    long double acc = 0.0L;
    for (std::size_t j = n; j-- > 0;) {
      acc = g0 * q[j] + r * acc;
      W[j] = acc;
    }
    return W;
  }

  std::vector<long double> terminal(const std::vector<double>& q0) const {
    std::vector<long double> q(q0.begin(), q0.end());
    std::vector<long double> next(q.size(), 0.0L);
    const long double a = alpha * dt / (2 * dx);
    const long double b = dt / (2 * dx);
    for (int n = 0; n < steps; ++n) {
      const auto W = nonlocal(q);
      next.front() = 0.0L;
      next.back() = 0.0L;
      for (std::size_t j = 1; j + 1 < q.size(); ++j) {
        next[j] = q[j] + a * (q[j - 1] - 2 * q[j] + q[j + 1]) +
                  b * (q[j - 1] * (v0 + v1 * W[j - 1]) - q[j + 1] * (v0 + v1 * W[j + 1]));
      }
      q.swap(next);
    }
    return q;
  }

  /// (dx/2) |q^N - q_d|^2, or the same with W applied to the mismatch.
  long double objective(const std::vector<double>& q0, const std::vector<double>& target,
                        bool nonlocal_tracking) const {
    const auto qN = terminal(q0);
    std::vector<long double> diff(qN.size());
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = qN[j] - target[j];
    if (nonlocal_tracking) diff = nonlocal(diff);
    long double s = 0.0L;
    for (long double v : diff) s += v * v;
    return 0.5L * dx * s;
  }

  /// Central difference with h = 1e-6 max(1, |q0_j|).
  double central_difference(const std::vector<double>& q0, std::size_t j,
                            const std::vector<double>& target, bool nonlocal_tracking) const {
    const double h = 1e-6 * std::max(1.0, std::abs(q0[j]));
    std::vector<double> plus(q0), minus(q0);
    plus[j] += h;
    minus[j] -= h;
    const long double d = objective(plus, target, nonlocal_tracking) -
                          objective(minus, target, nonlocal_tracking);
    return static_cast<double>(d / (static_cast<long double>(plus[j]) - minus[j]));
  }
};

inline std::vector<double> uniform(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace oracle
