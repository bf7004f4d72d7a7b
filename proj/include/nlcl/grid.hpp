#pragma once

#include <cstddef>
#include <vector>

#include "nlcl/velocity.hpp"

namespace nlcl {

/// Uniform space-time mesh. Cells are indexed 0..P; cell j spans
/// [x_lo + j dx, x_lo + (j+1) dx] and has its center at the midpoint.
struct Grid {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double dx = 0.0;
  int P = 0;
  std::vector<double> centers;
  double T = 0.0;
  double dt = 0.0;
  int N = 0;

  std::size_t cells() const { return static_cast<std::size_t>(P) + 1; }
  double time(int n) const { return n == N ? T : n * dt; }

  /// Same spatial mesh, time step T / ceil(T / dt_hint).
  Grid with_time_step(double dt_hint) const;
};

/// Inputs of build_grid, kept together so a Grid can be rebuilt bit-identically.
struct GridSpec {
  double x_lo = -0.6;
  double x_hi = 1.6;
  double dx = 0.0025;
  double T = 0.5;
  double dt_hint = 1.0;
};

Grid build_grid(double x_lo, double x_hi, double dx, double T, double dt_hint);
inline Grid build_grid(const GridSpec& s) { return build_grid(s.x_lo, s.x_hi, s.dx, s.T, s.dt_hint); }

/// Cell integrals of the exponential kernel (1/eta) exp(-x/eta):
/// gamma_k = exp(-k dx/eta) - exp(-(k+1) dx/eta), k = 0..P.
struct KernelWeights {
  double eta = 0.0;
  std::vector<double> gamma;
  double ratio = 0.0;      // exp(-dx/eta) = gamma_{k+1} / gamma_k
  double tail_mass = 0.0;  // 1 - sum_k gamma_k, the truncated part
};

KernelWeights build_kernel(const Grid& grid, double eta);

struct SchemeParams {
  double alpha = 0.0;       // artificial diffusion
  double q_max = 0.0;       // upper box bound of the control
  double v_inf = 0.0;       // sup |V| on [0, q_max + 1]
  double vp_inf = 0.0;      // sup |V'| on [0, q_max + 1]
  double cfl_safety = 0.9;
  double dt_bound = 0.0;    // largest stable dt (no safety factor)
  double dt = 0.0;          // time step actually used, fitted to the horizon
};

/// alpha at its lower bound v_inf + vp_inf dx (q_max+1)/eta; stable step
/// dt <= 2 dx / (2 alpha + vp_inf dx (q_max+1)/eta). The chosen dt is
/// min(grid.dt, cfl_safety * bound), shrunk so that N dt = T.
SchemeParams scheme_params(const Grid& grid, const KernelWeights& kernel, const Velocity& V,
                           double q_max, double cfl_safety = 0.9, int samples = 10001);

/// True when dt respects both the step bound and alpha dt / dx <= 1.
bool admits_time_step(const SchemeParams& params, double dx, double dt);

/// Everything the nonlocal solver needs, mutually consistent
/// (grid.dt == params.dt).
struct Discretization {
  Grid grid;
  KernelWeights kernel;
  SchemeParams params;
  Velocity velocity;
};

Discretization discretize(const GridSpec& spec, double eta, Velocity V, double q_max,
                          double cfl_safety = 0.9);

}  // namespace nlcl
