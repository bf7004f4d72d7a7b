#include <doctest.h>

#include <cmath>

#include "nlcl/grid.hpp"
#include "nlcl/matrix.hpp"
#include "oracles.hpp"

using namespace nlcl;

TEST_CASE("default interval gives 880 cells with edge-midpoint centers") {
  const Grid g = build_grid(-0.6, 1.6, 0.0025, 0.5, 0.001);
  CHECK(g.cells() == 880);
  CHECK(g.P == 879);
  CHECK(g.centers.front() == doctest::Approx(-0.59875).epsilon(1e-14));
  CHECK(g.centers.back() == doctest::Approx(1.59875).epsilon(1e-14));
  CHECK(std::abs((g.x_hi - g.x_lo) - g.cells() * g.dx) <= 1e-12 * (g.x_hi - g.x_lo));
  for (std::size_t j = 1; j < g.cells(); ++j) {
    CHECK(std::abs(g.centers[j] - g.centers[j - 1] - g.dx) <= 1e-12);
  }
  CHECK(g.N == 500);
  CHECK(std::abs(g.N * g.dt - g.T) <= 1e-15);
}

TEST_CASE("two-cell grid with a single time step") {
  const Grid g = build_grid(0.0, 1.0, 0.5, 1.0, 1.0);
  REQUIRE(g.cells() == 2);
  CHECK(g.centers[0] == 0.25);
  CHECK(g.centers[1] == 0.75);
  CHECK(g.N == 1);
  CHECK(g.dt == 1.0);

  const Grid big_hint = build_grid(0.0, 1.0, 0.5, 1.0, 5.0);
  CHECK(big_hint.N == 1);
}

TEST_CASE("grid rejects bad input") {
  CHECK_THROWS_AS(build_grid(0.0, 1.0, 0.3, 1.0, 0.1), ValidationError);
  CHECK_THROWS_AS(build_grid(1.0, 0.0, 0.1, 1.0, 0.1), ValidationError);
  CHECK_THROWS_AS(build_grid(0.0, 1.0, 0.1, -1.0, 0.1), ValidationError);
  CHECK_THROWS_AS(build_grid(0.0, 1.0, 0.1, 1.0, 0.0), ValidationError);
}

TEST_CASE("rebuilding from the grid inputs is bit-identical") {
  const Grid a = build_grid(-0.6, 1.6, 0.0025, 0.5, 0.00123);
  const Grid b = build_grid(a.x_lo, a.x_hi, a.dx, a.T, a.dt);
  CHECK(a.centers == b.centers);
  CHECK(a.N == b.N);
  CHECK(a.dt == b.dt);
  CHECK(a.with_time_step(a.dt).N == a.N);
}

TEST_CASE("kernel weights: closed form, ratio, partial sums") {
  const Grid g = build_grid(-0.6, 1.6, 0.0025, 0.5, 0.001);
  for (double eta : {0.5, 0.1, 0.05, 0.01}) {
    const KernelWeights k = build_kernel(g, eta);
    REQUIRE(k.gamma.size() == g.cells());
    CHECK(k.ratio == doctest::Approx(std::exp(-g.dx / eta)).epsilon(1e-15));
    long double partial = 0.0L;
    for (std::size_t i = 0; i < k.gamma.size(); ++i) {
      const long double closed = std::exp(-static_cast<long double>(i) * g.dx / eta) -
                                 std::exp(-static_cast<long double>(i + 1) * g.dx / eta);
      CHECK(std::abs(k.gamma[i] - closed) <= 1e-14 * closed);
      CHECK(k.gamma[i] > 0.0);
      if (i + 1 < k.gamma.size()) {
        CHECK(k.gamma[i + 1] < k.gamma[i]);
        CHECK(std::abs(k.gamma[i + 1] - k.ratio * k.gamma[i]) <= 1e-14 * k.gamma[i + 1]);
      }
      partial += k.gamma[i];
      const double expected = -std::expm1(-static_cast<double>(i + 1) * g.dx / eta);
      CHECK(std::abs(static_cast<double>(partial) - expected) <= 1e-12);
    }
    double total = 0.0;
    for (double x : k.gamma) total += x;
    CHECK(std::abs(total + k.tail_mass - 1.0) <= 1e-12);
  }
}

TEST_CASE("first kernel weight matches quadrature of the kernel density") {
  const Grid g = build_grid(-0.6, 1.6, 0.0025, 0.5, 0.001);
  const double eta = 0.01;
  const KernelWeights k = build_kernel(g, eta);
  const double quad = oracle::integrate([eta](double x) { return std::exp(-x / eta) / eta; }, 0.0, g.dx);
  CHECK(std::abs(k.gamma[0] - quad) <= 1e-10);
  CHECK(k.gamma[0] == doctest::Approx(1.0 - std::exp(-0.25)).epsilon(1e-14));
  CHECK(k.gamma[5] / k.gamma[4] == doctest::Approx(std::exp(-0.25)).epsilon(1e-14));
}

TEST_CASE("kernel rejects non-positive eta") {
  const Grid g = build_grid(0.0, 1.0, 0.1, 1.0, 0.1);
  CHECK_THROWS_AS(build_kernel(g, 0.0), ValidationError);
  CHECK_THROWS_AS(build_kernel(g, -0.5), ValidationError);
}

TEST_CASE("scheme parameters for the Greenshields velocity") {
  const Grid g = build_grid(-0.6, 1.6, 0.0025, 0.5, 1.0);
  const KernelWeights k = build_kernel(g, 0.01);

  const SchemeParams p1 = scheme_params(g, k, Velocity::greenshields(), 1.0);
  CHECK(p1.v_inf == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p1.vp_inf == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p1.alpha == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(admits_time_step(p1, g.dx, p1.dt));
  CHECK(p1.dt * p1.alpha / g.dx <= 1.0);
  CHECK(p1.dt <= 0.9 * 2.0 * g.dx / (2.0 * 1.5 + 1.0 * g.dx * 2.0 / 0.01) * (1 + 1e-12));
  CHECK(std::abs(g.T / p1.dt - std::round(g.T / p1.dt)) < 1e-9);

  const SchemeParams p4 = scheme_params(g, k, Velocity::greenshields(), 4.0);
  CHECK(p4.v_inf == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(p4.alpha == doctest::Approx(4.0 + 0.0025 * 5.0 / 0.01).epsilon(1e-12));
}

TEST_CASE("constant velocity: alpha equals the speed and dt up to dx/c is admitted") {
  const Grid g = build_grid(0.0, 1.0, 0.01, 1.0, 1.0);
  const KernelWeights k = build_kernel(g, 0.1);
  const SchemeParams p = scheme_params(g, k, Velocity::constant(2.0), 1.0, 1.0);
  CHECK(p.vp_inf == 0.0);
  CHECK(p.alpha == doctest::Approx(2.0));
  CHECK(admits_time_step(p, g.dx, g.dx / 2.0));
  CHECK(admits_time_step(p, g.dx, 0.5 * g.dx / 2.0));
  CHECK_FALSE(admits_time_step(p, g.dx, 1.01 * g.dx / 2.0));
}

TEST_CASE("scheme_params rejects invalid safety factors") {
  const Grid g = build_grid(0.0, 1.0, 0.01, 1.0, 1.0);
  const KernelWeights k = build_kernel(g, 0.1);
  CHECK_THROWS_AS(scheme_params(g, k, Velocity::greenshields(), 1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(scheme_params(g, k, Velocity::greenshields(), 1.0, 1.5), ValidationError);
  CHECK_THROWS_AS(scheme_params(g, k, Velocity::greenshields(), -1.0), ValidationError);
}

TEST_CASE("discretize keeps grid and scheme time steps consistent") {
  const Discretization d = discretize(GridSpec{}, 0.01, Velocity::greenshields(), 1.0);
  CHECK(d.grid.dt == d.params.dt);
  CHECK(admits_time_step(d.params, d.grid.dx, d.grid.dt));
  CHECK(std::abs(d.grid.N * d.grid.dt - d.grid.T) <= 1e-14);
}
