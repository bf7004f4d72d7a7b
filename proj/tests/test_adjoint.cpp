#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nlcl/adjoint.hpp"
#include "nlcl/forward.hpp"
#include "nlcl/reference.hpp"
#include "oracles.hpp"

using namespace nlcl;

namespace {

Discretization coarse(double eta, double q_max = 1.0, double T = 0.1, double dx = 0.02) {
  return discretize(GridSpec{-0.6, 1.6, dx, T, 1.0}, eta, Velocity::greenshields(), q_max);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("fast adjoint step matches the literal five-case recursion") {
  std::mt19937_64 rng(31);
  SUBCASE("seven cells, one step") {
    const Discretization d = discretize(GridSpec{0.0, 0.7, 0.1, 0.01, 1.0}, 0.2, Velocity::greenshields(), 1.0);
    REQUIRE(d.grid.P == 6);
    for (int trial = 0; trial < 20; ++trial) {
      const auto q = oracle::uniform(rng, 7, 0.0, 1.0);
      const auto p = oracle::uniform(rng, 7, -1.0, 1.0);
      const auto fast = adjoint_step(q, p, d);
      const auto ref = reference::adjoint_step(q, p, d);
      for (int j = 0; j < 7; ++j) CHECK(std::abs(fast[j] - ref[j]) <= 1e-13);
    }
  }
  SUBCASE("larger grids and both velocity scales") {
    for (double q_max : {1.0, 4.0}) {
      for (double eta : {0.5, 0.05}) {
        const Discretization d = coarse(eta, q_max);
        const auto q = oracle::uniform(rng, d.grid.cells(), 0.0, q_max);
        const auto p = oracle::uniform(rng, d.grid.cells(), -1.0, 1.0);
        const auto fast = adjoint_step(q, p, d);
        const auto ref = reference::adjoint_step(q, p, d);
        for (std::size_t j = 0; j < q.size(); ++j) {
          CHECK(std::abs(fast[j] - ref[j]) <= 1e-12 * q_max);
        }
      }
    }
  }
}

TEST_CASE("adjoint step is the transpose of the linearized step") {
  // With affine V the step is quadratic in q, so central differences are exact up to rounding.
  std::mt19937_64 rng(37);
  for (double eta : {0.5, 0.1, 0.01}) {
    const Discretization d = coarse(eta);
    const auto q = oracle::uniform(rng, d.grid.cells(), 0.0, 1.0);
    const auto p = oracle::uniform(rng, d.grid.cells(), -1.0, 1.0);
    const auto dir = oracle::uniform(rng, d.grid.cells(), -1.0, 1.0);
    const double h = 1e-3;
    std::vector<double> plus(q), minus(q);
    for (std::size_t i = 0; i < q.size(); ++i) {
      plus[i] += h * dir[i];
      minus[i] -= h * dir[i];
    }
    const auto sp = step(plus, d);
    const auto sm = step(minus, d);
    std::vector<double> jvp(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) jvp[i] = (sp[i] - sm[i]) / (2 * h);
    const double lhs = dot(p, jvp);
    const double rhs = dot(adjoint_step(q, p, d), dir);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("zero terminal condition propagates zero, and the sweep is linear") {
  std::mt19937_64 rng(41);
  const Discretization d = coarse(0.05);
  Control c;
  c.q0 = oracle::uniform(rng, d.grid.cells(), 0.0, 1.0);
  const auto traj = solve_forward(c, d);
  const std::vector<double> zero(d.grid.cells(), 0.0);
  const auto pz = solve_adjoint(traj, zero, d);
  for (double v : pz.p.data()) CHECK(v == 0.0);

  const auto t1 = oracle::uniform(rng, d.grid.cells(), -1.0, 1.0);
  const auto t2 = oracle::uniform(rng, d.grid.cells(), -1.0, 1.0);
  std::vector<double> t3(t1.size());
  for (std::size_t i = 0; i < t1.size(); ++i) t3[i] = 2.5 * t1[i] - t2[i];
  const auto a1 = solve_adjoint(traj, t1, d);
  const auto a2 = solve_adjoint(traj, t2, d);
  const auto p1 = a1.p.row(0);
  const auto p2 = a2.p.row(0);
  const auto p3 = solve_adjoint(traj, t3, d);
  const auto row = p3.p.row(0);
  for (std::size_t i = 0; i < row.size(); ++i) {
    CHECK(std::abs(row[i] - (2.5 * p1[i] - p2[i])) <= 1e-12);
  }
}

TEST_CASE("self-tracking gives a zero gradient") {
  const Discretization d = coarse(0.1);
  const Control c = sample_control(d.grid, [](double x) { return 0.5 * indicator(x); }, 1.0);
  for (ObjectiveKind kind : {ObjectiveKind::state_tracking, ObjectiveKind::nonlocal_tracking}) {
    const ObjectiveSpec spec{kind, Target{TargetKind::custom_csv, solve_forward_terminal(c.q0, d)}};
    const GradientReport r = gradient(c, spec, d);
    CHECK(r.objective == 0.0);
    CHECK(oracle::max_abs(r.gradient) == 0.0);
  }
}

TEST_CASE("adjoint gradient matches finite differences on the ramp target") {
  std::mt19937_64 rng(43);
  const Discretization d = coarse(0.1, 1.0, 0.2);
  Control c;
  c.q0 = oracle::uniform(rng, d.grid.cells(), 0.1, 0.9);
  for (ObjectiveKind kind : {ObjectiveKind::state_tracking, ObjectiveKind::nonlocal_tracking}) {
    const ObjectiveSpec spec{kind, make_target(TargetKind::ramp, d)};
    std::vector<int> idx;
    for (int j = 0; j < static_cast<int>(d.grid.cells()); j += 7) idx.push_back(j);
    const GradientReport r = gradient(c, spec, d, idx);
    CHECK(r.checked_indices == idx);
    CHECK(r.max_rel_err <= 1e-6);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double fd = r.fd_gradient[k];
      CHECK(std::abs(r.gradient[idx[k]] - fd) <= 1e-6 * std::max(std::abs(fd), 1e-12));
    }
  }
}

TEST_CASE("duality: <p^0, dq^0> equals the directional derivative of the objective") {
  std::mt19937_64 rng(47);
  const Discretization d = coarse(0.05, 1.0, 0.2);
  Control c;
  c.q0 = oracle::uniform(rng, d.grid.cells(), 0.2, 0.8);
  const ObjectiveSpec spec{ObjectiveKind::nonlocal_tracking, make_target(TargetKind::indicator, d)};
  const auto dir = oracle::uniform(rng, d.grid.cells(), -1.0, 1.0);
  const GradientReport r = gradient(c, spec, d);
  auto G = [&](double h) {
    std::vector<double> q(c.q0);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += h * dir[i];
    return composed_objective(q, spec, d);
  };
  // Richardson-extrapolated central differences.
  const double h = 1e-3;
  const double d1 = (G(h) - G(-h)) / (2 * h);
  const double d2 = (G(h / 2) - G(-h / 2)) / h;
  const double richardson = (4 * d2 - d1) / 3;
  const double adj = dot(r.gradient, dir);
  CHECK(std::abs(adj - richardson) <= 1e-8 * std::abs(adj));
}

TEST_CASE("bad inputs") {
  const Discretization d = coarse(0.1);
  Control c = sample_control(d.grid, [](double x) { return indicator(x); }, 1.0);
  const auto traj = solve_forward(c, d);
  const std::vector<double> short_tc(3, 0.0);
  CHECK_THROWS_AS(solve_adjoint(traj, short_tc, d), ValidationError);
  const ObjectiveSpec spec{ObjectiveKind::state_tracking, make_target(TargetKind::indicator, d)};
  const std::vector<int> bad{static_cast<int>(d.grid.cells())};
  CHECK_THROWS_AS(gradient(c, spec, d, bad), ValidationError);
}

TEST_CASE("terminal row on target: every adjoint level vanishes") {
  const Discretization d = coarse(0.1);
  const Control c = sample_control(d.grid, [](double x) { return 0.7 * indicator(x, 0.2, 0.9); }, 1.0);
  const auto traj = solve_forward(c, d);
  const std::vector<double> terminal(traj.terminal().begin(), traj.terminal().end());
  const ObjectiveSpec spec{ObjectiveKind::nonlocal_tracking, Target{TargetKind::custom_csv, terminal}};
  const AdjointTrajectory adj = solve_adjoint(traj, spec, d);
  CHECK(adj.p.rows() == traj.q.rows());
  for (double v : adj.p.data()) CHECK(v == 0.0);
}

TEST_CASE("zero control with a nonzero target gives a nonzero finite gradient") {
  const Discretization d = coarse(0.1, 1.0, 0.5);
  Control c;
  c.q0.assign(d.grid.cells(), 0.0);
  const ObjectiveSpec spec{ObjectiveKind::state_tracking, make_target(TargetKind::ramp, d)};
  const GradientReport r = gradient(c, spec, d);
  CHECK(oracle::max_abs(r.gradient) > 0.0);
  for (double g : r.gradient) CHECK(std::isfinite(g));
}

TEST_CASE("doubling the terminal mismatch doubles the state-tracking gradient") {
  std::mt19937_64 rng(53);
  const Discretization d = coarse(0.05, 1.0, 0.2);
  Control c;
  c.q0 = oracle::uniform(rng, d.grid.cells(), 0.1, 0.9);
  const auto qN = solve_forward_terminal(c.q0, d);
  const auto qd = oracle::uniform(rng, d.grid.cells(), 0.0, 1.0);
  std::vector<double> qd2(qd.size());
  for (std::size_t j = 0; j < qd.size(); ++j) qd2[j] = qN[j] - 2.0 * (qN[j] - qd[j]);
  const GradientReport g1 = gradient(c, {ObjectiveKind::state_tracking, Target{TargetKind::custom_csv, qd}}, d);
  const GradientReport g2 = gradient(c, {ObjectiveKind::state_tracking, Target{TargetKind::custom_csv, qd2}}, d);
  for (std::size_t j = 0; j < qd.size(); ++j) CHECK(std::abs(g2.gradient[j] - 2.0 * g1.gradient[j]) <= 1e-12);
}

TEST_CASE("ramp scenario on the default mesh: 25 random coordinates against finite differences") {
  std::mt19937_64 rng(59);
  const Discretization d = discretize(GridSpec{}, 0.1, Velocity::greenshields(), 1.0);
  Control c;
  c.q0 = oracle::uniform(rng, d.grid.cells(), 0.1, 0.9);
  const ObjectiveSpec spec{ObjectiveKind::state_tracking, make_target(TargetKind::ramp, d)};
  std::vector<int> idx(d.grid.cells());
  for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = static_cast<int>(j);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(25);
  const GradientReport r = gradient(c, spec, d, idx);
  CHECK(r.max_rel_err <= 1e-5);
}
