#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "nlcl/forward.hpp"
#include "nlcl/matrix.hpp"
#include "nlcl/objectives.hpp"
#include "oracles.hpp"

using namespace nlcl;

namespace {

Discretization small(int cells, double dx, double eta) {
  return discretize(GridSpec{0.0, cells * dx, dx, 0.1, 1.0}, eta, Velocity::greenshields(), 1.0);
}

}  // namespace

TEST_CASE("state tracking on a hand example") {
  const Discretization d = small(5, 0.2, 0.1);
  ObjectiveSpec spec{ObjectiveKind::state_tracking, Target{TargetKind::custom_csv, {0, 0, 0, 0, 0}}};
  const std::vector<double> q{1.0, 0.0, 1.0, 3.0, 0.0};
  CHECK(eval_objective(spec, q, d) == doctest::Approx(1.1).epsilon(1e-15));
  spec.target.values = q;
  CHECK(eval_objective(spec, q, d) == 0.0);
}

TEST_CASE("nonlocal tracking equals the brute-force double sum") {
  std::mt19937_64 rng(17);
  const Discretization d = small(41, 0.025, 0.07);
  const auto q = oracle::uniform(rng, 41, 0.0, 1.0);
  const auto qd = oracle::uniform(rng, 41, 0.0, 1.0);
  std::vector<double> diff(41);
  for (int i = 0; i < 41; ++i) diff[i] = q[i] - qd[i];
  const auto Wd = oracle::nonlocal_brute(diff, d.grid.dx, 0.07);
  double expected = 0.0;
  for (double w : Wd) expected += w * w;
  expected *= 0.5 * d.grid.dx;
  const ObjectiveSpec spec{ObjectiveKind::nonlocal_tracking, Target{TargetKind::custom_csv, qd}};
  CHECK(std::abs(eval_objective(spec, q, d) - expected) <= 1e-13 * expected);
}

TEST_CASE("terminal adjoint is the gradient of the objective") {
  std::mt19937_64 rng(23);
  const Discretization d = small(31, 0.03, 0.05);
  const auto q = oracle::uniform(rng, 31, 0.0, 1.0);
  const auto qd = oracle::uniform(rng, 31, 0.0, 1.0);
  for (ObjectiveKind kind : {ObjectiveKind::state_tracking, ObjectiveKind::nonlocal_tracking}) {
    const ObjectiveSpec spec{kind, Target{TargetKind::custom_csv, qd}};
    const auto g = terminal_adjoint(spec, q, d);
    for (int j = 0; j < 31; ++j) {
      auto plus = q;
      auto minus = q;
      const double h = 1e-5;
      plus[j] += h;
      minus[j] -= h;
      const double fd = (eval_objective(spec, plus, d) - eval_objective(spec, minus, d)) / (2 * h);
      CHECK(std::abs(g[j] - fd) <= 1e-9);
    }
  }
}

TEST_CASE("nonlocal tracking smooths a single-cell mismatch") {
  const Discretization d = small(50, 0.02, 0.1);
  std::vector<double> q(50, 0.0);
  q[25] = 1.0;
  const Target zero{TargetKind::custom_csv, std::vector<double>(50, 0.0)};
  const double Jq = eval_objective({ObjectiveKind::state_tracking, zero}, q, d);
  const double JW = eval_objective({ObjectiveKind::nonlocal_tracking, zero}, q, d);
  CHECK(JW > 0.0);
  CHECK(JW < Jq);
}

TEST_CASE("closed-form targets") {
  const Discretization d = discretize(GridSpec{-0.6, 1.6, 0.02, 0.5, 1.0}, 0.05, Velocity::greenshields(), 1.0);
  const Target ind = make_target(TargetKind::indicator, d);
  const Target ramp = make_target(TargetKind::ramp, d);
  for (std::size_t j = 0; j < d.grid.cells(); ++j) {
    const double x = d.grid.centers[j];
    CHECK(ind.values[j] == (x >= 0.0 && x < 1.0 ? 1.0 : 0.0));
    CHECK(ramp.values[j] == doctest::Approx(x >= 0.0 && x < 1.0 ? 1.0 - x : 0.0));
  }
  CHECK_THROWS_AS(make_target(TargetKind::custom_csv, d), ValidationError);
}

TEST_CASE("nonlocal-solution target equals the forward terminal and is cached") {
  const Discretization d = discretize(GridSpec{-0.6, 1.6, 0.02, 0.5, 1.0}, 0.05, Velocity::greenshields(), 1.0);
  const Target a = make_target(TargetKind::nonlocal_solution, d);
  const Target b = make_target(TargetKind::nonlocal_solution, d);
  CHECK(a.values == b.values);
  const Control c = sample_control(d.grid, [](double x) { return indicator(x); }, 1.0);
  CHECK(a.values == solve_forward_terminal(c.q0, d));
}

TEST_CASE("custom csv targets") {
  const auto dir = std::filesystem::temp_directory_path() / "nlcl_objective_csv";
  std::filesystem::create_directories(dir);
  const Discretization d = small(4, 0.25, 0.1);
  {
    std::ofstream(dir / "ok.csv") << "q_d\n0.1\n0.2\n0.3\n0.4\n";
    std::ofstream(dir / "short.csv") << "0.1\n0.2\n";
    std::ofstream(dir / "junk.csv") << "0.1\nabc\n0.3\n0.4\n";
  }
  const Target t = load_target_csv(dir / "ok.csv", d.grid);
  CHECK(t.values == std::vector<double>{0.1, 0.2, 0.3, 0.4});
  CHECK_THROWS_AS(load_target_csv(dir / "short.csv", d.grid), ValidationError);
  CHECK_THROWS_AS(load_target_csv(dir / "junk.csv", d.grid), ValidationError);
  CHECK_THROWS_AS(load_target_csv(dir / "missing.csv", d.grid), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("objective names round-trip") {
  CHECK(objective_from_string("J_W") == ObjectiveKind::nonlocal_tracking);
  CHECK(objective_from_string("J_q") == ObjectiveKind::state_tracking);
  CHECK(to_string(ObjectiveKind::nonlocal_tracking) == "J_W");
  CHECK_THROWS_AS(objective_from_string("J_x"), ValidationError);
}

TEST_CASE("constant rows on the default mesh") {
  const Discretization d = discretize(GridSpec{}, 0.01, Velocity::greenshields(), 1.0);
  REQUIRE(d.grid.cells() == 880);
  const ObjectiveSpec spec{ObjectiveKind::state_tracking,
                           Target{TargetKind::custom_csv, std::vector<double>(880, 0.0)}};
  CHECK(eval_objective(spec, std::vector<double>(880, 1.0), d) == doctest::Approx(1.1).epsilon(1e-13));
}

TEST_CASE("closed-form target values at sample points") {
  const Discretization d = discretize(GridSpec{-0.6, 1.6, 0.1, 0.5, 1.0}, 0.1, Velocity::greenshields(), 1.0);
  const Target ramp = make_target(TargetKind::ramp, d);
  const Target ind = make_target(TargetKind::indicator, d);
  auto at = [&](const Target& t, double x) {
    for (std::size_t j = 0; j < d.grid.cells(); ++j) {
      if (std::abs(d.grid.centers[j] - x) < 1e-9) return t.values[j];
    }
    FAIL("no center at ", x);
    return 0.0;
  };
  CHECK(at(ramp, 0.55) == doctest::Approx(0.45));
  CHECK(at(ramp, 1.25) == 0.0);
  CHECK(at(ind, -0.15) == 0.0);
  CHECK(at(ind, 0.35) == 1.0);
}

TEST_CASE("single-cell mismatch: local gradient for J_q, spread gradient for J_W") {
  const Discretization d = small(40, 0.025, 0.1);
  const int m = 20;
  const double delta = 0.3;
  std::vector<double> q(40, 0.0);
  q[m] = delta;
  const Target zero{TargetKind::custom_csv, std::vector<double>(40, 0.0)};

  const auto gq = terminal_adjoint({ObjectiveKind::state_tracking, zero}, q, d);
  for (int j = 0; j < 40; ++j) CHECK(gq[j] == doctest::Approx(j == m ? d.grid.dx * delta : 0.0));

  const auto W = oracle::nonlocal_brute(q, d.grid.dx, 0.1);
  for (int j = 0; j < 40; ++j) {
    if (j <= m) CHECK(W[j] > 0.0);
    if (j > m) CHECK(W[j] == 0.0);
  }
  const auto gW = terminal_adjoint({ObjectiveKind::nonlocal_tracking, zero}, q, d);
  int support = 0;
  for (double v : gW) support += v > 0.0;
  CHECK(support == 40);
  CHECK(*std::max_element(gW.begin(), gW.end()) < gq[m]);
}

TEST_CASE("objectives vanish exactly on the target") {
  std::mt19937_64 rng(29);
  const Discretization d = small(30, 0.05, 0.2);
  const auto qd = oracle::uniform(rng, 30, 0.0, 1.0);
  for (ObjectiveKind kind : {ObjectiveKind::state_tracking, ObjectiveKind::nonlocal_tracking}) {
    const ObjectiveSpec spec{kind, Target{TargetKind::custom_csv, qd}};
    CHECK(eval_objective(spec, qd, d) == 0.0);
    for (double g : terminal_adjoint(spec, qd, d)) CHECK(g == 0.0);
  }
}
