#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "imethod/dynamics.hpp"
#include "imethod/functionals.hpp"
#include "imethod/multiplier.hpp"
#include "oracles.hpp"

using namespace imethod;

TEST_CASE("pointwise nonlinearity") {
  auto f4 = Field::zeros(Grid::make(4, 8, 1.0));
  f4.values[17] = 2.0;
  CHECK(nonlinearity(f4, 4).values[17] == complex(4.0, 0.0));
  CHECK(nonlinearity(f4, 4).values[0] == complex(0.0, 0.0));

  auto f3 = Field::zeros(Grid::make(3, 8, 1.0));
  f3.values[5] = complex(0.0, 8.0);
  CHECK(std::abs(nonlinearity(f3, 3).values[5] - complex(0.0, 128.0)) < 1e-12);
  CHECK_THROWS_AS(nonlinearity(f3, 2), std::invalid_argument);
}

TEST_CASE("free propagation of a plane wave") {
  const auto g = Grid::make(2, 16, 2.0 * kPi);
  const double dt = 0.01;
  const SplitStepSolver solver(g, 2, dt);
  auto u = oracle::plane_wave(g, 1.0, {2, -3}, 0.0, 2);
  solver.linear_step(u);
  const double xi2 = 4.0 + 9.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.unflatten(i);
    const double phase = 2.0 * g.coordinate(idx[0]) - 3.0 * g.coordinate(idx[1]) - xi2 * dt;
    CHECK(std::abs(u.values[i] - std::polar(1.0, phase)) < 1e-12);
  }
}

TEST_CASE("one step of the nonlinear plane wave") {
  const auto g = Grid::make(3, 32, 2.0 * kPi);
  const double dt = 1e-3;
  auto u = oracle::plane_wave(g, 1.0, {1, 0, 0}, 0.0, 3);
  SplitStepSolver(g, 3, dt).step(u);
  CHECK(fixture::sup_distance(u, oracle::plane_wave(g, 1.0, {1, 0, 0}, dt, 3)) <= 1e-8);
}

TEST_CASE("a single step conserves mass") {
  const auto g = Grid::make(3, 16, 2.0 * kPi);
  auto u = fixture::random_field(g, 4);
  const double m0 = mass(u);
  SplitStepSolver(g, 3, 1e-3).step(u);
  CHECK(std::abs(mass(u) / m0 - 1.0) <= 1e-13);
}

TEST_CASE("zero data stays zero") {
  const auto g = Grid::make(2, 16, 1.0);
  StepConfig cfg;
  cfg.dt = 0.01;
  cfg.t_final = 0.1;
  const auto traj = evolve(Field::zeros(g), cfg, 2);
  CHECK(traj.states.size() == 11);
  for (const auto& s : traj.states) {
    for (const auto& v : s.values) CHECK(v == complex(0.0, 0.0));
  }
}

TEST_CASE("nonlinear plane wave over unit time") {
  const auto g = Grid::make(3, 32, 2.0 * kPi);
  StepConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 1.0;
  cfg.snapshot_stride = 100;
  const auto u0 = oracle::plane_wave(g, complex(0.6, 0.8), {1, -1, 2}, 0.0, 3);
  double worst = 0.0;
  std::size_t snapshots = 0;
  evolve(u0, cfg, 3, [&](double t, const Field& u) {
    ++snapshots;
    worst = std::max(worst, fixture::sup_distance(u, oracle::plane_wave(g, complex(0.6, 0.8), {1, -1, 2}, t, 3)));
  });
  CHECK(snapshots == 11);
  CHECK(worst <= 1e-6);
}

TEST_CASE("snapshot times follow the stride and end at t_final") {
  const auto g = Grid::make(1, 16, 1.0);
  StepConfig cfg;
  cfg.dt = 0.1;
  cfg.t_final = 1.0;
  cfg.snapshot_stride = 3;
  const auto traj = evolve(oracle::gaussian(g, 1.0, 0.2), cfg, 1);
  const std::vector<double> expected = {0.0, 0.3, 0.6, 0.9, 1.0};
  REQUIRE(traj.times.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(traj.times[i] == doctest::Approx(expected[i]));
  CHECK(traj.times.back() == 1.0);
}

TEST_CASE("Strang splitting is second order for Gaussian data in one dimension") {
  const auto g = Grid::make(1, 256, 20.0);
  const auto u0 = oracle::gaussian(g, 2.0, 1.0);
  const auto solve = [&](double dt) {
    StepConfig cfg;
    cfg.dt = dt;
    cfg.t_final = 0.5;
    cfg.snapshot_stride = 1000000;
    Field last = u0;
    evolve(u0, cfg, 1, [&](double, const Field& u) { last = u; });
    return last;
  };
  const auto a = solve(0.01);
  const auto b = solve(0.005);
  const auto c = solve(0.0025);
  auto d1 = a, d2 = b;
  for (std::size_t i = 0; i < g.size(); ++i) {
    d1.values[i] -= b.values[i];
    d2.values[i] -= c.values[i];
  }
  const double ratio = l2_norm(d1) / l2_norm(d2);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("fused and unfused phases agree") {
  const auto g = Grid::make(2, 32, 2.0 * kPi);
  const auto u0 = fixture::random_field(g, 17);
  StepConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 0.2;
  cfg.snapshot_stride = 50;
  auto fused = evolve(u0, cfg, 2);
  cfg.fuse_phases = false;
  auto plain = evolve(u0, cfg, 2);
  REQUIRE(fused.states.size() == plain.states.size());
  for (std::size_t k = 0; k < fused.states.size(); ++k) {
    CHECK(fixture::sup_distance(fused.states[k], plain.states[k]) <= 1e-12);
  }
}

TEST_CASE("backward steps undo forward steps") {
  const auto g = Grid::make(3, 16, 2.0 * kPi);
  const auto u0 = fixture::random_field(g, 2);
  Field u = u0;
  const SplitStepSolver fwd(g, 3, 1e-3), bwd(g, 3, -1e-3);
  for (int k = 0; k < 200; ++k) fwd.step(u);
  for (int k = 0; k < 200; ++k) bwd.step(u);
  CHECK(fixture::sup_distance(u, u0) < 1e-11);
}

TEST_CASE("dealiasing removes the top third of the spectrum") {
  const auto g = Grid::make(1, 64, 2.0 * kPi);
  auto u = oracle::plane_wave(g, 1.0, {30}, 0.0, 1);
  SplitStepSolver(g, 1, 1e-3, true).nonlinear_phase(u, 1e-3);
  CHECK(l2_norm(u) < 1e-12);
}

TEST_CASE("step configuration validation") {
  StepConfig cfg;
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.dt = 0.3;
  cfg.t_final = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.dt = 0.25;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.step_count() == 4);
  cfg.snapshot_stride = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_THROWS_AS(SplitStepSolver(Grid::make(1, 8, 1.0), 1, 0.0), std::invalid_argument);
}

TEST_CASE("non-finite initial data is rejected") {
  auto u = Field::zeros(Grid::make(1, 8, 1.0));
  u.values[0] = complex(INFINITY, 0.0);
  StepConfig cfg;
  cfg.dt = 0.1;
  CHECK_THROWS_AS(evolve(u, cfg, 1), std::invalid_argument);
}

TEST_CASE("H1 growth past the blow-up factor aborts") {
  const auto g = Grid::make(2, 32, 2.0 * kPi);
  const auto u0 = oracle::gaussian(g, 5.0, 0.8);
  StepConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 0.1;
  cfg.blowup_factor = 1.0 + 1e-9;
  CHECK_THROWS_AS(evolve(u0, cfg, 2), SolverAbort);
}
