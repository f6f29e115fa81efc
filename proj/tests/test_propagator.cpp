// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "pplog/propagator.hpp"

using namespace pplog;

static ScenarioSpec heat(const std::string& extra = "") {
  return parse_scenario("domain = 0 1\nperiod = 1\n" + extra);
}

// discrete Dirichlet Laplacian eigenvalue of the sin(pi x) mode
static double discrete_mu(double h) {
  return 4.0 / (h * h) * std::pow(std::sin(M_PI * h / 2.0), 2);
}

TEST_CASE("implicit Euler step decays the discrete heat mode exactly") {
  ScenarioSpec s = heat();
  Mesh m = build_mesh(s, 49, 16);
  MonodromyOperator op = make_monodromy(s, m);
  std::vector<double> v(m.nx);
  for (int k = 0; k < m.nx; ++k) v[k] = std::sin(M_PI * m.nodes[k]);
  auto u = step(op, v, 1);
  double factor = 1.0 / (1.0 + m.dt * discrete_mu(m.h));
  for (int k = 0; k < m.nx; ++k) CHECK(u[k] == Catch::Approx(v[k] * factor).margin(1e-12));

  std::vector<double> zero(m.nx, 0.0);
  auto z = step(op, zero, 1);
  for (double x : z) CHECK(x == 0.0);
}

TEST_CASE("implicit Euler step maps nonnegative states to nonnegative states") {
  ScenarioSpec s = heat("drift = 0.8*cos(2*pi*t)\npotential = -2 + x\n");
  Mesh m = build_mesh(s, 30, 8);
  MonodromyOperator op = make_monodromy(s, m);
  CHECK(op.m_matrix_steps());
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(m.nx);
  for (auto& x : v) x = dist(rng);
  v[4] = 0.0;
  auto u = op.apply(v);
  for (double x : u) CHECK(x >= 0.0);
}

TEST_CASE("monodromy of the heat equation reproduces the exponential decay") {
  ScenarioSpec s = heat();
  Mesh m = build_mesh(s, 200, 4000);
  MonodromyOperator op = make_monodromy(s, m);
  std::vector<double> v(m.nx);
  for (int k = 0; k < m.nx; ++k) v[k] = std::sin(M_PI * m.nodes[k]);
  auto u = op.apply(v);
  double target = std::exp(-M_PI * M_PI);
  for (int k = 0; k < m.nx; ++k)
    CHECK(u[k] == Catch::Approx(v[k] * target).epsilon(0.02));

  std::vector<double> zero(m.nx, 0.0);
  auto z = op.apply(zero);
  for (double x : z) CHECK(x == 0.0);
}

TEST_CASE("monodromy action is linear to round-off") {
  ScenarioSpec s = heat("diffusion = 1 + 0.5*sin(2*pi*t)\ndrift = 0.3\npotential = x\n"
                        "bc.hi = robin 1\n");
  Mesh m = build_mesh(s, 40, 32);
  MonodromyOperator op = make_monodromy(s, m);
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> v(m.nx), w(m.nx), vw(m.nx);
    double alpha = dist(rng) * 3;
    for (int k = 0; k < m.nx; ++k) {
      v[k] = dist(rng);
      w[k] = dist(rng);
      vw[k] = alpha * v[k] + w[k];
    }
    auto mv = op.apply(v), mw = op.apply(w), mvw = op.apply(vw);
    double scale = 0, err = 0;
    for (int k = 0; k < m.nx; ++k) {
      double lin = alpha * mv[k] + mw[k];
      err = std::max(err, std::fabs(mvw[k] - lin));
      scale = std::max(scale, std::fabs(lin));
    }
    CHECK(err <= 1e-12 * (scale + 1));
  }
}

TEST_CASE("constant potential shift scales the flow by exp(-sT) to first order") {
  // Neumann ends, c = 0 vs c = s = 2: constants are exact flow states
  ScenarioSpec s0 = heat("bc.lo = robin 0\nbc.hi = robin 0\n");
  ScenarioSpec s2 = heat("bc.lo = robin 0\nbc.hi = robin 0\npotential = 2\n");
  int nt = 64;
  Mesh m = build_mesh(s0, 20, nt);
  MonodromyOperator op0 = make_monodromy(s0, m);
  MonodromyOperator op2 = make_monodromy(s2, m, {}, {Scheme::ImplicitEuler, 0.0});
  std::vector<double> ones(m.nx, 1.0);
  auto u0 = op0.apply(ones);
  auto u2 = op2.apply(ones);
  double sshift = 2.0;
  double ratio = u2[10] / u0[10];
  double bound = 5.0 * m.dt * sshift * std::exp(-sshift);
  CHECK(std::fabs(ratio - std::exp(-sshift)) <= bound);
}

TEST_CASE("scaled application tracks extreme potentials without underflow") {
  ScenarioSpec s = heat("potential = 1000000\n");
  Mesh m = build_mesh(s, 30, 64);
  MonodromyOperator op = make_monodromy(s, m);
  double lf = 0;
  std::vector<double> v(m.nx, 1.0);
  auto w = op.apply_scaled(v, lf);
  CHECK(std::isfinite(lf));
  // the gauge absorbs the constant: the shifted flow is the plain heat flow
  CHECK(op.kappa() == Catch::Approx(1e6));
  CHECK(-lf <= 11.0);  // decay rate of order pi^2, not 1e6
  for (double x : w) CHECK(x > 0);
}

TEST_CASE("periodic solve: zero source gives the zero solution") {
  ScenarioSpec s = heat();
  Mesh m = build_mesh(s, 31, 32);
  MonodromyOperator op = make_monodromy(s, m);
  auto sol = periodic_solve(op, [](double, double) { return 0.0; });
  CHECK(sol.converged);
  for (double x : sol.u) CHECK(std::fabs(x) <= 1e-14);
}

TEST_CASE("periodic solve: steady source against the two-point boundary oracle") {
  ScenarioSpec s = heat();
  auto check_mesh = [&](int nx, int nt) {
    Mesh m = build_mesh(s, nx, nt);
    MonodromyOperator op = make_monodromy(s, m);
    auto sol = periodic_solve(op, [](double, double) { return 1.0; });
    REQUIRE(sol.converged);
    CHECK(sol.residual <= 1e-8);
    double h2 = m.h * m.h;
    for (int k = 0; k < m.nx; ++k) {
      double x = m.nodes[k];
      double exact = 0.5 * x * (1.0 - x);
      CHECK(sol.u[(m.nt / 2) * m.nx + k] == Catch::Approx(exact).margin(20 * h2 + 1e-6));
    }
    CHECK(sol.min_interior > 0.0);
  };
  check_mesh(40, 64);   // dense period-map path
  check_mesh(80, 64);   // matrix-free fixed-point path
}

TEST_CASE("periodic solve positivity for nonnegative nontrivial sources") {
  ScenarioSpec s = heat("bc.hi = robin 0.5\n");
  Mesh m = build_mesh(s, 33, 32);
  MonodromyOperator op = make_monodromy(s, m);
  // bump source supported on a subinterval, zero elsewhere
  auto sol = periodic_solve(op, [](double x, double) {
    double u = (x - 0.3) * (0.45 - x);
    return u > 0 ? u : 0.0;
  });
  REQUIRE(sol.converged);
  CHECK(sol.min_interior > 0.0);
}

TEST_CASE("periodic solve fails when the principal eigenvalue crosses zero") {
  // sigma = pi^2 + c: c = -8 keeps sigma > 0, c = -12 flips it negative
  ScenarioSpec good = heat("potential = -8\n");
  ScenarioSpec bad = heat("potential = -12\n");
  Mesh m = build_mesh(good, 40, 32);
  auto solg = periodic_solve(make_monodromy(good, m), [](double, double) { return 1.0; });
  CHECK(solg.converged);
  CHECK(solg.min_interior > 0.0);

  Mesh mb = build_mesh(bad, 80, 32);  // matrix-free path diverges
  CHECK_THROWS_AS(
      periodic_solve(make_monodromy(bad, mb), [](double, double) { return 1.0; }),
      NumericalError);
}
