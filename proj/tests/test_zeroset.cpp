// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "pplog/zeroset.hpp"

using namespace pplog;

static ScenarioSpec with_weight(const WeightSpec& w, const std::string& extra = "") {
  ScenarioSpec s = parse_scenario("domain = 0 1\nperiod = 1\n" + extra);
  s.weight_a = w;
  check_bump_invariants(s);
  return s;
}

static const char* kTube =
    "a.base = ((x - 0.5)^2 - 0.0225 + (((x - 0.5)^2 - 0.0225)^2)^0.5)/2\n";

TEST_CASE("strictly positive weight has an empty zero-set graph") {
  ScenarioSpec s = parse_scenario("domain = 0 1\nperiod = 1\n");
  Mesh m = build_mesh(s, 50, 32);
  ZeroSetGraph g = build_zero_set_graph(s, m);
  for (int j = 0; j < g.nt; ++j) CHECK(g.empty_layer(j));
  PathCertificate c = tau_path_exists(g);
  CHECK_FALSE(c.exists);
  CHECK(c.cut_layers.size() == static_cast<size_t>(g.nt));
}

TEST_CASE("straight tube: one component per layer, chained with the wrap") {
  ScenarioSpec s = parse_scenario(std::string("domain = 0 1\nperiod = 1\n") + kTube);
  Mesh m = build_mesh(s, 100, 64);
  ZeroSetGraph g = build_zero_set_graph(s, m);
  for (int j = 0; j < g.nt; ++j) REQUIRE(g.layers[j].size() == 1);
  PathCertificate c = tau_path_exists(g);
  REQUIRE(c.exists);
  CHECK(c.witness.size() == static_cast<size_t>(g.nt) + 1);
  CHECK(c.witness.front() == c.witness.back());

  // witness validity: a < eps on a full cell neighborhood along the walk
  for (int j = 0; j < g.nt; ++j) {
    const ZeroComponent& comp = g.layers[j][c.witness[j]];
    for (int k = comp.k_lo; k <= comp.k_hi; ++k) {
      double t = m.times[j];
      CHECK(eval_weight_a(s, m.nodes[k], t) < g.eps_zero);
      double xl = k > 0 ? m.nodes[k - 1] : m.x_lo;
      double xr = k + 1 < m.nx ? m.nodes[k + 1] : m.x_hi;
      CHECK(eval_weight_a(s, xl, t) < g.eps_zero);
      CHECK(eval_weight_a(s, xr, t) < g.eps_zero);
    }
  }
}

TEST_CASE("components within a layer are disjoint and sorted") {
  // two tubes separated in x
  ScenarioSpec s = parse_scenario(
      "domain = 0 1\nperiod = 1\n"
      "a.base = (((x - 0.3)^2 - 0.01 + (((x - 0.3)^2 - 0.01)^2)^0.5)/2)"
      "*(((x - 0.7)^2 - 0.01 + (((x - 0.7)^2 - 0.01)^2)^0.5)/2)\n");
  Mesh m = build_mesh(s, 120, 16);
  ZeroSetGraph g = build_zero_set_graph(s, m);
  for (int j = 0; j < g.nt; ++j) {
    REQUIRE(g.layers[j].size() == 2);
    CHECK(g.layers[j][0].k_hi < g.layers[j][1].k_lo);
  }
  CHECK(tau_path_exists(g).exists);
}

TEST_CASE("a time band of positivity cuts every path") {
  // tube in space, plus a weight band active for t in (0.4, 0.6)
  ScenarioSpec s = parse_scenario(
      std::string("domain = 0 1\nperiod = 1\n") +
      "a.base = ((x - 0.5)^2 - 0.0225 + (((x - 0.5)^2 - 0.0225)^2)^0.5)/2"
      " + (sin(pi*0.1)^2 - sin(pi*(t - 0.5))^2 + "
      "((sin(pi*0.1)^2 - sin(pi*(t - 0.5))^2)^2)^0.5)/2\n");
  Mesh m = build_mesh(s, 100, 100);
  ZeroSetGraph g = build_zero_set_graph(s, m);
  PathCertificate c = tau_path_exists(g);
  REQUIRE_FALSE(c.exists);
  REQUIRE_FALSE(c.cut_layers.empty());
  for (int j : c.cut_layers) {
    CHECK(m.times[j] > 0.4 - 1e-9);
    CHECK(m.times[j] < 0.6 + 1e-9);
  }
}

TEST_CASE("two-lobe weight with a time gap blocks every path at the gap") {
  ScenarioSpec s = with_weight(make_two_lobe_gap_weight(1.0));
  Mesh m = build_mesh(s, 150, 128);
  ZeroSetGraph g = build_zero_set_graph(s, m);
  PathCertificate c = tau_path_exists(g);
  REQUIRE_FALSE(c.exists);
  REQUIRE_FALSE(c.cut_layers.empty());
  // the analytic gaps are (0.25, 0.35) and (0.62, 0.70); the discrete
  // interior is wider near the lobe tips where slices are sub-cell, but the
  // cuts stay clear of the lobe cores
  for (int j : c.cut_layers) {
    double t = m.times[j];
    bool in_gap = (t > 0.18 && t < 0.42) || (t > 0.55 && t < 0.78);
    CHECK(in_gap);
  }
}

TEST_CASE("corridor verdicts are stable across a resolution doubling") {
  CorridorGeometry geom;
  auto verdict = [&](const WeightSpec& w, int nx, int nt) {
    ScenarioSpec s = with_weight(w);
    Mesh m = build_mesh(s, nx, nt);
    return tau_path_exists(build_zero_set_graph(s, m)).exists;
  };

  WeightSpec base = make_blocked_weight(geom, 1, {}, 1.0);
  base.bumps.clear();
  CHECK(verdict(base, 150, 192));
  CHECK(verdict(base, 300, 384));

  WeightSpec blocked1 = make_blocked_weight(geom, 1, {}, 1.0);
  CHECK_FALSE(verdict(blocked1, 150, 192));
  CHECK_FALSE(verdict(blocked1, 300, 384));

  WeightSpec blocked2 = make_blocked_weight(geom, 2, {0.5}, 1.0);
  CHECK_FALSE(verdict(blocked2, 150, 192));
  CHECK_FALSE(verdict(blocked2, 300, 384));

  WeightSpec blocked3 = make_blocked_weight(geom, 3, {0.47, 0.53}, 1.0);
  CHECK_FALSE(verdict(blocked3, 150, 192));
  CHECK_FALSE(verdict(blocked3, 300, 384));

  BlockedBumpParams aside;
  aside.shift_aside = true;
  aside.amplitude = 200;
  WeightSpec asidew = make_blocked_weight(geom, 1, {}, 1.0, aside);
  CHECK(verdict(asidew, 150, 192));
  CHECK(verdict(asidew, 300, 384));
}

TEST_CASE("blocked-weight construction invariants") {
  CorridorGeometry geom;
  // chain bumps abut in time at the given interior times with disjoint closures
  WeightSpec w2 = make_blocked_weight(geom, 2, {0.5}, 1.0);
  REQUIRE(w2.bumps.size() == 2);
  CHECK(w2.bumps[0].tc + w2.bumps[0].rt == Catch::Approx(0.5));
  CHECK(w2.bumps[1].tc - w2.bumps[1].rt == Catch::Approx(0.5));
  CHECK_NOTHROW(check_bump_invariants(with_weight(w2)));

  // severing bumps overhang into the dark region (by construction), the
  // aside variant is strictly contained in the vanishing set
  ScenarioSpec blocked = with_weight(make_blocked_weight(geom, 1, {}, 1.0));
  BumpContainmentReport rep = check_bump_containment(blocked);
  CHECK(rep.all_intersect_zero_set);
  CHECK(rep.overhang_fraction[0] > 0.0);

  BlockedBumpParams aside;
  aside.shift_aside = true;
  ScenarioSpec asides = with_weight(make_blocked_weight(geom, 1, {}, 1.0, aside));
  BumpContainmentReport arep = check_bump_containment(asides);
  CHECK(arep.overhang_fraction[0] == 0.0);
  CHECK(arep.all_intersect_zero_set);

  CHECK_THROWS_AS(make_blocked_weight(geom, 0, {}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_blocked_weight(geom, 2, {}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_blocked_weight(geom, 3, {0.53, 0.47}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_blocked_weight(geom, 2, {0.7}, 1.0), std::invalid_argument);
}

TEST_CASE("raster dump matches the graph components") {
  ScenarioSpec s = parse_scenario(std::string("domain = 0 1\nperiod = 1\n") + kTube);
  Mesh m = build_mesh(s, 60, 16);
  ZeroSetGraph g = build_zero_set_graph(s, m);
  auto raster = zero_set_raster(g);
  REQUIRE(raster.size() == static_cast<size_t>(g.nt));
  for (int j = 0; j < g.nt; ++j) {
    int count = 0;
    for (int v : raster[j]) count += v;
    int expect = 0;
    for (const auto& comp : g.layers[j]) expect += comp.k_hi - comp.k_lo + 1;
    CHECK(count == expect);
  }
}
