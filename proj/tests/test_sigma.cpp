// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "pplog/sigma.hpp"

using namespace pplog;

static ScenarioSpec heat(const std::string& extra = "") {
  return parse_scenario("domain = 0 1\nperiod = 1\n" + extra);
}

// steep-edged tube weight: vanishes exactly on |x - 0.5| <= 0.15, saturates
// near 1 outside, positive at the boundary
static const char* kTubeBase =
    "a.base = (100000*((x - 0.5)^2 - 0.0225 + (((x - 0.5)^2 - 0.0225)^2)^0.5)/2)"
    "/(1 + 100000*((x - 0.5)^2 - 0.0225 + (((x - 0.5)^2 - 0.0225)^2)^0.5)/2)\n";

TEST_CASE("Sigma(0,0) is the unweighted principal eigenvalue") {
  ScenarioSpec s = heat();
  Mesh m = build_mesh(s, 100, 128);
  SigmaEvaluator ev(s, m);
  double pi2 = M_PI * M_PI;
  CHECK(std::fabs(ev.eval(0, 0).sigma - pi2) / pi2 < 0.005);
}

TEST_CASE("constant weight: Sigma(lambda, gamma) = Sigma(lambda, 0) + gamma exactly") {
  ScenarioSpec s = heat("m = cos(2*pi*t) + x\n");
  Mesh m = build_mesh(s, 80, 128);
  SigmaEvaluator ev(s, m);
  double lambda = 1.3;
  double base = ev.eval(lambda, 0).sigma;
  for (double g : {1.0, 1024.0, 1048576.0}) {
    double sig = ev.eval(lambda, g).sigma;
    CHECK(std::fabs(sig - base - g) <= 1e-8 * (1 + g));
  }
}

TEST_CASE("weight bounded below: Sigma grows at least linearly with slope omega") {
  ScenarioSpec s = heat("a.base = 0.5 + 0.5*sin(pi*x)^2\n");
  Mesh m = build_mesh(s, 80, 128);
  SigmaEvaluator ev(s, m);
  double base = ev.eval(0.7, 0).sigma;
  double g = 8.0;
  CHECK(ev.eval(0.7, g).sigma >= base + 0.5 * g - 1e-6);
}

TEST_CASE("classifier: strictly positive weight diverges with unbounded slope") {
  ScenarioSpec s = heat();
  Mesh m = build_mesh(s, 60, 64);
  SigmaEvaluator ev(s, m);
  SigmaClassification cls = classify_sigma_infinity(ev, 0.0);
  CHECK(cls.kind == SigmaClassification::Kind::Divergent);
  // a == 1: increment per doubling equals gamma itself
  CHECK(cls.slope_per_doubling == Catch::Approx(std::ldexp(1.0, 19)).epsilon(1e-6));
}

TEST_CASE("classifier: straight tube is finite with the Dirichlet plateau") {
  ScenarioSpec s = heat(kTubeBase);
  Mesh m = build_mesh(s, 200, 256);
  SigmaEvaluator ev(s, m);
  SigmaClassification cls = classify_sigma_infinity(ev, 0.0);
  REQUIRE(cls.kind == SigmaClassification::Kind::Finite);
  double limit = M_PI * M_PI / (0.3 * 0.3);
  CHECK(std::fabs(cls.plateau - limit) / limit <= 0.10);

  // gamma-monotonicity along the ramp and the strict ordering chain
  for (size_t i = 0; i + 1 < cls.sigmas.size(); ++i)
    CHECK(cls.sigmas[i] <= cls.sigmas[i + 1] + 1e-7 * (1 + std::fabs(cls.sigmas[i + 1])));
  double mid = ev.eval(0.0, 8.0).sigma;
  CHECK(cls.sigmas.front() < mid);
  CHECK(mid < cls.plateau);
}

TEST_CASE("sigma curve: gamma-monotone and lambda-concave on a mixed scenario") {
  ScenarioSpec s = heat("m = cos(pi*x) + 0.3*sin(2*pi*t)\n"
                        "a.base = 1 + 0.5*sin(pi*x)*cos(2*pi*t)\n"
                        "bc.hi = robin 0.5\n");
  Mesh m = build_mesh(s, 60, 64);
  SigmaEvaluator ev(s, m);
  std::vector<double> lambdas, gammas;
  for (int i = 0; i <= 6; ++i) lambdas.push_back(-3.0 + i);
  for (int i = 0; i <= 4; ++i) gammas.push_back(std::ldexp(1.0, i));
  SigmaCurve curve = compute_sigma_curve(ev, lambdas, gammas, /*classify=*/false);
  CHECK(curve.max_monotonicity_violation <= 1e-7);
  CHECK(curve.max_concavity_violation <= 1e-6);
}

TEST_CASE("lambda roots: constant weight has a single crossing at pi^2") {
  ScenarioSpec s = heat();
  Mesh m = build_mesh(s, 200, 256);
  SigmaEvaluator ev(s, m);
  LambdaRoots r = find_lambda_pm(ev, -20, 40, 1e-6);
  REQUIRE(r.lambda_plus);
  CHECK_FALSE(r.lambda_minus);
  CHECK(std::fabs(*r.lambda_plus - M_PI * M_PI) / (M_PI * M_PI) <= 0.005);
  CHECK_FALSE(r.eq18_low);   // int min m = 1 > 0
  CHECK(r.eq18_high);
  CHECK(r.sign_pattern_ok);
  // Sigma at the root is zero to bisection accuracy
  CHECK(std::fabs(ev.eval(*r.lambda_plus, 0).sigma) <= 1e-3);

  ScenarioSpec sm = heat("m = -1\n");
  SigmaEvaluator evm(sm, m);
  LambdaRoots rm = find_lambda_pm(evm, -40, 20, 1e-6);
  REQUIRE(rm.lambda_minus);
  CHECK_FALSE(rm.lambda_plus);
  CHECK(std::fabs(*rm.lambda_minus + M_PI * M_PI) / (M_PI * M_PI) <= 0.005);
}

TEST_CASE("lambda roots: odd-symmetric weight gives symmetric roots") {
  // under x -> 1-x the weight cos(pi x) flips sign, so Sigma(lambda) is even
  ScenarioSpec s = heat("m = cos(pi*x)\n");
  Mesh m = build_mesh(s, 100, 128);
  SigmaEvaluator ev(s, m);
  LambdaRoots r = find_lambda_pm(ev, -60, 60, 1e-6);
  REQUIRE(r.lambda_minus);
  REQUIRE(r.lambda_plus);
  CHECK(r.eq18_low);
  CHECK(r.eq18_high);
  CHECK(*r.lambda_minus < r.lambda_max_location);
  CHECK(r.lambda_max_location < *r.lambda_plus);
  CHECK(std::fabs(*r.lambda_minus + *r.lambda_plus) <=
        0.01 * std::fabs(*r.lambda_plus));
  CHECK(std::fabs(ev.eval(*r.lambda_plus, 0).sigma) <= 1e-3);
  CHECK(std::fabs(ev.eval(*r.lambda_minus, 0).sigma) <= 1e-3);
}

TEST_CASE("concentration: the eigenfunction drains off the refuge as gamma grows") {
  ScenarioSpec s = heat(kTubeBase);
  Mesh m = build_mesh(s, 150, 192);
  SigmaEvaluator ev(s, m);
  double max_a = 0;
  for (double x : m.nodes) max_a = std::max(max_a, eval_weight_a(s, x, 0));
  std::vector<double> gammas = {1, 10, 100, 1000, 10000};
  ConcentrationProfile prof = concentration_profile(ev, 0.0, gammas, 0.5 * max_a);
  CHECK(prof.ratio_first_last >= 10.0);
  // the gamma = 0 entry is the sup of the unweighted eigenfunction there: <= 1
  EigenResult r0 = ev.eval(0.0, 0.0);
  double sup0 = 0;
  const CoefficientTable& tab = ev.table();
  for (int j = 0; j <= m.nt; ++j)
    for (int k = 0; k < m.nx; ++k)
      if (tab.at(tab.a, j, k) >= 0.5 * max_a) sup0 = std::max(sup0, r0.phi_at(j, k, m.nx));
  CHECK(sup0 <= 1.0);
  CHECK(sup0 > 0.0);
}

TEST_CASE("classification kind is uniform across lambda") {
  ScenarioSpec s = heat(kTubeBase);
  Mesh m = build_mesh(s, 120, 160);
  SigmaEvaluator ev(s, m, {1e-9, 60000, Scheme::ImplicitEuler, true});
  for (double lambda : {0.0, 3.0})
    CHECK(classify_sigma_infinity(ev, lambda).kind == SigmaClassification::Kind::Finite);
  ScenarioSpec s1 = heat();
  Mesh m1 = build_mesh(s1, 60, 64);
  SigmaEvaluator ev1(s1, m1);
  for (double lambda : {-2.0, 2.0})
    CHECK(classify_sigma_infinity(ev1, lambda).kind ==
          SigmaClassification::Kind::Divergent);
}

TEST_CASE("concentration refuses scenarios without a finite classification") {
  ScenarioSpec s = heat();
  Mesh m = build_mesh(s, 60, 64);
  SigmaEvaluator ev(s, m);
  CHECK_THROWS_AS(concentration_profile(ev, 0.0, {1, 10}, 0.5), std::invalid_argument);
}
