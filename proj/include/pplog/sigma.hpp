// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0
//! \file pplog/sigma.hpp
//! The bi-parametric eigenvalue family Sigma(lambda, gamma) =
//! sigma[P - lambda m + gamma a, B, Q_T]: evaluation with dt-Richardson
//! extrapolation, the finite-gamma classifier for Sigma(lambda, infinity),
//! lambda_+- roots, and the eigenfunction concentration diagnostic.

#ifndef PPLOG_SIGMA_HPP
#define PPLOG_SIGMA_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pplog/eigen.hpp"

namespace pplog {

struct EigenOptions {
  double tol = 1e-10;
  int max_iter = 20000;
  Scheme scheme = Scheme::ImplicitEuler;
  bool richardson = true;  // sigma from two runs at nt and 2nt
};

//! Evaluates Sigma(lambda, gamma) on a fixed mesh. Coefficient tables for the
//! nt and 2nt meshes are sampled once and shared across the sweep; repeated
//! calls can be warm-started with a previous Perron vector.
class SigmaEvaluator {
 public:
  SigmaEvaluator(const ScenarioSpec& spec, const Mesh& mesh, EigenOptions opts = {})
      : spec_(&spec), mesh_(mesh), opts_(opts) {
    table_ = std::make_shared<const CoefficientTable>(build_coefficient_table(spec, mesh));
    if (opts_.richardson) {
      mesh_fine_ = build_mesh(spec, mesh.nx, 2 * mesh.nt);
      table_fine_ =
          std::make_shared<const CoefficientTable>(build_coefficient_table(spec, mesh_fine_));
    }
  }

  const Mesh& mesh() const { return mesh_; }
  const ScenarioSpec& scenario() const { return *spec_; }
  const CoefficientTable& table() const { return *table_; }
  const EigenOptions& options() const { return opts_; }

  MonodromyOperator make_operator(double lambda, double gamma) const {
    return MonodromyOperator(*spec_, mesh_, table_, {lambda, gamma}, {opts_.scheme, {}});
  }

  //! Principal eigenpair of P - lambda m + gamma a. The eigenfunction and
  //! residual come from the nt run; sigma is Richardson-extrapolated when
  //! enabled, with rho kept consistent (rho = exp(-sigma T)).
  EigenResult eval(double lambda, double gamma,
                   const std::vector<double>* warm = nullptr) const {
    MonodromyOperator op(*spec_, mesh_, table_, {lambda, gamma}, {opts_.scheme, {}});
    EigenResult coarse = principal_eigenpair(op, opts_.tol, opts_.max_iter, warm);
    if (!opts_.richardson) return coarse;
    MonodromyOperator op2(*spec_, mesh_fine_, table_fine_, {lambda, gamma}, {opts_.scheme, {}});
    std::vector<double> warm2 = eigenfunction_slice0(coarse, mesh_.nx);
    EigenResult fine = principal_eigenpair(op2, opts_.tol, opts_.max_iter, &warm2);
    EigenResult out = std::move(coarse);
    out.sigma = 2.0 * fine.sigma - out.sigma;
    out.rho = std::exp(-out.sigma * mesh_.T);
    out.iterations += fine.iterations;
    return out;
  }

 private:
  const ScenarioSpec* spec_;
  Mesh mesh_, mesh_fine_;
  std::shared_ptr<const CoefficientTable> table_, table_fine_;
  EigenOptions opts_;
};

inline EigenResult sigma_at(const ScenarioSpec& spec, const Mesh& mesh, double lambda,
                            double gamma, EigenOptions opts = {}) {
  return SigmaEvaluator(spec, mesh, opts).eval(lambda, gamma);
}

// ---------------------------------------------------------------------------
// Classification of Sigma(lambda, infinity)
// ---------------------------------------------------------------------------

struct ClassifyOptions {
  double slope_threshold = 0.5;    // per-doubling increment for "divergent"
  double plateau_rel = 0.01;       // last increment below plateau_rel*(1+|Sigma|) => finite
  int divergent_window = 3;        // increments that must all exceed the slope threshold
};

struct SigmaClassification {
  enum class Kind { Finite, Divergent, Inconclusive };
  Kind kind = Kind::Inconclusive;
  double plateau = std::numeric_limits<double>::quiet_NaN();  // Finite only
  double slope_per_doubling = std::numeric_limits<double>::quiet_NaN();  // Divergent only
  std::vector<double> gammas, sigmas;

  std::string kind_name() const {
    switch (kind) {
      case Kind::Finite: return "finite";
      case Kind::Divergent: return "divergent";
      default: return "inconclusive";
    }
  }
};

inline std::vector<double> default_gamma_ramp() {
  std::vector<double> g(21);
  for (int i = 0; i <= 20; ++i) g[i] = std::ldexp(1.0, i);  // 2^0 .. 2^20
  return g;
}

//! Classification decision from sampled ramp values: divergent when the last
//! increments Sigma(2g) - Sigma(g) all exceed the slope threshold, finite
//! when the last increment falls below the plateau threshold; inconclusive
//! otherwise (or when both fire).
inline SigmaClassification classify_values(std::vector<double> gammas,
                                           std::vector<double> sigmas,
                                           ClassifyOptions copt = {}) {
  SigmaClassification cls;
  cls.gammas = std::move(gammas);
  cls.sigmas = std::move(sigmas);
  const size_t n = cls.sigmas.size();
  if (n < static_cast<size_t>(copt.divergent_window) + 1) return cls;

  bool divergent = true;
  for (int k = 0; k < copt.divergent_window; ++k) {
    double inc = cls.sigmas[n - 1 - k] - cls.sigmas[n - 2 - k];
    if (!(inc > copt.slope_threshold)) divergent = false;
  }
  double last_inc = cls.sigmas[n - 1] - cls.sigmas[n - 2];
  bool finite = last_inc < copt.plateau_rel * (1.0 + std::fabs(cls.sigmas[n - 1]));

  if (divergent && !finite) {
    cls.kind = SigmaClassification::Kind::Divergent;
    cls.slope_per_doubling = last_inc;
  } else if (finite && !divergent) {
    cls.kind = SigmaClassification::Kind::Finite;
    cls.plateau = cls.sigmas[n - 1];
  }
  return cls;
}

//! Finite-gamma surrogate for the dichotomy of Sigma(lambda, infinity),
//! computed on a geometric ramp (ratio 2, default 2^0..2^20) with warm-started
//! continuation.
inline SigmaClassification classify_sigma_infinity(const SigmaEvaluator& ev, double lambda,
                                                   std::vector<double> ramp = {},
                                                   ClassifyOptions copt = {}) {
  std::vector<double> gammas = ramp.empty() ? default_gamma_ramp() : std::move(ramp);
  std::vector<double> sigmas;
  std::vector<double> warm;
  for (double g : gammas) {
    EigenResult r = ev.eval(lambda, g, warm.empty() ? nullptr : &warm);
    warm = eigenfunction_slice0(r, ev.mesh().nx);
    sigmas.push_back(r.sigma);
  }
  return classify_values(std::move(gammas), std::move(sigmas), copt);
}

// ---------------------------------------------------------------------------
// lambda_- and lambda_+ of Sigma(lambda, 0)
// ---------------------------------------------------------------------------

struct LambdaRoots {
  std::optional<double> lambda_minus, lambda_plus;
  double lambda_max_location = 0;  // scan-grid argmax of Sigma
  double sigma_max = 0;
  bool eq18_low = false, eq18_high = false;  // sign condition on the weight m
  std::vector<double> scan_lambdas, scan_sigmas;
  bool sign_pattern_ok = false;
};

//! Checks the integral sign condition on m: int_0^T min_x m dt < 0 < int_0^T max_x m dt.
inline std::pair<double, double> weight_sign_integrals(const ScenarioSpec& spec,
                                                       const Mesh& mesh) {
  double lo = 0, hi = 0;
  for (int j = 0; j < mesh.nt; ++j) {
    double t = mesh.times[j];
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    auto look = [&](double x) {
      double v = eval_field(spec, FieldId::WeightM, x, t);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    };
    look(mesh.x_lo);
    look(mesh.x_hi);
    for (double x : mesh.nodes) look(x);
    lo += mn * mesh.dt;
    hi += mx * mesh.dt;
  }
  return {lo, hi};
}

//! Scans Sigma(lambda, 0) on a coarse grid, brackets sign changes, and
//! bisects each to tolerance. Sigma is concave in lambda, so at most two
//! roots exist; the sign pattern over the scan grid is verified.
inline LambdaRoots find_lambda_pm(const SigmaEvaluator& ev, double scan_lo, double scan_hi,
                                  double tol = 1e-6, int scan_points = 41) {
  LambdaRoots roots;
  auto integrals = weight_sign_integrals(ev.scenario(), ev.mesh());
  roots.eq18_low = integrals.first < 0;
  roots.eq18_high = integrals.second > 0;

  std::vector<double> warm;
  for (int i = 0; i < scan_points; ++i) {
    double lam = scan_lo + (scan_hi - scan_lo) * i / (scan_points - 1);
    EigenResult r = ev.eval(lam, 0.0, warm.empty() ? nullptr : &warm);
    warm = eigenfunction_slice0(r, ev.mesh().nx);
    roots.scan_lambdas.push_back(lam);
    roots.scan_sigmas.push_back(r.sigma);
  }
  size_t imax = 0;
  for (size_t i = 1; i < roots.scan_sigmas.size(); ++i)
    if (roots.scan_sigmas[i] > roots.scan_sigmas[imax]) imax = i;
  roots.lambda_max_location = roots.scan_lambdas[imax];
  roots.sigma_max = roots.scan_sigmas[imax];

  auto bisect = [&](double a, double fa, double b) {
    while (b - a > tol * (1.0 + std::fabs(a) + std::fabs(b))) {
      double mid = 0.5 * (a + b);
      double fm = ev.eval(mid, 0.0).sigma;
      if ((fa < 0) == (fm < 0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);
  };

  std::vector<double> found;
  for (size_t i = 0; i + 1 < roots.scan_sigmas.size() && found.size() < 2; ++i) {
    double fa = roots.scan_sigmas[i], fb = roots.scan_sigmas[i + 1];
    if ((fa < 0) != (fb < 0))
      found.push_back(bisect(roots.scan_lambdas[i], fa, roots.scan_lambdas[i + 1]));
  }
  if (found.size() == 2) {
    roots.lambda_minus = found[0];
    roots.lambda_plus = found[1];
  } else if (found.size() == 1) {
    // rising crossing is lambda_-, falling crossing is lambda_+
    bool rising = roots.scan_sigmas.front() < 0;
    (rising ? roots.lambda_minus : roots.lambda_plus) = found[0];
  }

  // sign pattern of the scan: negative left of lambda_-, positive between
  // roots, negative right of lambda_+ (up to tolerance near the roots)
  roots.sign_pattern_ok = true;
  for (size_t i = 0; i < roots.scan_lambdas.size(); ++i) {
    double lam = roots.scan_lambdas[i], s = roots.scan_sigmas[i];
    bool inside = (!roots.lambda_minus || lam > *roots.lambda_minus + tol) &&
                  (!roots.lambda_plus || lam < *roots.lambda_plus - tol);
    bool outside = (roots.lambda_minus && lam < *roots.lambda_minus - tol) ||
                   (roots.lambda_plus && lam > *roots.lambda_plus + tol);
    if (roots.lambda_minus || roots.lambda_plus) {
      if (inside && s < -1e-9) roots.sign_pattern_ok = false;
      if (outside && s > 1e-9) roots.sign_pattern_ok = false;
    }
  }
  return roots;
}

// ---------------------------------------------------------------------------
// Concentration diagnostic (vanishing of phi_gamma away from the refuge)
// ---------------------------------------------------------------------------

struct ConcentrationProfile {
  std::vector<double> gammas;
  std::vector<double> sup_values;  // sup of phi_gamma over [a >= eps_a]
  double ratio_first_last = 0;
};

inline ConcentrationProfile concentration_profile(const SigmaEvaluator& ev, double lambda,
                                                  const std::vector<double>& gammas,
                                                  double eps_a) {
  const ScenarioSpec& spec = ev.scenario();
  const Mesh& mesh = ev.mesh();
  ValidationReport vr = validate_hypotheses(spec, mesh.nx, mesh.nt);
  if (!vr.eq19_boundary_positive)
    throw std::invalid_argument(
        "concentration_profile requires a > 0 on the boundary (Eq. sign condition)");
  SigmaClassification cls = classify_sigma_infinity(ev, lambda);
  if (cls.kind != SigmaClassification::Kind::Finite)
    throw std::invalid_argument("concentration_profile requires a Finite classification");

  ConcentrationProfile prof;
  prof.gammas = gammas;
  const CoefficientTable& tab = ev.table();
  std::vector<double> warm;
  for (double g : gammas) {
    EigenResult r = ev.eval(lambda, g, warm.empty() ? nullptr : &warm);
    warm = eigenfunction_slice0(r, mesh.nx);
    double sup = 0;
    for (int j = 0; j <= mesh.nt; ++j)
      for (int k = 0; k < mesh.nx; ++k)
        if (tab.at(tab.a, j, k) >= eps_a)
          sup = std::max(sup, r.phi_at(j, k, mesh.nx));
    prof.sup_values.push_back(sup);
  }
  prof.ratio_first_last =
      prof.sup_values.back() > 0
          ? prof.sup_values.front() / prof.sup_values.back()
          : std::numeric_limits<double>::infinity();
  return prof;
}

// ---------------------------------------------------------------------------
// Full (lambda, gamma) sweep with property checks
// ---------------------------------------------------------------------------

struct SigmaCurve {
  std::vector<double> lambdas, gammas;
  std::vector<double> values;  // lambdas.size() x gammas.size(), lambda-major
  std::vector<SigmaClassification> classifications;  // one per lambda
  double max_monotonicity_violation = 0;  // gamma-monotonicity, clamped at 0
  double max_concavity_violation = 0;     // lambda second differences, clamped at 0

  double value(size_t il, size_t ig) const { return values[il * gammas.size() + ig]; }
};

inline SigmaCurve compute_sigma_curve(const SigmaEvaluator& ev,
                                      const std::vector<double>& lambdas,
                                      const std::vector<double>& gammas,
                                      bool classify = true, ClassifyOptions copt = {},
                                      int threads = 1) {
  SigmaCurve curve;
  curve.lambdas = lambdas;
  curve.gammas = gammas;
  curve.values.resize(lambdas.size() * gammas.size());
  auto sweep_lambda = [&](size_t il) {
    std::vector<double> warm;
    for (size_t ig = 0; ig < gammas.size(); ++ig) {
      EigenResult r = ev.eval(lambdas[il], gammas[ig], warm.empty() ? nullptr : &warm);
      warm = eigenfunction_slice0(r, ev.mesh().nx);
      curve.values[il * gammas.size() + ig] = r.sigma;
    }
  };
  if (threads > 1 && lambdas.size() > 1) {
    // embarrassingly parallel over lambda; results land at fixed indices, so
    // the merged output is deterministic
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    int nw = std::min<int>(threads, static_cast<int>(lambdas.size()));
    for (int w = 0; w < nw; ++w)
      pool.emplace_back([&] {
        for (size_t il = next.fetch_add(1); il < lambdas.size(); il = next.fetch_add(1))
          sweep_lambda(il);
      });
    for (auto& th : pool) th.join();
  } else {
    for (size_t il = 0; il < lambdas.size(); ++il) sweep_lambda(il);
  }
  if (classify)
    for (size_t il = 0; il < lambdas.size(); ++il) {
      std::vector<double> row(curve.values.begin() + il * gammas.size(),
                              curve.values.begin() + (il + 1) * gammas.size());
      curve.classifications.push_back(classify_values(gammas, std::move(row), copt));
    }
  for (size_t il = 0; il < lambdas.size(); ++il)
    for (size_t ig = 0; ig + 1 < gammas.size(); ++ig) {
      double drop = curve.value(il, ig) - curve.value(il, ig + 1);
      curve.max_monotonicity_violation = std::max(curve.max_monotonicity_violation, drop);
    }
  for (size_t ig = 0; ig < gammas.size(); ++ig)
    for (size_t il = 1; il + 1 < lambdas.size(); ++il) {
      double second = curve.value(il + 1, ig) - 2.0 * curve.value(il, ig) + curve.value(il - 1, ig);
      curve.max_concavity_violation = std::max(curve.max_concavity_violation, second);
    }
  return curve;
}

}  // namespace pplog

#endif
