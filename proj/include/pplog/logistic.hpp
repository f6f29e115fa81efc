// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0
//! \file pplog/logistic.hpp
//! Positive T-periodic solutions of the weighted logistic problem
//! d_t u + L u = lambda m u - a f(u) u: semi-implicit period marching with a
//! node-wise monotone reaction solve, sub/supersolution construction, the
//! existence verdict, and the uniqueness probe.

#ifndef PPLOG_LOGISTIC_HPP
#define PPLOG_LOGISTIC_HPP

#include <cmath>
#include <deque>
#include <vector>

#include "pplog/perturb.hpp"
#include "pplog/sigma.hpp"

namespace pplog {

struct LogisticOptions {
  double tol = 1e-8;           // period residual tolerance
  int max_periods = 2000;
  double growth_bound = 1e6;   // unbounded-growth detector
  int stagnation_periods = 200;
  EigenOptions eigen;          // used for the eigenpairs feeding sub/supersolutions
};

struct PeriodicSolution {
  enum class Outcome { ConvergedPositive, ConvergedZero, GrewUnbounded, Stagnated, Unresolved };

  std::vector<double> u;  // (nt+1) x nx samples of the final period
  double residual = 0;    // ||u(.,T) - u(.,0)||_inf of the final period
  double min_interior = 0;
  double sup_final = 0;
  std::vector<double> normal_deriv_lo, normal_deriv_hi;  // per level (Dirichlet ends)
  int periods = 0;
  bool converged = false;
  Outcome outcome = Outcome::Unresolved;

  double at(int j, int k, int nx) const { return u[static_cast<size_t>(j) * nx + k]; }
};

namespace detail {

//! Solves w (1 - ql) + qa f(w) w = r for the unique nonnegative root
//! (qa, r >= 0, ql < 1): the left side is strictly increasing in w, so a
//! bracketed Newton iteration converges unconditionally.
inline double reaction_solve(double qa, double ql, double r, const NonlinearitySpec& f) {
  if (ql >= 0.9)
    throw NumericalError("reaction solve: dt lambda max(m) too large, refine the time step");
  if (!(r > 0.0)) return r / (1.0 - ql);
  if (qa == 0.0) return r / (1.0 - ql);
  double lo = 0.0, hi = r / (1.0 - ql), w = std::min(r, hi);
  while (hi * (1.0 - ql) + qa * f(hi) * hi < r) hi *= 2;
  for (int it = 0; it < 60; ++it) {
    double fw = f(w);
    double g = w * (1.0 - ql) + qa * fw * w - r;
    if (g > 0) hi = w;
    else lo = w;
    // derivative via a local secant on f (works for the power law and
    // tabulated monotone f alike)
    double dw = 1e-8 * (w + 1e-8);
    double fp = (f(w + dw) - fw) / dw;
    double deriv = (1.0 - ql) + qa * (fw + fp * w);
    double next = w - g / deriv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - w) <= 1e-15 * (1.0 + w)) return next;
    w = next;
  }
  return w;
}

}  // namespace detail

//! One period of the semi-implicit marching map: implicit linear steps for
//! d_t + L (diffusion, drift, c), then a node-wise implicit solve of
//! w + dt (a f(w) - lambda m) w = rhs at the new time level. Keeping the
//! lambda m term in the node-wise solve makes spatially constant equilibria
//! exact. Order-preserving: the linear step is an M-matrix solve and the
//! reaction root is increasing in its right-hand side.
inline void march_one_period(const MonodromyOperator& op, double lambda, double dt,
                             const NonlinearitySpec& f, std::vector<double>& u,
                             std::vector<double>* store = nullptr) {
  const Mesh& mesh = op.mesh();
  const CoefficientTable& tab = op.table();
  if (store) std::copy(u.begin(), u.end(), store->begin());
  for (int j = 1; j <= mesh.nt; ++j) {
    op.step_plain(j, u);
    for (int k = 0; k < mesh.nx; ++k)
      u[k] = detail::reaction_solve(dt * tab.at(tab.a, j, k),
                                    dt * lambda * tab.at(tab.m, j, k), u[k], f);
    if (store)
      std::copy(u.begin(), u.end(), store->begin() + static_cast<size_t>(j) * mesh.nx);
  }
}

inline PeriodicSolution solve_periodic_logistic(const ScenarioSpec& spec, const Mesh& mesh,
                                                double lambda, std::vector<double> u0,
                                                LogisticOptions opts = {}) {
  for (double v : u0)
    if (v < 0) throw std::invalid_argument("solve_periodic_logistic: u0 must be nonnegative");
  MonodromyOperator op(spec, mesh,
                       std::make_shared<const CoefficientTable>(build_coefficient_table(spec, mesh)),
                       {0.0, 0.0}, {Scheme::ImplicitEuler, 0.0});

  PeriodicSolution sol;
  std::vector<double> u = std::move(u0);
  std::deque<double> history;
  double residual = std::numeric_limits<double>::infinity();
  int period = 0;
  while (period < opts.max_periods) {
    ++period;
    std::vector<double> prev = u;
    march_one_period(op, lambda, mesh.dt, spec.nonlinearity, u);
    residual = 0;
    double sup = 0;
    for (int k = 0; k < mesh.nx; ++k) {
      residual = std::max(residual, std::fabs(u[k] - prev[k]));
      sup = std::max(sup, std::fabs(u[k]));
    }
    if (sup > opts.growth_bound || !std::isfinite(sup)) {
      sol.outcome = PeriodicSolution::Outcome::GrewUnbounded;
      break;
    }
    if (residual <= opts.tol) {
      sol.converged = true;
      break;
    }
    history.push_back(residual);
    if (static_cast<int>(history.size()) > opts.stagnation_periods) {
      double old = history.front();
      history.pop_front();
      if (residual >= 0.995 * old) {
        sol.outcome = PeriodicSolution::Outcome::Stagnated;
        break;
      }
    }
  }
  sol.periods = period;

  // final-period trajectory and diagnostics
  sol.u.resize(static_cast<size_t>(mesh.nt + 1) * mesh.nx);
  march_one_period(op, lambda, mesh.dt, spec.nonlinearity, u, &sol.u);
  sol.residual = 0;
  sol.sup_final = 0;
  sol.min_interior = std::numeric_limits<double>::infinity();
  for (double v : sol.u) {
    sol.sup_final = std::max(sol.sup_final, std::fabs(v));
    sol.min_interior = std::min(sol.min_interior, v);
  }
  for (int k = 0; k < mesh.nx; ++k)
    sol.residual = std::max(
        sol.residual, std::fabs(sol.u[static_cast<size_t>(mesh.nt) * mesh.nx + k] - sol.u[k]));
  sol.normal_deriv_lo.resize(mesh.nt + 1);
  sol.normal_deriv_hi.resize(mesh.nt + 1);
  for (int j = 0; j <= mesh.nt; ++j) {
    double u1 = sol.at(j, 0, mesh.nx), u2 = sol.at(j, 1, mesh.nx);
    double un = sol.at(j, mesh.nx - 1, mesh.nx), un1 = sol.at(j, mesh.nx - 2, mesh.nx);
    sol.normal_deriv_lo[j] = -(4 * u1 - u2) / (2 * mesh.h);
    sol.normal_deriv_hi[j] = (un1 - 4 * un) / (2 * mesh.h);
  }
  if (sol.outcome == PeriodicSolution::Outcome::Unresolved && sol.converged)
    sol.outcome = sol.sup_final <= 1e-6 ? PeriodicSolution::Outcome::ConvergedZero
                                        : PeriodicSolution::Outcome::ConvergedPositive;
  return sol;
}

// ---------------------------------------------------------------------------
// Sub/supersolution pair
// ---------------------------------------------------------------------------

namespace detail {

//! Discrete residual of the logistic operator on a trajectory field:
//! (u_{j+1}-u_j)/dt + (L_h + c - lambda m) u_{j+1} + a f(u_{j+1}) u_{j+1},
//! evaluated at level pairs j -> j+1 and interior node k.
inline double logistic_residual(const MonodromyOperator& op, const NonlinearitySpec& f,
                                const std::vector<double>& field, int j, int k) {
  const Mesh& mesh = op.mesh();
  const CoefficientTable& tab = op.table();
  const int nx = mesh.nx;
  const BandedOperator& a_op = op.level_operator(j + 1);
  size_t base = static_cast<size_t>(j + 1) * nx;
  double au = a_op.diag[k] * field[base + k];
  if (k > 0) au += a_op.lower[k] * field[base + k - 1];
  if (k + 1 < nx) au += a_op.upper[k] * field[base + k + 1];
  double ujk = field[static_cast<size_t>(j) * nx + k];
  double u1 = field[base + k];
  return (u1 - ujk) / mesh.dt + au + tab.at(tab.a, j + 1, k) * f(u1) * u1;
}

}  // namespace detail

struct Subsolution {
  double eps = 0;
  double sigma0 = 0;
  std::vector<double> field;  // eps * phi, (nt+1) x nx
  double max_residual = 0;    // strict subsolution: < 0
};

//! eps phi with the largest dyadic eps <= 1 satisfying
//! f(eps) < -Sigma(lambda,0)/max a, taken with a 3/4 safety factor so the
//! discrete inequality keeps a margin proportional to |Sigma|; the strict
//! subsolution inequality is then verified node-wise.
inline Subsolution construct_subsolution(const ScenarioSpec& spec, const Mesh& mesh,
                                         double lambda, EigenOptions opts = {}) {
  SigmaEvaluator ev(spec, mesh, opts);
  EigenResult r = ev.eval(lambda, 0.0);
  if (!(r.sigma < 0))
    throw std::invalid_argument("construct_subsolution requires Sigma(lambda,0) < 0");
  const CoefficientTable& tab = ev.table();
  double max_a = 0;
  for (double v : tab.a) max_a = std::max(max_a, v);
  for (int j = 0; j <= mesh.nt; ++j)
    max_a = std::max({max_a, tab.a_lo[j], tab.a_hi[j]});
  double bound = -r.sigma / max_a;

  Subsolution sub;
  sub.sigma0 = r.sigma;
  sub.eps = 1.0;
  while (!(spec.nonlinearity(sub.eps) < 0.75 * bound)) {
    sub.eps /= 2;
    if (sub.eps < 1e-18)
      throw NumericalError("construct_subsolution: no admissible dyadic epsilon");
  }
  sub.field.resize(r.phi.size());
  for (size_t i = 0; i < r.phi.size(); ++i) sub.field[i] = sub.eps * r.phi[i];

  MonodromyOperator op(spec, mesh,
                       std::make_shared<const CoefficientTable>(build_coefficient_table(spec, mesh)),
                       {lambda, 0.0}, {Scheme::ImplicitEuler, 0.0});
  sub.max_residual = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < mesh.nt; ++j)
    for (int k = 0; k < mesh.nx; ++k)
      sub.max_residual = std::max(
          sub.max_residual, detail::logistic_residual(op, spec.nonlinearity, sub.field, j, k));
  if (!(sub.max_residual < 0))
    throw NumericalError("construct_subsolution: discrete inequality failed (max residual " +
                         format_double(sub.max_residual) + ")");
  return sub;
}

struct Supersolution {
  double kappa = 0;          // multiplier on the dilated eigenfunction
  double sigma_gamma = 0;    // Sigma_n(lambda, gamma) > 0
  double mu = 0;             // min of psi_n over the closed original cylinder
  int n_used = 0;            // dilation index (0 when computed on Omega itself)
  std::vector<double> field; // kappa psi at base-mesh nodes, (nt+1) x nx
  double min_residual = 0;   // strict supersolution: > 0
};

namespace detail {

//! Cubic Lagrange interpolation of a sampled field at x (uniform nodes).
inline double interp_cubic(const Mesh& m, const std::vector<double>& slice, double x) {
  int n = m.nx;
  double pos = (x - m.nodes[0]) / m.h;
  int i = static_cast<int>(std::floor(pos));
  i = std::max(1, std::min(n - 3, i));
  double s = pos - i;
  double w0 = -s * (s - 1) * (s - 2) / 6.0;
  double w1 = (s + 1) * (s - 1) * (s - 2) / 2.0;
  double w2 = -(s + 1) * s * (s - 2) / 2.0;
  double w3 = (s + 1) * s * (s - 1) / 6.0;
  return w0 * slice[i - 1] + w1 * slice[i] + w2 * slice[i + 1] + w3 * slice[i + 2];
}

}  // namespace detail

//! kappa psi_n from the dilated eigenproblem at (lambda, gamma): psi_n is the
//! principal eigenfunction on the enlarged interval, strictly positive on the
//! closed original cylinder; kappa doubles from 1 until f(kappa mu) > gamma
//! and the discrete strict supersolution inequality holds node-wise (checked
//! on the dilated mesh restricted to the original domain).
inline Supersolution construct_supersolution(const ScenarioSpec& spec, const Mesh& mesh,
                                             double lambda, double gamma, int n,
                                             EigenOptions opts = {}) {
  bool any_dirichlet = spec.bc_lo.kind == BcKind::Dirichlet ||
                       spec.bc_hi.kind == BcKind::Dirichlet;
  ScenarioSpec work = spec;
  Mesh mwork = mesh;
  Supersolution sup;
  if (any_dirichlet) {
    DilatedScenario d = dilated_scenario(spec, n);
    work = d.spec;
    mwork = matched_mesh(mesh, work);
    sup.n_used = n;
  }
  SigmaEvaluator ev(work, mwork, opts);
  EigenResult r = ev.eval(lambda, gamma);
  if (!(r.sigma > 0))
    throw NumericalError("construct_supersolution: Sigma_n(lambda,gamma) <= 0, increase gamma");
  sup.sigma_gamma = r.sigma;

  // minimum of psi over the closed original cylinder
  sup.mu = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= mwork.nt; ++j) {
    const double* slice = &r.phi[static_cast<size_t>(j) * mwork.nx];
    std::vector<double> sv(slice, slice + mwork.nx);
    for (int k = 0; k < mwork.nx; ++k)
      if (mwork.nodes[k] >= spec.x_lo && mwork.nodes[k] <= spec.x_hi)
        sup.mu = std::min(sup.mu, sv[k]);
    if (any_dirichlet) {
      sup.mu = std::min(sup.mu, detail::interp_cubic(mwork, sv, spec.x_lo));
      sup.mu = std::min(sup.mu, detail::interp_cubic(mwork, sv, spec.x_hi));
    } else {
      auto [blo, bhi] = reconstruct_boundary(work, mwork, sv);
      sup.mu = std::min({sup.mu, blo, bhi});
    }
  }
  if (!(sup.mu > 0))
    throw NumericalError("construct_supersolution: dilated eigenfunction not positive on "
                         "the closed original cylinder");

  MonodromyOperator op(work, mwork,
                       std::make_shared<const CoefficientTable>(build_coefficient_table(work, mwork)),
                       {lambda, 0.0}, {Scheme::ImplicitEuler, 0.0});
  // nodes of the dilated mesh strictly inside the original domain
  std::vector<int> inside;
  for (int k = 1; k + 1 < mwork.nx; ++k)
    if (mwork.nodes[k] > spec.x_lo && mwork.nodes[k] < spec.x_hi) inside.push_back(k);

  sup.kappa = 1.0;
  std::vector<double> trial(r.phi.size());
  for (int attempt = 0; attempt < 80; ++attempt) {
    sup.min_residual = std::numeric_limits<double>::infinity();
    bool mass_ok = spec.nonlinearity(sup.kappa * sup.mu) > gamma;
    if (mass_ok) {
      for (size_t i = 0; i < r.phi.size(); ++i) trial[i] = sup.kappa * r.phi[i];
      for (int j = 0; j < mwork.nt && sup.min_residual > 0; ++j)
        for (int k : inside)
          sup.min_residual = std::min(
              sup.min_residual, detail::logistic_residual(op, work.nonlinearity, trial, j, k));
      if (sup.min_residual > 0) break;
    }
    sup.kappa *= 2;
    if (sup.kappa > 1e24)
      throw NumericalError("construct_supersolution: no admissible kappa");
  }

  // restrict to the base mesh (cubic interpolation per time level)
  sup.field.resize(static_cast<size_t>(mesh.nt + 1) * mesh.nx);
  for (int j = 0; j <= mesh.nt; ++j) {
    const double* slice = &r.phi[static_cast<size_t>(j) * mwork.nx];
    std::vector<double> sv(slice, slice + mwork.nx);
    for (int k = 0; k < mesh.nx; ++k)
      sup.field[static_cast<size_t>(j) * mesh.nx + k] =
          sup.kappa * detail::interp_cubic(mwork, sv, mesh.nodes[k]);
  }
  return sup;
}

// ---------------------------------------------------------------------------
// Existence verdict and uniqueness probe
// ---------------------------------------------------------------------------

struct ExistenceVerdict {
  enum class Predicted { Exists, NotExists, Inconclusive };
  enum class Observed { Exists, NotExists, NotExistsBounded, Inconclusive };

  double sigma_zero = 0;
  bool positive_weight_shortcut = false;  // min a > 0 on the closed grid
  SigmaClassification classification;     // populated unless the shortcut fired
  Predicted predicted = Predicted::Inconclusive;
  Observed observed = Observed::Inconclusive;
  bool agree = false;
  bool sub_run_done = false;
  PeriodicSolution run_sub, run_one;

  static const char* name(Predicted p) {
    switch (p) {
      case Predicted::Exists: return "exists";
      case Predicted::NotExists: return "not-exists";
      default: return "inconclusive";
    }
  }
  static const char* name(Observed o) {
    switch (o) {
      case Observed::Exists: return "exists";
      case Observed::NotExists: return "not-exists";
      case Observed::NotExistsBounded: return "not-exists-bounded";
      default: return "inconclusive";
    }
  }
};

//! Theorem-level prediction from Sigma(lambda,0) and the Sigma(lambda,inf)
//! surrogate, compared against the marching solver started from the
//! subsolution and from u == 1.
inline ExistenceVerdict existence_verdict(const ScenarioSpec& spec, const Mesh& mesh,
                                          double lambda, LogisticOptions opts = {},
                                          double tol_verdict = 0.01) {
  ExistenceVerdict v;
  SigmaEvaluator ev(spec, mesh, opts.eigen);
  v.sigma_zero = ev.eval(lambda, 0.0).sigma;

  const CoefficientTable& tab = ev.table();
  double min_a = std::numeric_limits<double>::infinity();
  for (double a : tab.a) min_a = std::min(min_a, a);
  for (int j = 0; j <= mesh.nt; ++j) min_a = std::min({min_a, tab.a_lo[j], tab.a_hi[j]});
  v.positive_weight_shortcut = min_a > 0;

  bool upper_positive = false, upper_negative = false, upper_known = false;
  if (v.positive_weight_shortcut) {
    upper_positive = upper_known = true;  // Sigma(lambda, inf) = +inf
  } else {
    v.classification = classify_sigma_infinity(ev, lambda);
    if (v.classification.kind == SigmaClassification::Kind::Divergent) {
      upper_positive = upper_known = true;
    } else if (v.classification.kind == SigmaClassification::Kind::Finite) {
      upper_known = true;
      upper_positive = v.classification.plateau > tol_verdict;
      upper_negative = v.classification.plateau < -tol_verdict;
      if (!upper_positive && !upper_negative) upper_known = false;
    }
  }

  if (v.sigma_zero > tol_verdict) {
    v.predicted = ExistenceVerdict::Predicted::NotExists;
  } else if (v.sigma_zero >= -tol_verdict || !upper_known) {
    v.predicted = ExistenceVerdict::Predicted::Inconclusive;
  } else {
    v.predicted = upper_positive ? ExistenceVerdict::Predicted::Exists
                                 : ExistenceVerdict::Predicted::NotExists;
  }

  // observed behavior
  std::vector<double> ones(mesh.nx, 1.0);
  v.run_one = solve_periodic_logistic(spec, mesh, lambda, ones, opts);
  PeriodicSolution::Outcome agg = v.run_one.outcome;
  if (v.sigma_zero < -tol_verdict) {
    Subsolution sub = construct_subsolution(spec, mesh, lambda, opts.eigen);
    std::vector<double> u0(sub.field.begin(), sub.field.begin() + mesh.nx);
    v.run_sub = solve_periodic_logistic(spec, mesh, lambda, u0, opts);
    v.sub_run_done = true;
    using O = PeriodicSolution::Outcome;
    if (v.run_sub.outcome != v.run_one.outcome &&
        v.run_sub.outcome != O::ConvergedPositive)
      agg = O::Unresolved;  // disagreeing runs
    if (v.run_sub.outcome == O::GrewUnbounded || v.run_sub.outcome == O::Stagnated)
      agg = v.run_sub.outcome;
  }
  switch (agg) {
    case PeriodicSolution::Outcome::ConvergedPositive:
      v.observed = ExistenceVerdict::Observed::Exists;
      break;
    case PeriodicSolution::Outcome::ConvergedZero:
      v.observed = ExistenceVerdict::Observed::NotExists;
      break;
    case PeriodicSolution::Outcome::GrewUnbounded:
    case PeriodicSolution::Outcome::Stagnated:
      v.observed = ExistenceVerdict::Observed::NotExistsBounded;
      break;
    default:
      v.observed = ExistenceVerdict::Observed::Inconclusive;
  }

  v.agree = (v.predicted == ExistenceVerdict::Predicted::Exists &&
             v.observed == ExistenceVerdict::Observed::Exists) ||
            (v.predicted == ExistenceVerdict::Predicted::NotExists &&
             (v.observed == ExistenceVerdict::Observed::NotExists ||
              v.observed == ExistenceVerdict::Observed::NotExistsBounded));
  return v;
}

struct UniquenessReport {
  bool conclusive = false;
  double max_pairwise = 0;   // sup distance between converged states
  bool sandwich_ok = false;  // eps phi <= u <= kappa psi node-wise
  double eps = 0, kappa = 0;
  int runs = 0;
};

//! Runs the solver from four initial data and asserts all converged periodic
//! states agree; also verifies the sub/supersolution sandwich around the
//! converged solution.
inline UniquenessReport uniqueness_probe(const ScenarioSpec& spec, const Mesh& mesh,
                                         double lambda, double gamma_super, int n_super,
                                         LogisticOptions opts = {}) {
  UniquenessReport rep;
  Subsolution sub = construct_subsolution(spec, mesh, lambda, opts.eigen);
  Supersolution sup =
      construct_supersolution(spec, mesh, lambda, gamma_super, n_super, opts.eigen);
  rep.eps = sub.eps;
  rep.kappa = sup.kappa;

  std::vector<std::vector<double>> starts;
  starts.push_back(std::vector<double>(mesh.nx, 0.01));
  PeriodicSolution first = solve_periodic_logistic(spec, mesh, lambda, starts[0], opts);
  if (first.outcome != PeriodicSolution::Outcome::ConvergedPositive) return rep;
  double scale = first.sup_final;
  starts.push_back(std::vector<double>(mesh.nx, scale));
  starts.push_back(std::vector<double>(mesh.nx, 10 * scale));
  starts.push_back(std::vector<double>(sub.field.begin(), sub.field.begin() + mesh.nx));

  std::vector<PeriodicSolution> sols{first};
  for (size_t i = 1; i < starts.size(); ++i) {
    PeriodicSolution s = solve_periodic_logistic(spec, mesh, lambda, starts[i], opts);
    if (s.outcome != PeriodicSolution::Outcome::ConvergedPositive) return rep;
    sols.push_back(std::move(s));
  }
  rep.runs = static_cast<int>(sols.size());
  for (size_t i = 0; i < sols.size(); ++i)
    for (size_t j = i + 1; j < sols.size(); ++j) {
      double d = 0;
      for (size_t q = 0; q < sols[i].u.size(); ++q)
        d = std::max(d, std::fabs(sols[i].u[q] - sols[j].u[q]));
      rep.max_pairwise = std::max(rep.max_pairwise, d);
    }
  rep.conclusive = true;

  rep.sandwich_ok = true;
  for (size_t q = 0; q < first.u.size(); ++q) {
    if (first.u[q] < sub.field[q] - 1e-12) rep.sandwich_ok = false;
    if (first.u[q] > sup.field[q] + 1e-12) rep.sandwich_ok = false;
  }
  return rep;
}

}  // namespace pplog

#endif
