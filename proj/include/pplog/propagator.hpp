// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0
//! \file pplog/propagator.hpp
//! One-period linear flow of d_t u + (L + c + V) u = 0 and the period
//! (monodromy) map. Eigen computations run on a gauge-shifted potential:
//! kappa = min over the grid of the assembled potential is subtracted from
//! the operator and added back to sigma. The shift keeps every step matrix an
//! M-matrix under implicit Euler, keeps exponentials in range for very large
//! potentials, and makes constant-shift identities exact by construction.

#ifndef PPLOG_PROPAGATOR_HPP
#define PPLOG_PROPAGATOR_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pplog/operator.hpp"

namespace pplog {

enum class Scheme { ImplicitEuler, CrankNicolson };

//! Extra potential V = -lambda m + gamma a (+ optional explicit node table,
//! laid out (nt+1) x nx like CoefficientTable fields).
struct PotentialSpec {
  double lambda = 0.0;
  double gamma = 0.0;
  const std::vector<double>* explicit_v = nullptr;
};

struct MonodromyOptions {
  Scheme scheme = Scheme::ImplicitEuler;
  std::optional<double> kappa_override;  // pin the gauge shift; 0 disables it
};

//! Matrix-free action of the one-period solution map. Immutable after
//! construction; concurrent applications are safe.
class MonodromyOperator {
 public:
  MonodromyOperator(const ScenarioSpec& spec, const Mesh& mesh,
                    std::shared_ptr<const CoefficientTable> table, PotentialSpec pot,
                    MonodromyOptions opt = {})
      : spec_(&spec), mesh_(mesh), table_(std::move(table)), pot_(pot), opt_(opt) {
    const int nx = mesh_.nx, nt = mesh_.nt;
    // Assembled potential W = c + V at every level/node; kappa = grid minimum.
    w_.resize(static_cast<size_t>(nt + 1) * nx);
    double wmin = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= nt; ++j)
      for (int k = 0; k < nx; ++k) {
        size_t i = static_cast<size_t>(j) * nx + k;
        double w = table_->c[i] - pot_.lambda * table_->m[i] + pot_.gamma * table_->a[i];
        if (pot_.explicit_v) w += (*pot_.explicit_v)[i];
        w_[i] = w;
        wmin = std::min(wmin, w);
      }
    kappa_ = opt_.kappa_override.value_or(wmin);

    levels_.reserve(nt + 1);
    for (int j = 0; j <= nt; ++j) {
      std::span<const double> d(&table_->d[static_cast<size_t>(j) * nx], nx);
      std::span<const double> b(&table_->b[static_cast<size_t>(j) * nx], nx);
      std::span<const double> cv(&w_[static_cast<size_t>(j) * nx], nx);
      levels_.push_back(assemble_rows(d, b, cv, mesh_.h, spec.bc_lo, spec.bc_hi));
      upwind_rows_ = std::max(upwind_rows_, levels_.back().upwind_rows);
    }

    const double dt = mesh_.dt;
    shifted_.resize(nt + 1);
    plain_.resize(nt + 1);
    m_matrix_steps_ = true;
    for (int j = 1; j <= nt; ++j) {
      BandedOperator as = levels_[j];
      as.shift_diagonal(-kappa_);
      double step_beta = (opt_.scheme == Scheme::ImplicitEuler) ? dt : dt / 2;
      try {
        shifted_[j].factor(as, 1.0, step_beta);
        plain_[j].factor(levels_[j], 1.0, step_beta);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at t = " +
                             format_double(mesh_.times[j]));
      }
      bool z_ok = true;
      for (int k = 0; k < nx; ++k)
        if (as.lower[k] > 0 || as.upper[k] > 0) z_ok = false;
      if (!z_ok || 1.0 + step_beta * as.min_row_sum <= 0) m_matrix_steps_ = false;
    }
    if (opt_.scheme == Scheme::CrankNicolson) m_matrix_steps_ = false;
  }

  const Mesh& mesh() const { return mesh_; }
  const ScenarioSpec& scenario() const { return *spec_; }
  const CoefficientTable& table() const { return *table_; }
  const PotentialSpec& potential() const { return pot_; }
  Scheme scheme() const { return opt_.scheme; }
  double kappa() const { return kappa_; }
  bool m_matrix_steps() const { return m_matrix_steps_; }
  int upwind_rows() const { return upwind_rows_; }
  double potential_at(int level, int node) const {
    return w_[static_cast<size_t>(level) * mesh_.nx + node];
  }
  //! Assembled L_h + c + V at time level j (unshifted).
  const BandedOperator& level_operator(int j) const { return levels_[j]; }

  //! One time step of the plain (unshifted) flow from level j to j+1.
  void step_plain(int j_next, std::vector<double>& v) const { step_impl(j_next, v, false); }

  //! One time step of the kappa-shifted flow from level j to j+1.
  void step_shifted(int j_next, std::vector<double>& v) const { step_impl(j_next, v, true); }

  //! v(T) of the plain discrete flow with v(0) = v0. May over/underflow for
  //! extreme potentials; eigen computations use apply_scaled instead.
  std::vector<double> apply(std::span<const double> v0) const {
    std::vector<double> v(v0.begin(), v0.end());
    for (int j = 1; j <= mesh_.nt; ++j) step_plain(j, v);
    return v;
  }

  //! One period of the shifted flow with per-step sup renormalization.
  //! On return the state has unit sup norm and
  //!   M_shifted(v_in) = e^{log_factor} * v_out.
  std::vector<double> apply_scaled(std::vector<double> v, double& log_factor) const {
    log_factor = 0.0;
    normalize(v, log_factor);
    for (int j = 1; j <= mesh_.nt; ++j) {
      step_shifted(j, v);
      normalize(v, log_factor);
    }
    return v;
  }

 private:
  void step_impl(int j_next, std::vector<double>& v, bool shifted) const {
    if (opt_.scheme == Scheme::CrankNicolson) {
      // (I + dt/2 A(t_{j+1})) u_new = (I - dt/2 A(t_j)) u_old
      const BandedOperator& aprev = levels_[j_next - 1];
      const double half = mesh_.dt / 2;
      std::vector<double> rhs(v.size());
      double shift = shifted ? kappa_ : 0.0;
      auto y = aprev.apply(v);
      for (size_t i = 0; i < v.size(); ++i) rhs[i] = v[i] - half * (y[i] - shift * v[i]);
      v = std::move(rhs);
    }
    (shifted ? shifted_[j_next] : plain_[j_next]).solve_inplace(v);
  }

  static void normalize(std::vector<double>& v, double& log_factor) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::fabs(x));
    if (!(s > 0.0)) throw NumericalError("flow annihilated the state");
    if (!std::isfinite(s)) throw NumericalError("flow produced non-finite state");
    for (double& x : v) x /= s;
    log_factor += std::log(s);
  }

  const ScenarioSpec* spec_;
  Mesh mesh_;
  std::shared_ptr<const CoefficientTable> table_;
  PotentialSpec pot_;
  MonodromyOptions opt_;
  std::vector<double> w_;
  std::vector<BandedOperator> levels_;
  std::vector<TriFactor> shifted_, plain_;
  double kappa_ = 0.0;
  bool m_matrix_steps_ = false;
  int upwind_rows_ = 0;
};

//! Convenience builder: samples coefficients and constructs the period map.
inline MonodromyOperator make_monodromy(const ScenarioSpec& spec, const Mesh& mesh,
                                        PotentialSpec pot = {}, MonodromyOptions opt = {}) {
  auto table = std::make_shared<CoefficientTable>(build_coefficient_table(spec, mesh));
  return MonodromyOperator(spec, mesh, std::move(table), pot, opt);
}

//! Single implicit step as a free operation (dt must equal mesh.dt; the step
//! advances level j -> j+1 of the plain flow).
inline std::vector<double> step(const MonodromyOperator& op, std::span<const double> state,
                                int level_next) {
  std::vector<double> v(state.begin(), state.end());
  op.step_plain(level_next, v);
  return v;
}

// ---------------------------------------------------------------------------
// Periodic linear solve: P u + V u = h with u(0) = u(T).
// ---------------------------------------------------------------------------

struct PeriodicLinearSolution {
  std::vector<double> u;  // (nt+1) x nx trajectory
  double residual = 0;    // ||u(.,T) - u(.,0)||_inf
  double min_interior = 0;
  int iterations = 0;
  bool converged = false;

  double at(int j, int k, int nx) const { return u[static_cast<size_t>(j) * nx + k]; }
};

//! Solves the T-periodic problem by computing the affine period map
//! u(T) = M u(0) + g with one inhomogeneous sweep, then solving
//! (I - M) u(0) = g: densely for nx <= 64, by fixed-point iteration on the
//! matrix-free action otherwise (the caller guarantees sigma > 0, so the
//! period map is a contraction).
inline PeriodicLinearSolution periodic_solve(const MonodromyOperator& op,
                                             const std::function<double(double, double)>& h,
                                             double tol = 1e-11, int max_iter = 20000) {
  const Mesh& mesh = op.mesh();
  const int nx = mesh.nx, nt = mesh.nt;

  // sample the source at every level
  std::vector<std::vector<double>> src(nt + 1, std::vector<double>(nx));
  for (int j = 0; j <= nt; ++j)
    for (int k = 0; k < nx; ++k) src[j][k] = h(mesh.nodes[k], mesh.times[j]);

  auto sweep = [&](std::vector<double> v) {
    // one period of the plain flow with backward-Euler source terms
    for (int j = 1; j <= nt; ++j) {
      for (int k = 0; k < nx; ++k) v[k] += mesh.dt * src[j][k];
      op.step_plain(j, v);
    }
    return v;
  };

  std::vector<double> zero(nx, 0.0);
  std::vector<double> g = sweep(zero);

  PeriodicLinearSolution sol;
  std::vector<double> u0(nx, 0.0);
  if (nx <= 64) {
    Eigen::MatrixXd M(nx, nx);
    for (int k = 0; k < nx; ++k) {
      std::vector<double> e(nx, 0.0);
      e[k] = 1.0;
      auto col = op.apply(e);
      for (int i = 0; i < nx; ++i) M(i, k) = col[i];
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(nx, nx) - M;
    Eigen::VectorXd gv(nx);
    for (int i = 0; i < nx; ++i) gv(i) = g[i];
    Eigen::VectorXd x = A.partialPivLu().solve(gv);
    double resid = (A * x - gv).norm();
    if (!(resid <= 1e-8 * (gv.norm() + 1.0)))
      throw NumericalError("periodic solve: sigma near zero, (I - M) numerically singular");
    for (int i = 0; i < nx; ++i) u0[i] = x(i);
    sol.converged = true;
    sol.iterations = 1;
  } else {
    double err = std::numeric_limits<double>::infinity();
    int it = 0;
    double scale = 1.0;
    while (it < max_iter) {
      ++it;
      std::vector<double> next = sweep(u0);
      err = 0.0;
      scale = 1.0;
      for (int k = 0; k < nx; ++k) {
        err = std::max(err, std::fabs(next[k] - u0[k]));
        scale = std::max(scale, std::fabs(next[k]));
      }
      u0 = std::move(next);
      if (err <= tol * scale) break;
      if (!std::isfinite(err) || scale > 1e120)
        throw NumericalError("periodic solve diverged: sigma is not positive");
    }
    sol.converged = err <= tol * scale;
    sol.iterations = it;
    if (!sol.converged)
      throw NumericalError("periodic solve: sigma near zero, fixed point did not converge");
  }

  // reconstruct the trajectory
  sol.u.resize(static_cast<size_t>(nt + 1) * nx);
  std::vector<double> v = u0;
  for (int k = 0; k < nx; ++k) sol.u[k] = v[k];
  for (int j = 1; j <= nt; ++j) {
    for (int k = 0; k < nx; ++k) v[k] += mesh.dt * src[j][k];
    op.step_plain(j, v);
    for (int k = 0; k < nx; ++k) sol.u[static_cast<size_t>(j) * nx + k] = v[k];
  }
  sol.residual = 0.0;
  for (int k = 0; k < nx; ++k)
    sol.residual = std::max(sol.residual, std::fabs(sol.u[static_cast<size_t>(nt) * nx + k] - sol.u[k]));
  sol.min_interior = std::numeric_limits<double>::infinity();
  for (double x : sol.u) sol.min_interior = std::min(sol.min_interior, x);
  return sol;
}

}  // namespace pplog

#endif
