// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0
//! \file pplog/operator.hpp
//! Time-sliced discrete operator L_h(t) + V_h(t) as a tridiagonal matrix on
//! interior nodes, with Dirichlet elimination or second-order Robin folding,
//! and a Thomas factorization for the implicit steps.

#ifndef PPLOG_OPERATOR_HPP
#define PPLOG_OPERATOR_HPP

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "pplog/mesh.hpp"

namespace pplog {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! Tridiagonal operator row k:
//!   -d (u_{k+1} - 2 u_k + u_{k-1})/h^2 + b (u_{k+1} - u_{k-1})/(2h) + (c+V) u_k
//! with first-order upwinding in rows whose cell Peclet number |b| h / (2d)
//! reaches 1. Boundary unknowns are eliminated (Dirichlet) or folded via the
//! one-sided second-order boundary stencil (Robin).
struct BandedOperator {
  int n = 0;
  std::vector<double> lower, diag, upper;  // lower[0], upper[n-1] unused
  int upwind_rows = 0;
  double min_row_sum = 0;  // min over rows of lower+diag+upper

  std::vector<double> apply(std::span<const double> v) const {
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
      double s = diag[i] * v[i];
      if (i > 0) s += lower[i] * v[i - 1];
      if (i + 1 < n) s += upper[i] * v[i + 1];
      y[i] = s;
    }
    return y;
  }

  //! Adds a constant shift to the whole diagonal.
  void shift_diagonal(double s) {
    for (auto& x : diag) x += s;
    min_row_sum += s;
  }
};

namespace detail {

//! Robin fold factor: the boundary value satisfies
//! u_b = (4 u_inner1 - u_inner2) / (3 + 2 h beta), from the second-order
//! one-sided discretization of d_nu u + beta u = 0 (outward sign folded in).
inline double robin_fold_denominator(double h, double beta) {
  double denom = 3.0 + 2.0 * h * beta;
  if (std::fabs(denom) < 1e-8)
    throw NumericalError("Robin fold ill-conditioned: beta too close to -3/(2h)");
  return denom;
}

}  // namespace detail

//! Assembles rows from node-sampled coefficients. cv[k] = c(x_k) + V(x_k);
//! the zero-order coefficient enters the diagonal as the last addition, so
//! diagonal perturbations commute with assembly up to a single rounding.
inline BandedOperator assemble_rows(std::span<const double> d, std::span<const double> b,
                                    std::span<const double> cv, double h,
                                    const BoundaryCondition& bc_lo,
                                    const BoundaryCondition& bc_hi) {
  const int n = static_cast<int>(d.size());
  BandedOperator op;
  op.n = n;
  op.lower.assign(n, 0.0);
  op.diag.assign(n, 0.0);
  op.upper.assign(n, 0.0);
  const double ih2 = 1.0 / (h * h);
  for (int k = 0; k < n; ++k) {
    double lo, di, up;
    double peclet = std::fabs(b[k]) * h / (2.0 * d[k]);
    if (peclet >= 1.0) {
      ++op.upwind_rows;
      lo = -d[k] * ih2;
      up = -d[k] * ih2;
      di = 2.0 * d[k] * ih2 + std::fabs(b[k]) / h;
      if (b[k] > 0) lo -= b[k] / h;
      else up += b[k] / h;
    } else {
      lo = -d[k] * ih2 - b[k] / (2.0 * h);
      up = -d[k] * ih2 + b[k] / (2.0 * h);
      di = 2.0 * d[k] * ih2;
    }
    di += cv[k];
    op.lower[k] = lo;
    op.diag[k] = di;
    op.upper[k] = up;
  }
  // Boundary closure. Dirichlet: neighbor value is zero, drop the term.
  // Robin: eliminate u_b = (4 u_1 - u_2)/(3 + 2 h beta) into the first
  // interior row (and mirrored at the high end).
  if (bc_lo.kind == BcKind::Robin) {
    double s = 1.0 / detail::robin_fold_denominator(h, bc_lo.beta);
    // row 0 had coefficient lower[0] multiplying u_b
    op.diag[0] += op.lower[0] * 4.0 * s;
    op.upper[0] += op.lower[0] * (-s);
  }
  op.lower[0] = 0.0;
  if (bc_hi.kind == BcKind::Robin) {
    double s = 1.0 / detail::robin_fold_denominator(h, bc_hi.beta);
    op.diag[n - 1] += op.upper[n - 1] * 4.0 * s;
    op.lower[n - 1] += op.upper[n - 1] * (-s);
  }
  op.upper[n - 1] = 0.0;

  op.min_row_sum = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k)
    op.min_row_sum = std::min(op.min_row_sum, op.lower[k] + op.diag[k] + op.upper[k]);
  return op;
}

//! Assembles L_h(t) + V_h(t) at a fixed time by sampling the scenario fields.
inline BandedOperator assemble_operator(const ScenarioSpec& spec, const Mesh& mesh, double t,
                                        std::span<const double> extra_potential = {}) {
  std::vector<double> d(mesh.nx), b(mesh.nx), cv(mesh.nx);
  for (int k = 0; k < mesh.nx; ++k) {
    double x = mesh.nodes[k];
    d[k] = eval_field(spec, FieldId::Diffusion, x, t);
    b[k] = eval_field(spec, FieldId::Drift, x, t);
    cv[k] = eval_field(spec, FieldId::Potential, x, t);
    if (!extra_potential.empty()) cv[k] += extra_potential[k];
  }
  return assemble_rows(d, b, cv, mesh.h, spec.bc_lo, spec.bc_hi);
}

//! Reconstructed boundary values for output: zero at Dirichlet ends, the
//! Robin fold value otherwise.
inline std::pair<double, double> reconstruct_boundary(const ScenarioSpec& spec, const Mesh& mesh,
                                                      std::span<const double> u) {
  double lo = 0.0, hi = 0.0;
  if (spec.bc_lo.kind == BcKind::Robin)
    lo = (4.0 * u[0] - u[1]) / detail::robin_fold_denominator(mesh.h, spec.bc_lo.beta);
  if (spec.bc_hi.kind == BcKind::Robin)
    hi = (4.0 * u[mesh.nx - 1] - u[mesh.nx - 2]) /
         detail::robin_fold_denominator(mesh.h, spec.bc_hi.beta);
  return {lo, hi};
}

//! LU factorization of a tridiagonal matrix (Thomas algorithm), reusable
//! across many solves with the same matrix.
class TriFactor {
 public:
  TriFactor() = default;

  //! Factorizes I*alpha + beta*A (alpha = 1, beta = dt for implicit Euler).
  TriFactor(const BandedOperator& a, double alpha, double beta) { factor(a, alpha, beta); }

  void factor(const BandedOperator& a, double alpha, double beta) {
    n_ = a.n;
    dinv_.resize(n_);
    lfac_.resize(n_);
    up_.resize(n_);
    double prev_dinv = 0.0;
    for (int i = 0; i < n_; ++i) {
      up_[i] = beta * a.upper[i];
      double lo = beta * a.lower[i];
      double di = alpha + beta * a.diag[i];
      double l = (i > 0) ? lo * prev_dinv : 0.0;
      double piv = di - (i > 0 ? l * up_[i - 1] : 0.0);
      if (!(std::fabs(piv) > 1e-300))
        throw NumericalError("singular step matrix in tridiagonal factorization");
      lfac_[i] = l;
      dinv_[i] = 1.0 / piv;
      prev_dinv = dinv_[i];
    }
  }

  void solve_inplace(std::vector<double>& x) const {
    for (int i = 1; i < n_; ++i) x[i] -= lfac_[i] * x[i - 1];
    x[n_ - 1] *= dinv_[n_ - 1];
    for (int i = n_ - 2; i >= 0; --i) x[i] = (x[i] - up_[i] * x[i + 1]) * dinv_[i];
  }

  int size() const { return n_; }

 private:
  int n_ = 0;
  std::vector<double> dinv_, lfac_, up_;
};

}  // namespace pplog

#endif
