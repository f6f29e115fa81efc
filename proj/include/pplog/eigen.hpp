// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0
//! \file pplog/eigen.hpp
//! Principal eigenvalue sigma[P,B,Q_T] and positive eigenfunction from the
//! period map: power (Perron) iteration with a dense brute-force oracle.

#ifndef PPLOG_EIGEN_HPP
#define PPLOG_EIGEN_HPP

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "pplog/propagator.hpp"

namespace pplog {

struct EigenResult {
  double sigma = 0;    // principal eigenvalue, 1/time
  double rho = 0;      // spectral radius of the period map, exp(-sigma T);
                       // may under/overflow for extreme potentials - sigma is
                       // computed in log space and is authoritative
  int iterations = 0;
  double residual = 0;  // ||M v - rho v||_inf / (rho ||v||_inf), scale-free
  std::vector<double> phi;  // (nt+1) x nx eigenfunction samples, global sup = 1
  double kappa = 0;    // gauge shift used (diagnostic)

  double phi_at(int j, int k, int nx) const { return phi[static_cast<size_t>(j) * nx + k]; }
};

namespace detail {

//! Positivity guard: negative entries always mean the period map is not
//! positive; exact zeros are tolerated only when every step matrix is an
//! M-matrix (the true map is then positive and zeros are far-field underflow).
inline void check_positive(const MonodromyOperator& op, const std::vector<double>& v,
                           const char* where) {
  for (double x : v) {
    if (x < 0.0 || (x == 0.0 && !op.m_matrix_steps()))
      throw NumericalError(std::string("positivity lost in ") + where +
                           " (period map not positive)");
  }
}

//! T-periodic eigenfunction trajectory from the Perron vector of the shifted
//! map: phi(t_j) = (shifted flow)(v0)(t_j) * e^{sigma_shifted t_j}, assembled
//! in log space and renormalized to global sup 1.
inline void fill_trajectory(const MonodromyOperator& op, std::vector<double> v,
                            double sigma_shifted, EigenResult& out) {
  const Mesh& mesh = op.mesh();
  const int nx = mesh.nx, nt = mesh.nt;
  std::vector<std::vector<double>> slices(nt + 1);
  std::vector<double> logs(nt + 1);
  double lacc = 0.0;
  {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::fabs(x));
    for (double& x : v) x /= s;
    lacc = std::log(s);
  }
  slices[0] = v;
  logs[0] = lacc;
  for (int j = 1; j <= nt; ++j) {
    op.step_shifted(j, v);
    double s = 0.0;
    for (double x : v) s = std::max(s, std::fabs(x));
    if (!(s > 0.0)) throw NumericalError("eigenfunction trajectory annihilated");
    for (double& x : v) x /= s;
    check_positive(op, v, "eigenfunction trajectory");
    lacc += std::log(s);
    slices[j] = v;
    logs[j] = lacc + sigma_shifted * mesh.times[j];
  }
  double lmax = logs[0];
  for (int j = 1; j <= nt; ++j) lmax = std::max(lmax, logs[j]);
  out.phi.resize(static_cast<size_t>(nt + 1) * nx);
  for (int j = 0; j <= nt; ++j) {
    double f = std::exp(logs[j] - lmax);
    for (int k = 0; k < nx; ++k) out.phi[static_cast<size_t>(j) * nx + k] = slices[j][k] * f;
  }
}

}  // namespace detail

//! Power iteration on the period map. Start vector is all-ones; convergence
//! is stagnation of the per-period log growth factor, which matches the
//! Rayleigh-ratio test |rho_k - rho_{k-1}| <= tol rho_k at first order.
inline EigenResult principal_eigenpair(const MonodromyOperator& op, double tol = 1e-10,
                                       int max_iter = 20000,
                                       const std::vector<double>* start = nullptr) {
  const Mesh& mesh = op.mesh();
  std::vector<double> v = start && !start->empty() ? *start
                                                   : std::vector<double>(mesh.nx, 1.0);
  double log_prev = std::numeric_limits<double>::quiet_NaN();
  double log_cur = 0.0;
  int it = 0;
  bool converged = false;
  double last_delta = std::numeric_limits<double>::infinity();
  while (it < max_iter) {
    ++it;
    v = op.apply_scaled(std::move(v), log_cur);
    detail::check_positive(op, v, "power iteration");
    if (it >= 2) {
      last_delta = std::fabs(log_cur - log_prev);
      if (last_delta <= tol) {
        converged = true;
        break;
      }
    }
    log_prev = log_cur;
  }
  if (!converged)
    throw NumericalError("power iteration did not converge in " + std::to_string(max_iter) +
                         " iterations (last log-rho delta " + format_double(last_delta) + ")");

  // rho extraction by one extra application on the normalized iterate
  double log_rho = 0.0;
  std::vector<double> w = op.apply_scaled(v, log_rho);
  EigenResult res;
  res.iterations = it + 1;
  res.kappa = op.kappa();
  double sigma_shifted = -log_rho / mesh.T;
  res.sigma = sigma_shifted + op.kappa();
  res.rho = std::exp(-res.sigma * mesh.T);
  double diff = 0.0;
  for (size_t i = 0; i < w.size(); ++i) diff = std::max(diff, std::fabs(w[i] - v[i]));
  res.residual = diff;
  detail::fill_trajectory(op, v, sigma_shifted, res);
  return res;
}

//! Dense brute-force oracle: propagates all nx basis vectors, builds the full
//! (shifted) period-map matrix, and takes the spectral radius from a dense
//! eigensolver. Requires nx <= 64.
inline EigenResult dense_oracle(const MonodromyOperator& op) {
  const Mesh& mesh = op.mesh();
  const int nx = mesh.nx;
  if (nx > 64) throw std::invalid_argument("dense_oracle requires nx <= 64");
  Eigen::MatrixXd M(nx, nx);
  for (int k = 0; k < nx; ++k) {
    std::vector<double> e(nx, 0.0);
    e[k] = 1.0;
    double lf = 0.0;
    auto col = op.apply_scaled(std::move(e), lf);
    double f = std::exp(lf);
    for (int i = 0; i < nx; ++i) M(i, k) = col[i] * f;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
  const auto& vals = es.eigenvalues();
  int dom = 0;
  for (int i = 1; i < nx; ++i)
    if (std::abs(vals(i)) > std::abs(vals(dom))) dom = i;
  double rho_shifted = std::abs(vals(dom));
  double second = 0.0;
  for (int i = 0; i < nx; ++i) {
    if (i == dom) continue;
    second = std::max(second, std::abs(vals(i)));
  }
  if (std::fabs(vals(dom).imag()) > 1e-8 * rho_shifted ||
      (rho_shifted - second) <= 1e-8 * rho_shifted)
    throw NumericalError("Perron structure violated: dominant eigenvalue complex or not simple");

  Eigen::VectorXcd vec = es.eigenvectors().col(dom);
  int imax = 0;
  for (int i = 1; i < nx; ++i)
    if (std::abs(vec(i)) > std::abs(vec(imax))) imax = i;
  std::complex<double> phase = vec(imax) / std::abs(vec(imax));
  std::vector<double> v(nx);
  double vmax = 0.0;
  for (int i = 0; i < nx; ++i) {
    std::complex<double> z = vec(i) / phase;
    if (std::fabs(z.imag()) > 1e-8 || z.real() < -1e-8)
      throw NumericalError("Perron structure violated: eigenvector not sign-definite");
    v[i] = std::max(z.real(), 0.0);
    vmax = std::max(vmax, v[i]);
  }
  for (double& x : v) x /= vmax;

  EigenResult res;
  res.kappa = op.kappa();
  double sigma_shifted = -std::log(rho_shifted) / mesh.T;
  res.sigma = sigma_shifted + op.kappa();
  res.rho = std::exp(-res.sigma * mesh.T);
  res.iterations = 0;
  double lf = 0.0;
  auto w = op.apply_scaled(v, lf);
  double diff = 0.0;
  for (int i = 0; i < nx; ++i) diff = std::max(diff, std::fabs(w[i] - v[i]));
  res.residual = diff;
  detail::fill_trajectory(op, v, sigma_shifted, res);
  return res;
}

//! Perron vector (t = 0 slice of the eigenfunction), usable as a warm start.
inline std::vector<double> eigenfunction_slice0(const EigenResult& r, int nx) {
  std::vector<double> v(r.phi.begin(), r.phi.begin() + nx);
  return v;
}

}  // namespace pplog

#endif
