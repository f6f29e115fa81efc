// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0
//! \file pplog/mesh.hpp
//! Uniform space-time mesh over [x_lo, x_hi] x [0, T]. The state vector holds
//! interior nodes only; time levels close the period exactly.

#ifndef PPLOG_MESH_HPP
#define PPLOG_MESH_HPP

#include <stdexcept>
#include <vector>

#include "pplog/scenario.hpp"

namespace pplog {

struct Mesh {
  int nx = 0;                  // interior node count
  double h = 0;                // spacing (x_hi - x_lo)/(nx+1)
  std::vector<double> nodes;   // x_k, k = 1..nx
  int nt = 0;                  // steps per period
  double dt = 0;               // T/nt
  std::vector<double> times;   // t_j = T j / nt, j = 0..nt (times[nt] == T exactly)
  double x_lo = 0, x_hi = 0, T = 0;
};

inline Mesh build_mesh(const ScenarioSpec& spec, int nx, int nt) {
  if (nx < 3) throw std::invalid_argument("build_mesh: nx must be >= 3");
  if (nt < 4) throw std::invalid_argument("build_mesh: nt must be >= 4");
  Mesh m;
  m.nx = nx;
  m.nt = nt;
  m.x_lo = spec.x_lo;
  m.x_hi = spec.x_hi;
  m.T = spec.period_T;
  m.h = (spec.x_hi - spec.x_lo) / (nx + 1);
  m.dt = spec.period_T / nt;
  m.nodes.resize(nx);
  for (int k = 1; k <= nx; ++k)
    m.nodes[k - 1] = spec.x_lo + k * (spec.x_hi - spec.x_lo) / (nx + 1);
  m.times.resize(nt + 1);
  for (int j = 0; j <= nt; ++j) m.times[j] = spec.period_T * j / nt;
  return m;
}

//! Node-sampled coefficients for all time levels, evaluated once per
//! (scenario, mesh) pair and shared across parameter sweeps.
struct CoefficientTable {
  int nx = 0, nt = 0;
  // row-major (nt+1) x nx, level j = time t_j
  std::vector<double> d, b, c, m, a;
  // boundary samples per level (for diagnostics)
  std::vector<double> a_lo, a_hi;

  double at(const std::vector<double>& f, int j, int k) const { return f[j * nx + k]; }
};

inline CoefficientTable build_coefficient_table(const ScenarioSpec& spec, const Mesh& mesh) {
  CoefficientTable tab;
  tab.nx = mesh.nx;
  tab.nt = mesh.nt;
  size_t n = static_cast<size_t>(mesh.nt + 1) * mesh.nx;
  tab.d.resize(n);
  tab.b.resize(n);
  tab.c.resize(n);
  tab.m.resize(n);
  tab.a.resize(n);
  tab.a_lo.resize(mesh.nt + 1);
  tab.a_hi.resize(mesh.nt + 1);
  for (int j = 0; j <= mesh.nt; ++j) {
    double t = mesh.times[j];
    for (int k = 0; k < mesh.nx; ++k) {
      double x = mesh.nodes[k];
      size_t i = static_cast<size_t>(j) * mesh.nx + k;
      tab.d[i] = eval_field(spec, FieldId::Diffusion, x, t);
      tab.b[i] = eval_field(spec, FieldId::Drift, x, t);
      tab.c[i] = eval_field(spec, FieldId::Potential, x, t);
      tab.m[i] = eval_field(spec, FieldId::WeightM, x, t);
      tab.a[i] = eval_field(spec, FieldId::WeightA, x, t);
    }
    tab.a_lo[j] = eval_weight_a(spec, spec.x_lo, t);
    tab.a_hi[j] = eval_weight_a(spec, spec.x_hi, t);
  }
  return tab;
}

}  // namespace pplog

#endif
