// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0
//! \file pplog/perturb.hpp
//! Domain dilation along Dirichlet endpoints: each Dirichlet end moves
//! outward by 1/n, coefficients extend by global expression evaluation, and
//! the dilated principal eigenvalues increase toward sigma on the original
//! domain.

#ifndef PPLOG_PERTURB_HPP
#define PPLOG_PERTURB_HPP

#include <cmath>
#include <vector>

#include "pplog/sigma.hpp"

namespace pplog {

struct DilatedScenario {
  ScenarioSpec spec;  // enlarged domain, same expressions
  int n = 0;
};

//! Moves every Dirichlet endpoint outward by 1/n (Robin endpoints are fixed).
//! Expression coefficients evaluate on the larger interval directly, which is
//! a valid continuous periodic extension.
inline DilatedScenario dilated_scenario(const ScenarioSpec& spec, int n) {
  bool lo_d = spec.bc_lo.kind == BcKind::Dirichlet;
  bool hi_d = spec.bc_hi.kind == BcKind::Dirichlet;
  if (!lo_d && !hi_d)
    throw std::invalid_argument("dilated_scenario requires a Dirichlet endpoint");
  int n_min = static_cast<int>(std::ceil(2.0 / (spec.x_hi - spec.x_lo)));
  if (n < n_min)
    throw std::invalid_argument("dilated_scenario: n must be at least " + std::to_string(n_min));
  DilatedScenario d;
  d.n = n;
  d.spec = spec;
  if (lo_d) d.spec.x_lo = spec.x_lo - 1.0 / n;
  if (hi_d) d.spec.x_hi = spec.x_hi + 1.0 / n;
  return d;
}

//! Mesh for a dilated domain with spacing matched to the base mesh: the node
//! count is chosen so h differs from the base h only at O(h^2) effect level.
inline Mesh matched_mesh(const Mesh& base_mesh, const ScenarioSpec& dilated) {
  double L = dilated.x_hi - dilated.x_lo;
  int nx = std::max(3, static_cast<int>(std::lround(L / base_mesh.h)) - 1);
  return build_mesh(dilated, nx, base_mesh.nt);
}

struct SigmaSequence {
  std::vector<int> n_list;
  std::vector<double> sigma_n;
  double sigma = 0;  // on the original domain
};

//! sigma_n for the dilated family plus sigma on Omega, all Richardson
//! extrapolated at matched spacing.
inline SigmaSequence sigma_sequence(const ScenarioSpec& spec, const Mesh& mesh, double lambda,
                                    double gamma, const std::vector<int>& n_list,
                                    EigenOptions opts = {}) {
  for (size_t i = 0; i + 1 < n_list.size(); ++i)
    if (!(n_list[i] < n_list[i + 1]))
      throw std::invalid_argument("sigma_sequence: n_list must increase");
  SigmaSequence seq;
  seq.n_list = n_list;
  seq.sigma = SigmaEvaluator(spec, mesh, opts).eval(lambda, gamma).sigma;
  for (int n : n_list) {
    DilatedScenario d = dilated_scenario(spec, n);
    Mesh md = matched_mesh(mesh, d.spec);
    seq.sigma_n.push_back(SigmaEvaluator(d.spec, md, opts).eval(lambda, gamma).sigma);
  }
  return seq;
}

}  // namespace pplog

#endif
