// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0
//! \file pplog/zeroset.hpp
//! Discrete interior of the vanishing set a^{-1}(0): per-layer components
//! with periodic adjacency, the tau-path reachability certificate, and the
//! constructor for blocked corridor weights (two-lobe base plus severing
//! bumps chained across the corridor window).

#ifndef PPLOG_ZEROSET_HPP
#define PPLOG_ZEROSET_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pplog/mesh.hpp"

namespace pplog {

// ---------------------------------------------------------------------------
// Zero-set graph and reachability
// ---------------------------------------------------------------------------

struct ZeroComponent {
  int k_lo = 0, k_hi = 0;  // inclusive interior-node indices
  bool overlaps(const ZeroComponent& o) const { return k_lo <= o.k_hi && o.k_lo <= k_hi; }
};

struct ZeroSetGraph {
  int nt = 0, nx = 0;
  double eps_zero = 0;
  std::vector<std::vector<ZeroComponent>> layers;  // j = 0..nt-1 (time circle)

  bool empty_layer(int j) const { return layers[j].empty(); }
};

//! Default threshold: bump profiles and the positive-part constructions
//! vanish identically on their zero sets, so a tiny multiple of max a
//! separates "exactly zero" from "positive".
inline double default_eps_zero(const ScenarioSpec& spec, const Mesh& mesh) {
  double mx = 0;
  for (int j = 0; j <= mesh.nt; ++j) {
    mx = std::max(mx, eval_weight_a(spec, mesh.x_lo, mesh.times[j]));
    mx = std::max(mx, eval_weight_a(spec, mesh.x_hi, mesh.times[j]));
    for (double x : mesh.nodes) mx = std::max(mx, eval_weight_a(spec, x, mesh.times[j]));
  }
  return 1e-12 * mx;
}

//! Layers hold the maximal node-intervals where a < eps_zero after one-cell
//! erosion in x (the discrete "interior"); boundary nodes participate in the
//! erosion stencil only.
inline ZeroSetGraph build_zero_set_graph(const ScenarioSpec& spec, const Mesh& mesh,
                                         double eps_zero = -1.0) {
  ZeroSetGraph g;
  g.nt = mesh.nt;
  g.nx = mesh.nx;
  g.eps_zero = eps_zero > 0 ? eps_zero : default_eps_zero(spec, mesh);
  g.layers.resize(mesh.nt);
  std::vector<char> raw(mesh.nx + 2);
  for (int j = 0; j < mesh.nt; ++j) {
    double t = mesh.times[j];
    raw[0] = eval_weight_a(spec, mesh.x_lo, t) < g.eps_zero;
    raw[mesh.nx + 1] = eval_weight_a(spec, mesh.x_hi, t) < g.eps_zero;
    for (int k = 1; k <= mesh.nx; ++k)
      raw[k] = eval_weight_a(spec, mesh.nodes[k - 1], t) < g.eps_zero;
    int start = -1;
    for (int k = 1; k <= mesh.nx + 1; ++k) {
      bool eroded = k <= mesh.nx && raw[k - 1] && raw[k] && raw[k + 1];
      if (eroded && start < 0) start = k;
      if (!eroded && start >= 0) {
        g.layers[j].push_back({start - 1, k - 2});  // 0-based interior indices
        start = -1;
      }
    }
  }
  return g;
}

struct PathCertificate {
  bool exists = false;
  std::vector<int> witness;    // component index per layer 0..nt (wraps to layer 0)
  std::vector<int> cut_layers; // NoPath: layers where reachability dies
  bool wrap_failure = false;   // NoPath with surviving but non-closing reachability
};

//! Forward reachability through layers 0..nt with the periodic wrap: a path
//! exists iff some layer-0 component reaches itself after one full period.
inline PathCertificate tau_path_exists(const ZeroSetGraph& g) {
  PathCertificate cert;
  const int nt = g.nt;

  std::vector<int> empties;
  for (int j = 0; j < nt; ++j)
    if (g.empty_layer(j)) empties.push_back(j);
  if (!empties.empty()) {
    cert.cut_layers = empties;
    return cert;
  }

  const int n0 = static_cast<int>(g.layers[0].size());
  for (int s = 0; s < n0 && !cert.exists; ++s) {
    // reach[j][c]: component c of layer j reachable from start s
    std::vector<std::vector<int>> prev(nt + 1);
    std::vector<char> cur(g.layers[0].size(), 0);
    cur[s] = 1;
    std::vector<std::vector<char>> reach(nt + 1);
    reach[0] = cur;
    bool dead = false;
    for (int j = 1; j <= nt && !dead; ++j) {
      const auto& src = g.layers[(j - 1) % nt];
      const auto& dst = g.layers[j % nt];
      std::vector<char> nxt(dst.size(), 0);
      std::vector<int> back(dst.size(), -1);
      for (size_t cs = 0; cs < src.size(); ++cs) {
        if (!reach[j - 1][cs]) continue;
        for (size_t cd = 0; cd < dst.size(); ++cd)
          if (src[cs].overlaps(dst[cd]) && !nxt[cd]) {
            nxt[cd] = 1;
            back[cd] = static_cast<int>(cs);
          }
      }
      dead = std::none_of(nxt.begin(), nxt.end(), [](char c) { return c != 0; });
      reach[j] = std::move(nxt);
      prev[j] = std::move(back);
    }
    if (!dead && reach[nt][s]) {
      cert.exists = true;
      cert.witness.assign(nt + 1, -1);
      cert.witness[nt] = s;
      for (int j = nt; j > 0; --j) cert.witness[j - 1] = prev[j][cert.witness[j]];
      return cert;
    }
  }

  // no closing walk: report where the all-starts reachable set dies
  std::vector<char> cur(g.layers[0].size(), 1);
  for (int j = 1; j <= nt; ++j) {
    const auto& src = g.layers[(j - 1) % nt];
    const auto& dst = g.layers[j % nt];
    std::vector<char> nxt(dst.size(), 0);
    for (size_t cs = 0; cs < src.size(); ++cs) {
      if (!cur[cs]) continue;
      for (size_t cd = 0; cd < dst.size(); ++cd)
        if (src[cs].overlaps(dst[cd])) nxt[cd] = 1;
    }
    if (std::none_of(nxt.begin(), nxt.end(), [](char c) { return c != 0; })) {
      cert.cut_layers.push_back(j % nt);
      return cert;
    }
    cur = std::move(nxt);
  }
  cert.wrap_failure = true;  // survived but permuted away from every start
  return cert;
}

//! 0/1 raster of the discrete zero set (rows = time layers) for external plots.
inline std::vector<std::vector<int>> zero_set_raster(const ZeroSetGraph& g) {
  std::vector<std::vector<int>> r(g.nt, std::vector<int>(g.nx, 0));
  for (int j = 0; j < g.nt; ++j)
    for (const auto& c : g.layers[j])
      for (int k = c.k_lo; k <= c.k_hi; ++k) r[j][k] = 1;
  return r;
}

// ---------------------------------------------------------------------------
// Blocked corridor weights (two-lobe base with severing bump chains)
// ---------------------------------------------------------------------------

//! A lobe of the vanishing set: born as a point at (tip_b, birth), fattening
//! to [mid_lo, mid_hi] at midlife, collapsing to (tip_d, death). Edges are
//! quadratic Bezier curves in the circular progress coordinate
//! p = sin^2(pi (t-birth)/T) / (sin^2(pi (t-birth)/T) + sin^2(pi (t-death)/T)).
struct LobeSpec {
  double birth = 0, death = 0;      // times on the circle (death may exceed T)
  double tip_b = 0.5, tip_d = 0.5;  // tip positions in x
  double mid_lo = 0, mid_hi = 0;    // midlife slice
};

namespace detail {

inline std::string num(double v) { return format_double(v); }

//! Positive part (u + sqrt(u^2))/2: exactly zero for u <= 0.
inline std::string pos_str(const std::string& u) {
  return "((" + u + ") + (((" + u + ")^2)^0.5))/2";
}

inline std::string lobe_factor_str(const LobeSpec& lobe, double T) {
  double tb = wrap_mod(lobe.birth, T);
  double td = wrap_mod(lobe.death, T);
  // arc-center gate: alive iff circular distance to the arc center <= rho
  double arc = wrap_mod(lobe.death - lobe.birth, T);
  double center = wrap_mod(lobe.birth + arc / 2, T);
  double rho = arc / 2;
  std::string Db = "sin(pi*(t - " + num(tb) + ")/" + num(T) + ")^2";
  std::string Dd = "sin(pi*(t - " + num(td) + ")/" + num(T) + ")^2";
  std::string p = "(" + Db + ")/((" + Db + ") + (" + Dd + "))";
  auto bezier = [&](double q0, double q1, double q2) {
    // q0 (1-p)^2 + 2 q1 p (1-p) + q2 p^2
    return "(" + num(q0) + "*(1 - " + p + ")^2 + " + num(2 * q1) + "*(" + p +
           ")*(1 - " + p + ") + " + num(q2) + "*(" + p + ")^2)";
  };
  std::string lo = bezier(lobe.tip_b, lobe.mid_lo, lobe.tip_d);
  std::string hi = bezier(lobe.tip_b, lobe.mid_hi, lobe.tip_d);
  std::string inside = "(x - " + lo + ")*(x - " + hi + ")";
  std::string gate =
      "sin(pi*(t - " + num(center) + ")/" + num(T) + ")^2 - " + num(std::pow(std::sin(M_PI * rho / T), 2));
  return "(" + pos_str(inside) + " + " + pos_str(gate) + ")";
}

}  // namespace detail

//! Samples a lobe's slice at time t (empty if the lobe is not alive).
inline std::optional<std::pair<double, double>> lobe_slice(const LobeSpec& lobe, double t,
                                                           double T) {
  double arc = detail::wrap_mod(lobe.death - lobe.birth, T);
  double center = detail::wrap_mod(lobe.birth + arc / 2, T);
  if (detail::circ_dist(t, center, T) > arc / 2) return std::nullopt;
  double Db = std::pow(std::sin(M_PI * detail::circ_offset(t, lobe.birth, T) / T), 2);
  double Dd = std::pow(std::sin(M_PI * detail::circ_offset(t, lobe.death, T) / T), 2);
  double p = Db / (Db + Dd);
  auto bez = [&](double q0, double q1, double q2) {
    return q0 * (1 - p) * (1 - p) + 2 * q1 * p * (1 - p) + q2 * p * p;
  };
  return std::make_pair(bez(lobe.tip_b, lobe.mid_lo, lobe.tip_d),
                        bez(lobe.tip_b, lobe.mid_hi, lobe.tip_d));
}

//! Base weight whose vanishing set is the union of the lobes: product of the
//! per-lobe positive factors, saturated to a near-binary profile.
inline Expr make_lobe_base(const std::vector<LobeSpec>& lobes, double T,
                           double saturation = 1e9) {
  std::string prod;
  for (const auto& lobe : lobes) {
    if (!prod.empty()) prod += "*";
    prod += detail::lobe_factor_str(lobe, T);
  }
  std::string gp = detail::num(saturation) + "*" + prod;
  return Expr::parse("(" + gp + ")/(1 + " + gp + ")");
}

struct CorridorGeometry {
  double t_Q = 0.42, t_P = 0.58;   // corridor window [t_Q, t_P]
  double lane_left = 0.30, lane_right = 0.70;
  double face_reach = 0.26;        // midlife reach toward the opposite lane
  double back_reach = 0.18;        // midlife reach away from it
  double throat = 0.50;            // central transfer position
  double throat_stagger = 0.09;    // chains alternate throats around the center
  double tip_overshoot = 0.03;     // tips cross the throat for robust overlap
  double birth_frac = 0.125;       // lobe birth inside the preceding window span
};

struct BlockedBumpParams {
  double half_width_x = 0.07;  // bump half-width around its throat
  double amplitude = 2.0;
  bool shift_aside = false;    // place the bump harmlessly inside a lobe belly
};

//! Lobe layout for the corridor construction: n+1 lobes on alternating
//! lanes, each born as a point near one transfer throat and dying as a point
//! near the next, with tips overshooting the throat so consecutive slices
//! genuinely overlap during the handoff.
inline std::vector<LobeSpec> corridor_lobes(const CorridorGeometry& geom, int n,
                                            const std::vector<double>& times, double T) {
  if (n < 1) throw std::invalid_argument("corridor geometry: n must be >= 1");
  if (static_cast<int>(times.size()) != n - 1)
    throw std::invalid_argument("corridor geometry: need n-1 interior times");
  std::vector<double> tau;
  tau.push_back(geom.t_Q);
  for (double t : times) tau.push_back(t);
  tau.push_back(geom.t_P);
  for (size_t i = 0; i + 1 < tau.size(); ++i)
    if (!(tau[i] < tau[i + 1]))
      throw std::invalid_argument("corridor geometry: times must increase inside (t_Q, t_P)");

  double C = T - (geom.t_P - geom.t_Q);  // return window arc
  auto throat_of = [&](int j) {
    if (j < 1 || j > n || n == 1) return geom.throat;
    return geom.throat + ((j % 2 == 1) ? -geom.throat_stagger : geom.throat_stagger);
  };

  std::vector<LobeSpec> lobes;
  for (int j = 1; j <= n + 1; ++j) {
    LobeSpec lobe;
    double span_lo_prev, span_len_prev, span_lo_self, span_len_self;
    if (j == 1) {
      span_lo_prev = geom.t_P - T;  // previous period's return window
      span_len_prev = C;
    } else {
      span_lo_prev = tau[j - 2];
      span_len_prev = tau[j - 1] - tau[j - 2];
    }
    if (j == n + 1) {
      span_lo_self = geom.t_P;
      span_len_self = C;
    } else {
      span_lo_self = tau[j - 1];
      span_len_self = tau[j] - tau[j - 1];
    }
    lobe.birth = span_lo_prev + geom.birth_frac * span_len_prev;
    lobe.death = span_lo_self + (1.0 - geom.birth_frac) * span_len_self;
    bool left = (j % 2 == 1);
    double dir = left ? 1.0 : -1.0;
    lobe.tip_b = throat_of(j - 1) + dir * geom.tip_overshoot;
    lobe.tip_d = throat_of(j) + dir * geom.tip_overshoot;
    double lane = left ? geom.lane_left : geom.lane_right;
    lobe.mid_lo = left ? lane - geom.back_reach : lane - geom.face_reach;
    lobe.mid_hi = left ? lane + geom.face_reach : lane + geom.back_reach;
    lobes.push_back(lobe);
  }
  return lobes;
}

//! Two-lobe corridor base plus n severing bumps whose time supports abut at
//! the given interior times (consecutive slice extrema matching). The base
//! alone admits a periodic path through the transfer throats and the open
//! return window; bump j covers throat j for the whole span [t_{j-1}, t_j],
//! severing every forward transfer.
inline WeightSpec make_blocked_weight(const CorridorGeometry& geom, int n,
                                      const std::vector<double>& times, double T,
                                      const BlockedBumpParams& bp = {}) {
  std::vector<double> tau;
  tau.push_back(geom.t_Q);
  for (double t : times) tau.push_back(t);
  tau.push_back(geom.t_P);

  std::vector<LobeSpec> lobes = corridor_lobes(geom, n, times, T);
  auto throat_of = [&](int j) {
    if (j < 1 || j > n || n == 1) return geom.throat;
    return geom.throat + ((j % 2 == 1) ? -geom.throat_stagger : geom.throat_stagger);
  };

  WeightSpec w;
  w.base = make_lobe_base(lobes, T);

  if (bp.shift_aside) {
    // harmless variant: a small bump strictly inside the belly of the last
    // lobe; paths go around it, so the corridor stays passable
    const LobeSpec& host = lobes.back();
    double arc = detail::wrap_mod(host.death - host.birth, T);
    double mid = detail::wrap_mod(host.birth + arc / 2, T);
    double xc = 0.25 * (host.tip_b + host.tip_d + host.mid_lo + host.mid_hi);
    w.bumps.push_back({xc, mid, 0.1 * (host.mid_hi - host.mid_lo), 0.08 * arc,
                       bp.amplitude});
  } else {
    for (int j = 1; j <= n; ++j) {
      BumpComponent b;
      b.xc = throat_of(j);
      b.tc = 0.5 * (tau[j - 1] + tau[j]);
      b.rx = bp.half_width_x;
      b.rt = 0.5 * (tau[j] - tau[j - 1]);
      b.amplitude = bp.amplitude;
      w.bumps.push_back(b);
    }
  }
  return w;
}

//! Two separated lobes with a genuine time gap between the death of the
//! first and the birth of the second: no periodic path can cross the gap.
inline WeightSpec make_two_lobe_gap_weight(double T) {
  std::vector<LobeSpec> lobes = {
      {0.70 * T, 1.25 * T, 0.35, 0.35, 0.15, 0.55},
      {0.35 * T, 0.62 * T, 0.65, 0.65, 0.45, 0.85},
  };
  return {make_lobe_base(lobes, T), {}};
}

//! Containment diagnostics: fraction of sampled bump-support points where the
//! base weight exceeds eps (dark overhang), and the severing check that the
//! support does intersect the vanishing set.
struct BumpContainmentReport {
  std::vector<double> overhang_fraction;  // per bump
  std::vector<double> max_base_on_support;
  bool all_intersect_zero_set = true;
};

inline BumpContainmentReport check_bump_containment(const ScenarioSpec& spec, int samples = 33) {
  BumpContainmentReport rep;
  const double T = spec.period_T;
  for (const auto& b : spec.weight_a.bumps) {
    int dark = 0, zero = 0, total = 0;
    double maxbase = 0;
    for (int i = 0; i <= samples; ++i)
      for (int j = 0; j <= samples; ++j) {
        double x = b.xc + b.rx * (2.0 * i / samples - 1.0);
        double t = b.tc + b.rt * (2.0 * j / samples - 1.0);
        if (x <= spec.x_lo || x >= spec.x_hi) continue;
        double base = spec.weight_a.base.eval(x, detail::wrap_mod(t, T));
        maxbase = std::max(maxbase, base);
        ++total;
        if (base > 1e-12) ++dark;
        else ++zero;
      }
    rep.overhang_fraction.push_back(total ? static_cast<double>(dark) / total : 1.0);
    rep.max_base_on_support.push_back(maxbase);
    if (zero == 0) rep.all_intersect_zero_set = false;
  }
  return rep;
}

}  // namespace pplog

#endif
