// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0
//! \file pplog/scenario.hpp
//! Problem instances: domain, period, coefficients, the degenerate weight
//! a = a0 + sum of compactly supported bumps, boundary operators, and the
//! crowding nonlinearity. Includes the scenario-file parser and validator.

#ifndef PPLOG_SCENARIO_HPP
#define PPLOG_SCENARIO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pplog/expr.hpp"

namespace pplog {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BcKind { Dirichlet, Robin };

struct BoundaryCondition {
  BcKind kind = BcKind::Dirichlet;
  double beta = 0.0;  // Robin only; any sign
};

//! Smooth compactly supported bump a_i(x,t) = A g((x-xc)/rx) g((t-tc)/rt)
//! with g(s) = exp(1 - 1/(1-s^2)) for |s|<1, 0 otherwise. Support wraps
//! periodically in t.
struct BumpComponent {
  double xc = 0, tc = 0, rx = 0, rt = 0, amplitude = 1;
};

struct WeightSpec {
  Expr base;  // a0 >= 0
  std::vector<BumpComponent> bumps;
};

//! f(u) = u^p by default; a tabulated monotone f (piecewise linear through
//! (0,0)) can be installed programmatically.
struct NonlinearitySpec {
  double exponent = 1.0;
  std::vector<std::pair<double, double>> table;  // sorted in u; empty => power law

  double operator()(double u) const {
    if (table.empty()) return std::pow(u, exponent);
    if (u <= 0) return 0.0;
    size_t i = 1;
    while (i < table.size() && table[i].first < u) ++i;
    const auto [u0, f0] = table[i - 1];
    const auto [u1, f1] = table[std::min(i, table.size() - 1)];
    if (u1 == u0) return f1;
    return f0 + (f1 - f0) * (u - u0) / (u1 - u0);  // linear extrapolation beyond the table
  }
};

struct ScenarioSpec {
  double x_lo = 0, x_hi = 1;
  double period_T = 1;
  Expr diffusion = Expr::constant(1);
  Expr drift = Expr::constant(0);
  Expr potential = Expr::constant(0);
  Expr weight_m = Expr::constant(1);
  WeightSpec weight_a{Expr::constant(1), {}};
  BoundaryCondition bc_lo, bc_hi;
  NonlinearitySpec nonlinearity;
  int default_nx = 100, default_nt = 256;
  double mu_ellipticity = 1e-8;  // declared ellipticity floor
};

enum class FieldId { Diffusion, Drift, Potential, WeightM, WeightA };

namespace detail {

inline double wrap_mod(double t, double T) {
  double r = std::fmod(t, T);
  return r < 0 ? r + T : r;
}

//! Signed circular offset of t from center, reduced into [-T/2, T/2).
inline double circ_offset(double t, double center, double T) {
  double d = std::fmod(t - center, T);
  if (d < -T / 2) d += T;
  if (d >= T / 2) d -= T;
  return d;
}

inline double bump_profile(double s) {
  double s2 = s * s;
  if (s2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s2));
}

//! Circular distance between two times on the period circle.
inline double circ_dist(double a, double b, double T) {
  double d = std::fabs(std::fmod(a - b, T));
  if (d > T / 2) d = T - d;
  return d;
}

}  // namespace detail

inline double eval_bump(const BumpComponent& bump, double x, double t, double T) {
  double sx = (x - bump.xc) / bump.rx;
  double st = detail::circ_offset(t, bump.tc, T) / bump.rt;
  if (sx * sx >= 1.0 || st * st >= 1.0) return 0.0;
  return bump.amplitude * detail::bump_profile(sx) * detail::bump_profile(st);
}

inline double eval_weight_a(const ScenarioSpec& spec, double x, double t) {
  double tm = detail::wrap_mod(t, spec.period_T);
  double v = spec.weight_a.base.eval(x, tm);
  for (const auto& bump : spec.weight_a.bumps) v += eval_bump(bump, x, tm, spec.period_T);
  return v;
}

inline double eval_field(const ScenarioSpec& spec, FieldId which, double x, double t) {
  double tm = detail::wrap_mod(t, spec.period_T);
  switch (which) {
    case FieldId::Diffusion: return spec.diffusion.eval(x, tm);
    case FieldId::Drift: return spec.drift.eval(x, tm);
    case FieldId::Potential: return spec.potential.eval(x, tm);
    case FieldId::WeightM: return spec.weight_m.eval(x, tm);
    case FieldId::WeightA: return eval_weight_a(spec, x, t);
  }
  throw ScenarioError("unknown field id");
}

inline FieldId field_id_from_name(const std::string& name) {
  if (name == "diffusion" || name == "d") return FieldId::Diffusion;
  if (name == "drift" || name == "b") return FieldId::Drift;
  if (name == "potential" || name == "c") return FieldId::Potential;
  if (name == "m") return FieldId::WeightM;
  if (name == "a") return FieldId::WeightA;
  throw ScenarioError("unknown field id '" + name + "'");
}

//! Checks the bump-list invariants: supports inside the open cylinder
//! (shifted periodically in t) and pairwise disjoint closures.
inline void check_bump_invariants(const ScenarioSpec& spec) {
  const double T = spec.period_T;
  for (size_t i = 0; i < spec.weight_a.bumps.size(); ++i) {
    const auto& b = spec.weight_a.bumps[i];
    if (b.rx <= 0 || b.rt <= 0) throw ScenarioError("bump half-widths must be positive");
    if (b.amplitude <= 0) throw ScenarioError("bump amplitude must be positive");
    if (b.xc - b.rx <= spec.x_lo || b.xc + b.rx >= spec.x_hi)
      throw ScenarioError("bump support leaves the open spatial domain");
    if (b.rt >= T / 2) throw ScenarioError("bump time half-width must be below T/2");
    for (size_t j = 0; j < i; ++j) {
      const auto& o = spec.weight_a.bumps[j];
      bool x_meet = std::fabs(b.xc - o.xc) <= b.rx + o.rx;
      bool t_meet = detail::circ_dist(b.tc, o.tc, T) <= b.rt + o.rt;
      if (x_meet && t_meet) throw ScenarioError("bump supports not disjoint");
    }
  }
}

// ---------------------------------------------------------------------------
// Scenario file format (UTF-8 key-value text, '#' comments):
//   domain = x_lo x_hi
//   period = T
//   grid = nx nt
//   diffusion|drift|potential|m = <expr>
//   a.base = <expr>
//   a.bump = x_c t_c r_x r_t A        (repeated)
//   bc.lo|bc.hi = dirichlet | robin <beta>
//   f = power <p>
// Unknown keys are rejected.
// ---------------------------------------------------------------------------

inline ScenarioSpec parse_scenario(const std::string& text) {
  ScenarioSpec spec;
  bool saw_domain = false, saw_period = false;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto notspace = [](unsigned char c) { return !std::isspace(c); };
    line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
    line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(), line.end());
    if (line.empty()) continue;

    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("missing '=' in '" + line + "'", lineno);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(), key.end());
    value.erase(value.begin(), std::find_if(value.begin(), value.end(), notspace));

    auto numbers = [&](int want) {
      std::istringstream vs(value);
      std::vector<double> out;
      double v;
      while (vs >> v) out.push_back(v);
      std::string trail;
      if (!(vs >> trail) && static_cast<int>(out.size()) == want) return out;
      throw ParseError("key '" + key + "' expects " + std::to_string(want) + " numbers", lineno);
    };

    if (key == "domain") {
      auto v = numbers(2);
      spec.x_lo = v[0];
      spec.x_hi = v[1];
      saw_domain = true;
    } else if (key == "period") {
      spec.period_T = numbers(1)[0];
      saw_period = true;
    } else if (key == "grid") {
      auto v = numbers(2);
      spec.default_nx = static_cast<int>(v[0]);
      spec.default_nt = static_cast<int>(v[1]);
      if (spec.default_nx < 3 || spec.default_nt < 4 || v[0] != spec.default_nx || v[1] != spec.default_nt)
        throw ParseError("grid expects integers nx >= 3, nt >= 4", lineno);
    } else if (key == "diffusion") {
      spec.diffusion = Expr::parse(value, lineno);
    } else if (key == "drift") {
      spec.drift = Expr::parse(value, lineno);
    } else if (key == "potential") {
      spec.potential = Expr::parse(value, lineno);
    } else if (key == "m") {
      spec.weight_m = Expr::parse(value, lineno);
    } else if (key == "a.base") {
      spec.weight_a.base = Expr::parse(value, lineno);
    } else if (key == "a.bump") {
      auto v = numbers(5);
      spec.weight_a.bumps.push_back({v[0], v[1], v[2], v[3], v[4]});
    } else if (key == "bc.lo" || key == "bc.hi") {
      BoundaryCondition bc;
      std::istringstream vs(value);
      std::string kind;
      vs >> kind;
      if (kind == "dirichlet") {
        bc.kind = BcKind::Dirichlet;
      } else if (kind == "robin") {
        bc.kind = BcKind::Robin;
        if (!(vs >> bc.beta)) throw ParseError("robin requires a beta value", lineno);
      } else {
        throw ParseError("bc expects 'dirichlet' or 'robin <beta>'", lineno);
      }
      (key == "bc.lo" ? spec.bc_lo : spec.bc_hi) = bc;
    } else if (key == "f") {
      std::istringstream vs(value);
      std::string kind;
      vs >> kind;
      if (kind != "power" || !(vs >> spec.nonlinearity.exponent))
        throw ParseError("f expects 'power <p>'", lineno);
      if (spec.nonlinearity.exponent < 1)
        throw ParseError("f power exponent must be >= 1", lineno);
    } else {
      throw ParseError("unknown key '" + key + "'", lineno);
    }
  }
  if (!saw_domain) throw ScenarioError("scenario missing 'domain'");
  if (!saw_period) throw ScenarioError("scenario missing 'period'");
  if (!(spec.x_lo < spec.x_hi)) throw ScenarioError("domain error: x_lo must be below x_hi");
  if (!(spec.period_T > 0)) throw ScenarioError("domain error: period must be positive");
  check_bump_invariants(spec);
  return spec;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string serialize_scenario(const ScenarioSpec& spec) {
  std::ostringstream out;
  out << "domain = " << format_double(spec.x_lo) << " " << format_double(spec.x_hi) << "\n";
  out << "period = " << format_double(spec.period_T) << "\n";
  out << "grid = " << spec.default_nx << " " << spec.default_nt << "\n";
  out << "diffusion = " << spec.diffusion.to_string() << "\n";
  out << "drift = " << spec.drift.to_string() << "\n";
  out << "potential = " << spec.potential.to_string() << "\n";
  out << "m = " << spec.weight_m.to_string() << "\n";
  out << "a.base = " << spec.weight_a.base.to_string() << "\n";
  for (const auto& b : spec.weight_a.bumps) {
    out << "a.bump = " << format_double(b.xc) << " " << format_double(b.tc) << " "
        << format_double(b.rx) << " " << format_double(b.rt) << " "
        << format_double(b.amplitude) << "\n";
  }
  auto bc_str = [](const BoundaryCondition& bc) {
    return bc.kind == BcKind::Dirichlet ? std::string("dirichlet")
                                        : "robin " + format_double(bc.beta);
  };
  out << "bc.lo = " << bc_str(spec.bc_lo) << "\n";
  out << "bc.hi = " << bc_str(spec.bc_hi) << "\n";
  out << "f = power " << format_double(spec.nonlinearity.exponent) << "\n";
  return out.str();
}

//! FNV-1a content digest used for provenance in reports.
inline std::string scenario_hash(const std::string& content) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : content) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Hypothesis validation
// ---------------------------------------------------------------------------

struct ValidationItem {
  std::string name;
  bool pass = false;
  std::string detail;
  bool required = true;  // informational items do not gate all_pass()
};

struct ValidationReport {
  std::vector<ValidationItem> items;
  bool eq19_boundary_positive = false;  // a > 0 on the spatial boundary, all t

  bool all_pass() const {
    return std::all_of(items.begin(), items.end(),
                       [](const auto& i) { return i.pass || !i.required; });
  }
  const ValidationItem* find(const std::string& name) const {
    for (const auto& i : items)
      if (i.name == name) return &i;
    return nullptr;
  }
};

//! Samples every hypothesis on an (nx, nt) grid including the boundary.
//! Failures are carried in the report, not thrown.
inline ValidationReport validate_hypotheses(const ScenarioSpec& spec, int nx, int nt) {
  ValidationReport rep;
  const double T = spec.period_T;
  std::vector<double> xs;
  xs.push_back(spec.x_lo);
  double h = (spec.x_hi - spec.x_lo) / (nx + 1);
  for (int k = 1; k <= nx; ++k) xs.push_back(spec.x_lo + k * h);
  xs.push_back(spec.x_hi);
  std::vector<double> ts;
  for (int j = 0; j <= nt; ++j) ts.push_back(T * j / nt);

  rep.items.push_back({"H_Omega", spec.x_lo < spec.x_hi, "bounded interval domain"});

  double min_d = std::numeric_limits<double>::infinity();
  bool finite = true;
  for (double t : ts)
    for (double x : xs) {
      for (FieldId f : {FieldId::Diffusion, FieldId::Drift, FieldId::Potential,
                        FieldId::WeightM, FieldId::WeightA}) {
        double v = eval_field(spec, f, x, t);
        if (!std::isfinite(v)) finite = false;
        if (f == FieldId::Diffusion) min_d = std::min(min_d, v);
      }
    }
  rep.items.push_back({"fields_finite", finite, "all coefficients finite on the sample grid"});
  rep.items.push_back({"H_L_ellipticity", min_d >= spec.mu_ellipticity,
                       "min d = " + format_double(min_d) + ", floor mu = " +
                           format_double(spec.mu_ellipticity)});

  bool periodic = true;
  for (double x : xs)
    for (FieldId f : {FieldId::Diffusion, FieldId::Drift, FieldId::Potential,
                      FieldId::WeightM, FieldId::WeightA})
      if (eval_field(spec, f, x, 0.0) != eval_field(spec, f, x, T)) periodic = false;
  rep.items.push_back({"T_periodicity", periodic,
                       "fields evaluated at (x, t mod T); holds by construction"});

  double min_a = std::numeric_limits<double>::infinity(), max_a = 0;
  for (double t : ts)
    for (double x : xs) {
      double v = eval_weight_a(spec, x, t);
      min_a = std::min(min_a, v);
      max_a = std::max(max_a, v);
    }
  rep.items.push_back({"H_a", min_a >= -1e-14 && max_a > 0,
                       "min a = " + format_double(min_a) + ", max a = " + format_double(max_a)});

  // H_f on a sample ladder; the unbounded limit is replaced by a finite
  // surrogate bound, recorded as such.
  const auto& f = spec.nonlinearity;
  bool f_ok = std::fabs(f(0.0)) == 0.0;
  double prev = 0.0;
  double ladder[] = {1e-2, 1e-1, 0.5, 1.0, 10.0, 1e2, 1e4, 1e6};
  for (double u : ladder) {
    double v = f(u);
    if (!(v > prev)) f_ok = false;
    prev = v;
  }
  const double f_large_bound = 1e5;
  bool f_grows = f(1e6) > f_large_bound;
  rep.items.push_back({"H_f", f_ok && f_grows,
                       "f(0)=0, strictly increasing on ladder; f(1e6) > " +
                           format_double(f_large_bound) +
                           " (finite surrogate for f -> infinity)"});

  bool eq19 = true;
  for (double t : ts)
    if (eval_weight_a(spec, spec.x_lo, t) <= 0 || eval_weight_a(spec, spec.x_hi, t) <= 0)
      eq19 = false;
  rep.eq19_boundary_positive = eq19;
  rep.items.push_back({"boundary_weight_positive", eq19,
                       "a > 0 at boundary sample nodes (needed for zero-set work)", false});
  return rep;
}

}  // namespace pplog

#endif
