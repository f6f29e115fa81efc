// Copyright pplog contributors
// SPDX-License-Identifier: Apache-2.0
//! \file pplog/cli.hpp
//! Command-line surface: eig, curve, tau, solve, verdict, perturb, suite.
//! Exit codes: 0 success, 1 input error, 2 numerical failure, 3 suite
//! failures present.

#ifndef PPLOG_CLI_HPP
#define PPLOG_CLI_HPP

#include <atomic>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "pplog/logistic.hpp"
#include "pplog/report.hpp"
#include "pplog/zeroset.hpp"

namespace pplog {

namespace cli {

struct CommonArgs {
  std::string scenario_path;
  std::string out_dir = ".";
  int nx = 0, nt = 0;  // 0: use the scenario's default resolution
  double lambda = 0, gamma = 0;
  std::string lambda_grid, gamma_ramp, n_list;
  int threads = 1;
  bool raster = false;
};

struct LoadedScenario {
  ScenarioSpec spec;
  Mesh mesh;
  std::string hash;
};

inline LoadedScenario load_scenario(const CommonArgs& args) {
  std::string text = read_file(args.scenario_path);
  LoadedScenario ls;
  ls.spec = parse_scenario(text);
  ls.hash = scenario_hash(text);
  int nx = args.nx > 0 ? args.nx : ls.spec.default_nx;
  int nt = args.nt > 0 ? args.nt : ls.spec.default_nt;
  ls.mesh = build_mesh(ls.spec, nx, nt);
  return ls;
}

//! "a:b:k" - k equally spaced values from a to b.
inline std::vector<double> parse_grid_spec(const std::string& s) {
  double a, b;
  int k;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d", &a, &b, &k) != 3 || k < 1)
    throw std::invalid_argument("grid spec must be a:b:k with k >= 1");
  std::vector<double> out;
  for (int i = 0; i < k; ++i)
    out.push_back(k == 1 ? a : a + (b - a) * i / (k - 1));
  return out;
}

//! "g0:ratio:count" - geometric ramp.
inline std::vector<double> parse_ramp_spec(const std::string& s) {
  double g0, ratio;
  int count;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d", &g0, &ratio, &count) != 3 || count < 1)
    throw std::invalid_argument("ramp spec must be g0:ratio:count with count >= 1");
  std::vector<double> out;
  double g = g0;
  for (int i = 0; i < count; ++i, g *= ratio) out.push_back(g);
  return out;
}

inline void collect_operator_warnings(const MonodromyOperator& op, RunReport& rep) {
  if (op.upwind_rows() > 0)
    rep.warn("upwind downgrade in " + std::to_string(op.upwind_rows()) + " rows");
  if (!op.m_matrix_steps())
    rep.warn("step matrices are not M-matrices; positivity not guaranteed");
}

inline void finish(RunReport& rep, const std::filesystem::path& out,
                   std::chrono::steady_clock::time_point t0) {
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_file(out / "run_report.json", rep.to_json().dump(2) + "\n");
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
}

inline std::string eigenfunction_csv(const ScenarioSpec& spec, const Mesh& mesh,
                                     const EigenResult& r) {
  CsvWriter csv{"x", "t", "phi"};
  for (int j = 0; j <= mesh.nt; ++j) {
    const double* slice = &r.phi[static_cast<size_t>(j) * mesh.nx];
    std::vector<double> sv(slice, slice + mesh.nx);
    auto [blo, bhi] = reconstruct_boundary(spec, mesh, sv);
    csv.cell(mesh.x_lo).cell(mesh.times[j]).cell(spec.bc_lo.kind == BcKind::Dirichlet ? 0.0 : blo);
    csv.endrow();
    for (int k = 0; k < mesh.nx; ++k) {
      csv.cell(mesh.nodes[k]).cell(mesh.times[j]).cell(sv[k]);
      csv.endrow();
    }
    csv.cell(mesh.x_hi).cell(mesh.times[j]).cell(spec.bc_hi.kind == BcKind::Dirichlet ? 0.0 : bhi);
    csv.endrow();
  }
  return csv.str();
}

// ---------------------------------------------------------------------------
// Commands (exit code semantics per the interface contract)
// ---------------------------------------------------------------------------

inline int cmd_eig(const CommonArgs& args) {
  auto t0 = std::chrono::steady_clock::now();
  std::filesystem::path out(args.out_dir);
  std::filesystem::create_directories(out);
  LoadedScenario ls;
  try {
    ls = load_scenario(args);
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  }
  RunReport rep;
  rep.command = "eig";
  rep.scenario_hash = ls.hash;
  rep.nx = ls.mesh.nx;
  rep.nt = ls.mesh.nt;
  try {
    if (args.gamma < 0) rep.warn("negative gamma requested");
    SigmaEvaluator ev(ls.spec, ls.mesh);
    collect_operator_warnings(ev.make_operator(args.lambda, args.gamma), rep);
    EigenResult r = ev.eval(args.lambda, args.gamma);
    CsvWriter csv{"lambda", "gamma", "sigma", "rho", "iterations", "residual"};
    csv.cell(args.lambda).cell(args.gamma).cell(r.sigma).cell(r.rho).cell(r.iterations)
        .cell(r.residual);
    csv.endrow();
    write_file(out / "eigen.csv", csv.str());
    write_file(out / "eigenfunction.csv", eigenfunction_csv(ls.spec, ls.mesh, r));
    rep.outputs = {"eigen.csv", "eigenfunction.csv"};
    finish(rep, out, t0);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    rep.warn(e.what());
    finish(rep, out, t0);
    return 2;
  }
}

inline int cmd_curve(const CommonArgs& args) {
  auto t0 = std::chrono::steady_clock::now();
  std::filesystem::path out(args.out_dir);
  std::filesystem::create_directories(out);
  LoadedScenario ls;
  std::vector<double> lambdas, gammas;
  try {
    ls = load_scenario(args);
    lambdas = args.lambda_grid.empty() ? std::vector<double>{args.lambda}
                                       : parse_grid_spec(args.lambda_grid);
    gammas = args.gamma_ramp.empty() ? default_gamma_ramp()
                                     : parse_ramp_spec(args.gamma_ramp);
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  }
  RunReport rep;
  rep.command = "curve";
  rep.scenario_hash = ls.hash;
  rep.nx = ls.mesh.nx;
  rep.nt = ls.mesh.nt;
  try {
    for (size_t i = 0; i + 1 < gammas.size(); ++i)
      if (std::fabs(gammas[i + 1] - 2.0 * gammas[i]) > 1e-9 * gammas[i + 1]) {
        rep.warn("gamma ramp ratio is not 2; classification slope thresholds assume doubling");
        break;
      }
    SigmaEvaluator ev(ls.spec, ls.mesh);
    collect_operator_warnings(ev.make_operator(lambdas.front(), gammas.front()), rep);
    SigmaCurve curve =
        compute_sigma_curve(ev, lambdas, gammas, true, {}, std::max(1, args.threads));
    CsvWriter csv{"lambda", "gamma", "sigma"};
    for (size_t il = 0; il < lambdas.size(); ++il)
      for (size_t ig = 0; ig < gammas.size(); ++ig) {
        csv.cell(lambdas[il]).cell(gammas[ig]).cell(curve.value(il, ig));
        csv.endrow();
      }
    write_file(out / "sigma_curve.csv", csv.str());
    std::ostringstream jl;
    for (size_t il = 0; il < lambdas.size(); ++il) {
      const auto& cls = curve.classifications[il];
      nlohmann::json j;
      j["lambda"] = lambdas[il];
      j["class"] = cls.kind_name();
      if (cls.kind == SigmaClassification::Kind::Finite)
        j["plateau_or_slope"] = cls.plateau;
      else if (cls.kind == SigmaClassification::Kind::Divergent)
        j["plateau_or_slope"] = cls.slope_per_doubling;
      else {
        j["plateau_or_slope"] = nullptr;
        rep.warn("inconclusive classification at lambda = " + format_double(lambdas[il]));
      }
      jl << j.dump() << "\n";
    }
    write_file(out / "classification.jsonl", jl.str());
    if (curve.max_monotonicity_violation > 1e-7)
      rep.warn("gamma-monotonicity violated by " +
               format_double(curve.max_monotonicity_violation));
    rep.outputs = {"sigma_curve.csv", "classification.jsonl"};
    finish(rep, out, t0);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    rep.warn(e.what());
    finish(rep, out, t0);
    return 2;
  }
}

inline int cmd_tau(const CommonArgs& args) {
  auto t0 = std::chrono::steady_clock::now();
  std::filesystem::path out(args.out_dir);
  std::filesystem::create_directories(out);
  LoadedScenario ls;
  try {
    ls = load_scenario(args);
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  }
  RunReport rep;
  rep.command = "tau";
  rep.scenario_hash = ls.hash;
  rep.nx = ls.mesh.nx;
  rep.nt = ls.mesh.nt;
  try {
    ZeroSetGraph g = build_zero_set_graph(ls.spec, ls.mesh);
    PathCertificate cert = tau_path_exists(g);
    nlohmann::json j;
    j["verdict"] = cert.exists ? "path_exists" : "no_path";
    if (cert.exists) j["witness"] = cert.witness;
    else {
      j["cut"] = cert.cut_layers;
      j["wrap_failure"] = cert.wrap_failure;
    }
    j["eps_zero"] = g.eps_zero;
    write_file(out / "certificate.json", j.dump(2) + "\n");
    rep.outputs = {"certificate.json"};
    if (args.raster) {
      auto raster = zero_set_raster(g);
      CsvWriter csv{"layer", "cells"};
      for (int jj = 0; jj < g.nt; ++jj) {
        std::string cells;
        for (int v : raster[jj]) cells += v ? '1' : '0';
        csv.cell(jj).cell(cells);
        csv.endrow();
      }
      write_file(out / "zeroset.csv", csv.str());
      rep.outputs.push_back("zeroset.csv");
    }
    finish(rep, out, t0);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    rep.warn(e.what());
    finish(rep, out, t0);
    return 2;
  }
}

inline std::string solution_csv(const ScenarioSpec& spec, const Mesh& mesh,
                                const PeriodicSolution& sol) {
  CsvWriter csv{"x", "t", "u"};
  for (int j = 0; j <= mesh.nt; ++j) {
    const double* slice = &sol.u[static_cast<size_t>(j) * mesh.nx];
    std::vector<double> sv(slice, slice + mesh.nx);
    auto [blo, bhi] = reconstruct_boundary(spec, mesh, sv);
    csv.cell(mesh.x_lo).cell(mesh.times[j]).cell(spec.bc_lo.kind == BcKind::Dirichlet ? 0.0 : blo);
    csv.endrow();
    for (int k = 0; k < mesh.nx; ++k) {
      csv.cell(mesh.nodes[k]).cell(mesh.times[j]).cell(sv[k]);
      csv.endrow();
    }
    csv.cell(mesh.x_hi).cell(mesh.times[j]).cell(spec.bc_hi.kind == BcKind::Dirichlet ? 0.0 : bhi);
    csv.endrow();
  }
  return csv.str();
}

inline int cmd_solve(const CommonArgs& args) {
  auto t0 = std::chrono::steady_clock::now();
  std::filesystem::path out(args.out_dir);
  std::filesystem::create_directories(out);
  LoadedScenario ls;
  try {
    ls = load_scenario(args);
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  }
  RunReport rep;
  rep.command = "solve";
  rep.scenario_hash = ls.hash;
  rep.nx = ls.mesh.nx;
  rep.nt = ls.mesh.nt;
  try {
    std::vector<double> u0(ls.mesh.nx, 1.0);
    PeriodicSolution sol = solve_periodic_logistic(ls.spec, ls.mesh, args.lambda, u0);
    write_file(out / "solution.csv", solution_csv(ls.spec, ls.mesh, sol));
    rep.outputs = {"solution.csv"};
    if (sol.outcome == PeriodicSolution::Outcome::GrewUnbounded)
      rep.warn("solution grew past the growth bound (no bounded positive periodic state)");
    if (sol.outcome == PeriodicSolution::Outcome::Stagnated)
      rep.warn("period residual stagnated above tolerance");
    finish(rep, out, t0);
    if (!sol.converged && sol.outcome == PeriodicSolution::Outcome::Unresolved) {
      std::cerr << "numerical failure: marching did not converge (residual "
                << format_double(sol.residual) << ")\n";
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    rep.warn(e.what());
    finish(rep, out, t0);
    return 2;
  }
}

inline int cmd_verdict(const CommonArgs& args) {
  auto t0 = std::chrono::steady_clock::now();
  std::filesystem::path out(args.out_dir);
  std::filesystem::create_directories(out);
  LoadedScenario ls;
  try {
    ls = load_scenario(args);
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  }
  RunReport rep;
  rep.command = "verdict";
  rep.scenario_hash = ls.hash;
  rep.nx = ls.mesh.nx;
  rep.nt = ls.mesh.nt;
  try {
    ExistenceVerdict v = existence_verdict(ls.spec, ls.mesh, args.lambda);
    nlohmann::json j;
    j["lambda"] = args.lambda;
    j["sigma0"] = v.sigma_zero;
    j["class"] = v.positive_weight_shortcut ? "positive_weight"
                                            : v.classification.kind_name();
    j["predicted"] = ExistenceVerdict::name(v.predicted);
    j["observed"] = ExistenceVerdict::name(v.observed);
    j["agree"] = v.agree;
    write_file(out / "verdict.json", j.dump(2) + "\n");
    rep.outputs = {"verdict.json"};
    if (v.predicted == ExistenceVerdict::Predicted::Inconclusive)
      rep.warn("inconclusive prediction (margins too small)");
    finish(rep, out, t0);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    rep.warn(e.what());
    finish(rep, out, t0);
    return 2;
  }
}

inline int cmd_perturb(const CommonArgs& args) {
  auto t0 = std::chrono::steady_clock::now();
  std::filesystem::path out(args.out_dir);
  std::filesystem::create_directories(out);
  LoadedScenario ls;
  std::vector<int> n_list;
  try {
    ls = load_scenario(args);
    std::istringstream ss(args.n_list);
    int n;
    while (ss >> n) n_list.push_back(n);
    if (n_list.empty()) throw std::invalid_argument("--n-list is required (e.g. \"4 8 16\")");
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  }
  RunReport rep;
  rep.command = "perturb";
  rep.scenario_hash = ls.hash;
  rep.nx = ls.mesh.nx;
  rep.nt = ls.mesh.nt;
  try {
    SigmaSequence seq = sigma_sequence(ls.spec, ls.mesh, args.lambda, args.gamma, n_list);
    CsvWriter csv{"n", "sigma_n"};
    for (size_t i = 0; i < seq.n_list.size(); ++i) {
      csv.cell(seq.n_list[i]).cell(seq.sigma_n[i]);
      csv.endrow();
    }
    csv.cell(0).cell(seq.sigma);  // n = 0 row: the undilated domain
    csv.endrow();
    write_file(out / "perturb.csv", csv.str());
    rep.outputs = {"perturb.csv"};
    finish(rep, out, t0);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    rep.warn(e.what());
    finish(rep, out, t0);
    return 2;
  }
}

//! Cross-module dichotomy battery over every scenario file in a directory:
//! the tau-path certificate and the Sigma(lambda,inf) classifier must agree
//! (path_exists <=> finite). One pass/fail line per scenario.
inline int cmd_suite(const CommonArgs& args) {
  auto t0 = std::chrono::steady_clock::now();
  std::filesystem::path out(args.out_dir);
  std::filesystem::create_directories(out);
  std::vector<std::filesystem::path> files;
  try {
    for (const auto& entry : std::filesystem::directory_iterator(args.scenario_path))
      if (entry.path().extension() == ".scn") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::invalid_argument("no .scn files in " + args.scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  }
  RunReport rep;
  rep.command = "suite";
  rep.scenario_hash = "";
  struct SuiteRow {
    std::string name, hash, verdict, cls;
    bool consistent = false;
  };
  std::vector<SuiteRow> results(files.size());
  auto run_one = [&](size_t i) {
    std::string text = read_file(files[i]);
    ScenarioSpec spec = parse_scenario(text);
    int nx = args.nx > 0 ? args.nx : spec.default_nx;
    int nt = args.nt > 0 ? args.nt : spec.default_nt;
    Mesh mesh = build_mesh(spec, nx, nt);
    PathCertificate cert = tau_path_exists(build_zero_set_graph(spec, mesh));
    SigmaEvaluator ev(spec, mesh);
    SigmaClassification cls = classify_sigma_infinity(ev, args.lambda);
    SuiteRow& row = results[i];
    row.name = files[i].filename().string();
    row.hash = scenario_hash(text);
    row.verdict = cert.exists ? "path_exists" : "no_path";
    row.cls = cls.kind_name();
    row.consistent =
        (cert.exists && cls.kind == SigmaClassification::Kind::Finite) ||
        (!cert.exists && cls.kind == SigmaClassification::Kind::Divergent);
  };
  if (args.threads > 1 && files.size() > 1) {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    int nw = std::min<int>(args.threads, static_cast<int>(files.size()));
    for (int w = 0; w < nw; ++w)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1))
          run_one(i);
      });
    for (auto& th : pool) th.join();
  } else {
    for (size_t i = 0; i < files.size(); ++i) run_one(i);
  }
  int failures = 0;
  CsvWriter csv{"scenario", "hash", "tau_verdict", "classification", "consistent"};
  for (const SuiteRow& row : results) {
    if (!row.consistent) ++failures;
    csv.cell(row.name).cell(row.hash).cell(row.verdict).cell(row.cls)
        .cell(row.consistent ? "pass" : "FAIL");
    csv.endrow();
    std::cout << (row.consistent ? "[PASS] " : "[FAIL] ") << row.name
              << ": tau=" << row.verdict << " class=" << row.cls << "\n";
  }
  write_file(out / "suite.csv", csv.str());
  rep.outputs = {"suite.csv"};
  if (failures) rep.warn(std::to_string(failures) + " suite failures");
  finish(rep, out, t0);
  return failures ? 3 : 0;
}

}  // namespace cli

inline int cli_main(int argc, char** argv) {
  CLI::App app{"periodic-parabolic eigenvalue and degenerate logistic toolkit"};
  app.require_subcommand(1);
  cli::CommonArgs args;

  auto add_common = [&](CLI::App* sub, bool needs_scenario = true) {
    if (needs_scenario)
      sub->add_option("--scenario", args.scenario_path, "scenario file")->required();
    sub->add_option("--nx", args.nx, "interior nodes (default: scenario grid)");
    sub->add_option("--nt", args.nt, "time steps per period (default: scenario grid)");
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--threads", args.threads, "worker threads for sweeps");
  };

  CLI::App* eig = app.add_subcommand("eig", "principal eigenpair at (lambda, gamma)");
  add_common(eig);
  eig->add_option("--lambda", args.lambda, "weight multiplier");
  eig->add_option("--gamma", args.gamma, "degenerate weight multiplier");

  CLI::App* curve = app.add_subcommand("curve", "Sigma(lambda,gamma) sweep + classification");
  add_common(curve);
  curve->add_option("--lambda", args.lambda, "single lambda if no grid");
  curve->add_option("--lambda-grid", args.lambda_grid, "a:b:k");
  curve->add_option("--gamma-ramp", args.gamma_ramp, "g0:ratio:count");

  CLI::App* tau = app.add_subcommand("tau", "tau-path certificate of the vanishing set");
  add_common(tau);
  tau->add_flag("--raster", args.raster, "also dump the 0/1 zero-set raster");

  CLI::App* solve = app.add_subcommand("solve", "periodic logistic solve at lambda");
  add_common(solve);
  solve->add_option("--lambda", args.lambda, "weight multiplier")->required();

  CLI::App* verdict = app.add_subcommand("verdict", "existence verdict at lambda");
  add_common(verdict);
  verdict->add_option("--lambda", args.lambda, "weight multiplier")->required();

  CLI::App* perturb = app.add_subcommand("perturb", "dilated-domain sigma sequence");
  add_common(perturb);
  perturb->add_option("--lambda", args.lambda, "weight multiplier");
  perturb->add_option("--gamma", args.gamma, "degenerate weight multiplier");
  perturb->add_option("--n-list", args.n_list, "dilation indices, e.g. \"4 8 16\"")->required();

  CLI::App* suite = app.add_subcommand("suite", "dichotomy battery over a scenario directory");
  suite->add_option("--scenario", args.scenario_path, "scenario directory")->required();
  suite->add_option("--nx", args.nx, "override interior nodes");
  suite->add_option("--nt", args.nt, "override time steps");
  suite->add_option("--out", args.out_dir, "output directory");
  suite->add_option("--lambda", args.lambda, "lambda for the classifier");
  suite->add_option("--threads", args.threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 1 : 0;
  }

  if (eig->parsed()) return cli::cmd_eig(args);
  if (curve->parsed()) return cli::cmd_curve(args);
  if (tau->parsed()) return cli::cmd_tau(args);
  if (solve->parsed()) return cli::cmd_solve(args);
  if (verdict->parsed()) return cli::cmd_verdict(args);
  if (perturb->parsed()) return cli::cmd_perturb(args);
  if (suite->parsed()) return cli::cmd_suite(args);
  return 1;
}

}  // namespace pplog

#endif
