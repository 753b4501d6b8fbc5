#pragma once

/// @file experiment.hpp
/// @brief Run pipeline (solve → fit → rate checks → boundary set → dominance),
/// artifact persistence, dry-run validation and parameter sweeps.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "blowup/analysis.hpp"
#include "blowup/config.hpp"
#include "blowup/error.hpp"
#include "blowup/io.hpp"
#include "blowup/model.hpp"
#include "blowup/solver.hpp"
#include "blowup/supersolution.hpp"

namespace blowup {

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailed = 2;

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Inconclusive;
  std::string detail;
};

struct RunArtifacts {
  std::string trajectory_path;
  std::string report_path;
  std::string config_path;
  Report report;
  std::vector<CheckResult> checks;
  int exit_code = kExitPass;
  std::optional<double> T_hat;
  std::optional<double> alpha_hat;
  std::optional<double> beta_hat;
  std::string ansatz;
};

namespace detail {

inline int exit_code_for(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks) {
    if (c.status == CheckStatus::Fail) return kExitCheckFailed;
  }
  return kExitPass;
}

inline void echo_into_report(Report& rep, const std::string& echo) {
  std::istringstream in(echo);
  std::string line, section;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.find(']') - 1);
      continue;
    }
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    rep.set("config." + section + "." + line.substr(0, eq), line.substr(eq + 3));
  }
}

}  // namespace detail

/// Executes the full pipeline in memory (no files written).
inline RunArtifacts analyze_run(const ExperimentConfig& cfg, const Trajectory& traj) {
  RunArtifacts art;
  Report& rep = art.report;
  const auto& prm = cfg.problem;
  const auto& an = cfg.analysis;
  const auto& stop = traj.stop;

  rep.set("run.reason", to_string(stop.reason));
  rep.set("run.t_stop", stop.t_stop);
  rep.set("run.steps", stop.steps);
  rep.set("run.samples", traj.samples.size());
  rep.set("run.arg_u", stop.arg_u);
  rep.set("run.arg_v", stop.arg_v);
  rep.set("run.nonfinite_guard", stop.nonfinite_guard);
  rep.set("run.M_final", traj.samples.back().M);
  rep.set("run.N_final", traj.samples.back().Nv);

  const auto ansatz = rate_ansatz(prm);
  art.ansatz = ansatz.tag();
  rep.set("rate.ansatz", ansatz.tag());
  rep.set("rate.alpha", ansatz.k_u);
  rep.set("rate.beta", ansatz.k_v);

  auto add = [&](const std::string& name, CheckStatus s, const std::string& detail = "") {
    art.checks.push_back({name, s, detail});
  };

  const auto mono = monotonicity_check(traj);
  rep.set("monotonicity.positivity", mono.positivity);
  rep.set("monotonicity.radial", mono.radial);
  rep.set("monotonicity.temporal", mono.temporal);
  rep.set("monotonicity.argmax_boundary", mono.argmax_boundary);
  rep.set("monotonicity.worst_radial", mono.worst_radial);
  rep.set("monotonicity.worst_temporal", mono.worst_temporal);
  add("monotonicity", mono.passed() ? CheckStatus::Pass : CheckStatus::Fail);

  const bool blew_up = stop.reason == StopReason::BlowupThreshold;
  if (blew_up) {
    const double lo = std::min(stop.arg_u, stop.arg_v);
    const bool simultaneous = lo > cfg.solver.u_stop / 4.0;
    rep.set("run.simultaneous", simultaneous);
    add("simultaneity", simultaneous ? CheckStatus::Pass : CheckStatus::Fail);
  } else {
    add("simultaneity", CheckStatus::Inconclusive, "no blow-up reached");
  }

  std::optional<BlowupFit> fit;
  if (blew_up) {
    try {
      fit = estimate_blowup_time(traj, prm, an.fit);
      art.T_hat = fit->T_hat;
      rep.set("blowup.T_hat", fit->T_hat);
      rep.set("blowup.T_minus_t_stop", fit->T_hat - stop.t_stop);
      rep.set("blowup.C1_hat", fit->C1_hat);
      rep.set("blowup.C2_hat", fit->C2_hat);
      rep.set("blowup.residual", fit->residual);
      rep.set("blowup.t_lo", fit->t_lo);
      rep.set("blowup.t_hi", fit->t_hi);
      rep.set("blowup.window_samples", fit->window_u.size());
      add("fit", CheckStatus::Pass);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::FitFailed) throw;
      rep.set("blowup.error", e.what());
      add("fit", CheckStatus::Fail, std::string("under-resolved: ") + e.what());
    }
  } else {
    add("fit", CheckStatus::Inconclusive, "no blow-up reached");
  }

  std::optional<RateBoundReport> bound;
  if (fit) {
    try {
      const auto rf = fit_rate(traj, prm, fit->T_hat, an.fit);
      art.alpha_hat = rf.alpha_hat;
      art.beta_hat = rf.beta_hat;
      rep.set("rate.alpha_hat", rf.alpha_hat);
      rep.set("rate.beta_hat", rf.beta_hat);
      const bool ok = rf.alpha_hat <= an.exponent_slack * ansatz.k_u &&
                      rf.beta_hat <= an.exponent_slack * ansatz.k_v;
      add("rate_exponent", ok ? CheckStatus::Pass : CheckStatus::Fail);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::FitFailed) throw;
      add("rate_exponent", CheckStatus::Fail, e.what());
    }
    bound = rate_bound_check(traj, prm, fit->T_hat, an.fit);
    rep.set("rate.sup_u", bound->rate_sup_u);
    rep.set("rate.sup_v", bound->rate_sup_v);
    rep.set("rate.increase_u", bound->increase_u);
    rep.set("rate.increase_v", bound->increase_v);
    rep.set("rate.variation_u", bound->variation_u);
    rep.set("rate.variation_v", bound->variation_v);
    rep.set("rate.tail_samples", bound->tail_samples_u);
    add("rate_bound", bound->passed ? CheckStatus::Pass : CheckStatus::Fail);
  } else {
    add("rate_exponent", CheckStatus::Inconclusive);
    add("rate_bound", CheckStatus::Inconclusive);
  }

  const auto bs = boundary_set_check(traj, prm, an.a, fit);
  rep.set("boundary.a", bs.a);
  rep.set("boundary.interior_sup_u", bs.interior_sup_u);
  rep.set("boundary.interior_sup_v", bs.interior_sup_v);
  rep.set("boundary.ratio_u", bs.ratio_u);
  rep.set("boundary.ratio_v", bs.ratio_v);
  rep.set("boundary.final_decade_growth_u", bs.final_decade_growth_u);
  rep.set("boundary.final_decade_growth_v", bs.final_decade_growth_v);
  rep.set("boundary.envelope_u", bs.envelope_u);
  rep.set("boundary.envelope_v", bs.envelope_v);
  rep.set("boundary.at_threshold", bs.boundary_at_threshold);
  add("boundary_set", bs.status);

  if (an.dominance && fit && bound) {
    DominanceOptions dopt;
    dopt.max_radius = an.dominance_radius;
    const auto dom = dominance_check(traj, prm, fit->T_hat, bound->rate_sup_u, bound->rate_sup_v,
                                     ansatz.k_u, ansatz.k_v, dopt);
    rep.set("dominance.C1_u", dom.u.C1);
    rep.set("dominance.C2_u", dom.u.C2);
    rep.set("dominance.margin_u", dom.u.min_margin);
    rep.set("dominance.ratio_u", dom.u.min_ratio);
    rep.set("dominance.C1_v", dom.v.C1);
    rep.set("dominance.margin_v", dom.v.min_margin);
    rep.set("dominance.ratio_v", dom.v.min_ratio);
    rep.set("dominance.states", dom.states);
    rep.set("dominance.violated", dom.violated);
    add("dominance", dom.passed ? CheckStatus::Pass : CheckStatus::Fail);
  } else if (an.dominance) {
    add("dominance", CheckStatus::Inconclusive);
  }

  for (const auto& c : art.checks) {
    rep.set("check." + c.name, to_string(c.status));
    if (!c.detail.empty()) rep.set("check." + c.name + ".detail", c.detail);
  }
  art.exit_code = detail::exit_code_for(art.checks);
  rep.set("status", art.exit_code == kExitPass ? "pass" : "fail");
  detail::echo_into_report(rep, echo_config(cfg));
  return art;
}

/// Runs, analyses and writes trajectory.csv, report.txt and config.ini into
/// `out_dir` (created if needed).
inline RunArtifacts run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const auto traj = run(cfg.problem, cfg.solver);
  auto art = analyze_run(cfg, traj);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::ConfigError, "io: cannot create '" + out_dir + "': " + ec.message());
  art.trajectory_path = (fs::path(out_dir) / "trajectory.csv").string();
  art.report_path = (fs::path(out_dir) / "report.txt").string();
  art.config_path = (fs::path(out_dir) / "config.ini").string();
  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  write_file(art.trajectory_path, csv.str());
  std::ostringstream rep;
  art.report.write(rep);
  write_file(art.report_path, rep.str());
  write_file(art.config_path, echo_config(cfg));
  return art;
}

inline RunArtifacts run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, cfg.output_dir);
}

/// Dry-run: parameter, solver and initial-data checks without integrating.
inline Report validate_experiment(const ExperimentConfig& cfg) {
  Report rep;
  validate(cfg.problem);
  validate(cfg.solver, cfg.problem);
  const auto grid = make_grid(cfg.problem.R, cfg.solver.N);
  const auto v = validate_initial_data(cfg.problem, grid);
  for (const auto& c : v.conditions) {
    rep.set("initial." + c.name, c.passed ? "pass" : "fail");
    if (!c.passed) {
      rep.set("initial." + c.name + ".worst_node", c.worst_node);
      rep.set("initial." + c.name + ".worst_value", c.worst_value);
    }
  }
  rep.set("initial.compat_mismatch_u", v.compat_mismatch_u);
  rep.set("initial.compat_mismatch_v", v.compat_mismatch_v);
  if (cfg.problem.p * cfg.problem.q > 1.0) {
    const auto ex = rate_exponents(cfg.problem.p, cfg.problem.q);
    rep.set("rate.alpha", ex.alpha);
    rep.set("rate.beta", ex.beta);
  }
  rep.set("grid.dr", grid.dr());
  rep.set("status", v.passed ? "pass" : "fail");
  return rep;
}

struct SweepRow {
  std::size_t id = 0;
  FluxFamily flux = FluxFamily::ExpPower;
  double p = 0.0;
  double q = 0.0;
  std::size_t N = 0;
  std::string ansatz;
  std::optional<double> T_hat;
  std::optional<double> alpha_hat;
  std::optional<double> beta_hat;
  int exit_code = kExitError;
  std::string error;
};

/// Cartesian product flux × p × q × N (missing axes use the base config).
inline std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& base) {
  const auto& ax = base.sweep;
  const auto fluxes = ax.flux.empty() ? std::vector<FluxFamily>{base.problem.flux} : ax.flux;
  const auto ps = ax.p.empty() ? std::vector<double>{base.problem.p} : ax.p;
  const auto qs = ax.q.empty() ? std::vector<double>{base.problem.q} : ax.q;
  const auto Ns = ax.N.empty() ? std::vector<std::size_t>{base.solver.N} : ax.N;
  const std::size_t total = fluxes.size() * ps.size() * qs.size() * Ns.size();
  if (total > ax.max_runs) {
    throw Error(ErrorCode::ConfigError, "sweep has " + std::to_string(total) +
                                            " runs, above max_runs=" + std::to_string(ax.max_runs));
  }
  std::vector<ExperimentConfig> out;
  for (auto f : fluxes)
    for (double p : ps)
      for (double q : qs)
        for (std::size_t N : Ns) {
          ExperimentConfig c = base;
          c.problem.flux = f;
          c.problem.p = p;
          c.problem.q = q;
          c.solver.N = N;
          c.sweep = {};
          out.push_back(std::move(c));
        }
  return out;
}

inline constexpr const char* kSweepHeader =
    "id,flux,p,q,N,ansatz,T_hat,alpha_hat,beta_hat,exit_code,pass,error";

inline std::string sweep_table(const std::vector<SweepRow>& rows) {
  auto opt = [](const std::optional<double>& x) { return x ? format_double(*x) : std::string(); };
  std::ostringstream o;
  o << kSweepHeader << '\n';
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    o << r.id << ',' << to_string(r.flux) << ',' << format_double(r.p) << ',' << format_double(r.q)
      << ',' << r.N << ',' << r.ansatz << ',' << opt(r.T_hat) << ',' << opt(r.alpha_hat) << ','
      << opt(r.beta_hat) << ',' << r.exit_code << ',' << (r.exit_code == kExitPass ? "true" : "false")
      << ',' << err << '\n';
  }
  return o.str();
}

/// Runs every sweep point (up to max_parallel at a time) into
/// out_dir/run_XXX/ and writes out_dir/summary.csv. Rows are ordered by
/// sweep index, so the table does not depend on the parallelism degree.
inline std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::string& out_dir,
                                   std::size_t max_parallel = 1, std::ostream* log = nullptr) {
  if (!base.sweep.any()) throw Error(ErrorCode::ConfigError, "no sweep axes given");
  const auto runs = expand_sweep(base);
  std::vector<SweepRow> rows(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      const auto& c = runs[i];
      SweepRow& row = rows[i];
      row.id = i;
      row.flux = c.problem.flux;
      row.p = c.problem.p;
      row.q = c.problem.q;
      row.N = c.solver.N;
      char name[32];
      std::snprintf(name, sizeof name, "run_%03zu", i);
      try {
        const auto art = run_experiment(c, (std::filesystem::path(out_dir) / name).string());
        row.ansatz = art.ansatz;
        row.T_hat = art.T_hat;
        row.alpha_hat = art.alpha_hat;
        row.beta_hat = art.beta_hat;
        row.exit_code = art.exit_code;
      } catch (const std::exception& e) {
        row.exit_code = kExitError;
        row.error = e.what();
      }
    }
  };
  const std::size_t k = std::max<std::size_t>(1, std::min(max_parallel, runs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < k; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::filesystem::create_directories(out_dir);
  write_file((std::filesystem::path(out_dir) / "summary.csv").string(), sweep_table(rows));
  if (log) {
    for (const auto& r : rows) {
      *log << "run_" << r.id << " " << to_string(r.flux) << " p=" << format_double(r.p)
           << " q=" << format_double(r.q) << " N=" << r.N << " exit=" << r.exit_code
           << (r.error.empty() ? "" : " error: " + r.error) << '\n';
    }
  }
  return rows;
}

}  // namespace blowup
