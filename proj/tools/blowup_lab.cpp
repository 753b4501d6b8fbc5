// blowup_lab: command-line front end.
//
//   blowup_lab run <config>       solve, analyse, write artifacts
//   blowup_lab sweep <config>     run every point of the [sweep] axes
//   blowup_lab validate <config>  parameter and initial-data checks only
//   blowup_lab oracle ode|jump|surface [options]
//
// Exit status: 0 all checks pass, 2 a check failed, 1 error.

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blowup/blowup.hpp"

namespace {

using namespace blowup;

void print_report(const Report& rep, bool quiet) {
  if (quiet) return;
  rep.write(std::cout);
}

int cmd_run(const std::string& path, const std::string& out_dir, bool quiet) {
  auto cfg = load_config(path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  const auto art = run_experiment(cfg);
  if (!quiet) {
    for (const auto& [k, v] : art.report.entries()) {
      if (k.rfind("config.", 0) != 0) std::cout << k << " = " << v << '\n';
    }
    std::cout << "artifacts: " << art.trajectory_path << ", " << art.report_path << ", "
              << art.config_path << '\n';
  }
  return art.exit_code;
}

int cmd_sweep(const std::string& path, const std::string& out_dir, std::size_t max_parallel,
              bool quiet) {
  auto cfg = load_config(path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  const auto rows = sweep(cfg, cfg.output_dir, max_parallel, quiet ? nullptr : &std::cout);
  int code = kExitPass;
  for (const auto& r : rows) {
    if (r.exit_code == kExitError) return kExitError;
    if (r.exit_code == kExitCheckFailed) code = kExitCheckFailed;
  }
  return code;
}

int cmd_validate(const std::string& path, bool quiet) {
  const auto cfg = load_config(path);
  const auto rep = validate_experiment(cfg);
  print_report(rep, quiet);
  return *rep.get("status") == "pass" ? kExitPass : kExitCheckFailed;
}

struct OdeArgs {
  OdeParams prm;
  double frac = 0.999999;
  bool critical = false;
};

int cmd_oracle_ode(const OdeArgs& a, bool quiet) {
  OdeParams prm = a.prm;
  Report rep;
  if (a.critical) {
    prm.B0 = critical_initial_value(prm);
    rep.set("ode.B0_critical", prm.B0);
  }
  const auto cs = self_similar_constants(prm.p, prm.q, prm.c);
  rep.set("ode.C_A_self_similar", cs.C_A);
  rep.set("ode.C_B_self_similar", cs.C_B);
  const auto s = integrate_system(prm, a.frac);
  rep.set("ode.samples", s.size());
  rep.set("ode.overflow", s.overflow);
  rep.set("ode.t_last", s.t.back());
  rep.set("ode.A_last", s.A.back());
  rep.set("ode.B_last", s.B.back());
  const auto lr = verify_lemma_bounds(s, prm);
  rep.set("lemma.alpha", lr.alpha);
  rep.set("lemma.beta", lr.beta);
  rep.set("lemma.alpha_fit", lr.alpha_fit);
  rep.set("lemma.beta_fit", lr.beta_fit);
  rep.set("lemma.C_A", lr.C_A);
  rep.set("lemma.C_B", lr.C_B);
  rep.set("lemma.increase_A", lr.increase_A);
  rep.set("lemma.increase_B", lr.increase_B);
  rep.set("lemma.diverged", lr.diverged);
  rep.set("status", lr.passed ? "pass" : "fail");
  print_report(rep, quiet);
  return lr.passed ? kExitPass : kExitCheckFailed;
}

struct JumpArgs {
  int n = 3;
  double R = 1.0;
  double t = 0.1;
  double phi = 1.0;
  double theta_min = 1e-5;
  std::vector<double> distances{0.04, 0.02, 0.01, 0.005};
};

int cmd_oracle_jump(const JumpArgs& a, bool quiet) {
  const auto quad = SphereQuadrature::graded(a.n, a.R, {0, 0, 1}, a.theta_min, 1.3, 16);
  const double phi = a.phi;
  const auto jr = jump_check({0, 0, a.R}, [phi](const Vec3&, double) { return phi; }, a.t, quad,
                             a.distances);
  Report rep;
  rep.set("jump.nodes", quad.size());
  for (std::size_t i = 0; i < jr.distances.size(); ++i) {
    rep.set("jump.derivative_d" + format_double(jr.distances[i]), jr.interior_derivative[i]);
  }
  rep.set("jump.interior_limit", jr.interior_limit);
  rep.set("jump.direct_value", jr.direct_value);
  rep.set("jump.J", jr.jump);
  rep.set("jump.J_outward", jr.jump_outward);
  rep.set("jump.expected", -0.5 * jr.phi_x0);
  rep.set("status", jr.passed ? "pass" : "fail");
  print_report(rep, quiet);
  return jr.passed ? kExitPass : kExitCheckFailed;
}

int cmd_oracle_surface(int n, double R, double a, bool quiet) {
  const auto cr = surface_integral_bound({0, 0, R}, a, n, R);
  Report rep;
  for (std::size_t i = 0; i < cr.values.size(); ++i) {
    rep.set("surface.level" + std::to_string(i), cr.values[i]);
  }
  rep.set("surface.value", cr.value);
  rep.set("surface.converged", cr.converged);
  rep.set("surface.diverging", cr.diverging);
  print_report(rep, quiet);
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for coupled heat equations with nonlinear boundary flux"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the verb
  std::string out_dir;
  bool quiet = false;
  std::size_t max_parallel = 1;
  app.add_option("--output-dir", out_dir, "Directory for run artifacts")->expected(1);
  app.add_flag("--quiet", quiet, "Only report through the exit status");
  app.add_option("--max-parallel", max_parallel, "Concurrent runs in a sweep")
      ->check(CLI::PositiveNumber);

  std::string config;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("config", config, "Config file")->required();
  auto* sw = app.add_subcommand("sweep", "Run a parameter sweep");
  sw->add_option("config", config, "Config file")->required();
  auto* val = app.add_subcommand("validate", "Check a config without running");
  val->add_option("config", config, "Config file")->required();

  auto* oracle = app.add_subcommand("oracle", "Stand-alone oracle checks");
  oracle->require_subcommand(1);
  OdeArgs ode;
  auto* ode_cmd = oracle->add_subcommand("ode", "Equality ODE system and rate bounds");
  ode_cmd->add_option("--p", ode.prm.p);
  ode_cmd->add_option("--q", ode.prm.q);
  ode_cmd->add_option("--c", ode.prm.c);
  ode_cmd->add_option("--T", ode.prm.T);
  ode_cmd->add_option("--A0", ode.prm.A0);
  ode_cmd->add_option("--B0", ode.prm.B0);
  ode_cmd->add_option("--t0", ode.prm.t0);
  ode_cmd->add_option("--frac", ode.frac, "Stop at t0 + frac (T - t0)");
  ode_cmd->add_flag("--critical", ode.critical, "Replace B0 by the value blowing up exactly at T");
  JumpArgs jump;
  auto* jump_cmd = oracle->add_subcommand("jump", "Single-layer normal-derivative jump");
  jump_cmd->add_option("--n", jump.n)->check(CLI::IsMember({2, 3}));
  jump_cmd->add_option("--R", jump.R);
  jump_cmd->add_option("--t", jump.t);
  jump_cmd->add_option("--phi", jump.phi, "Constant density");
  jump_cmd->add_option("--theta-min", jump.theta_min);
  jump_cmd->add_option("--distances", jump.distances)->delimiter(',');
  int sn = 3;
  double sR = 1.0, sa = 1.0;
  auto* surf_cmd = oracle->add_subcommand("surface", "Integrability of |x-y|^-a over the sphere");
  surf_cmd->add_option("--n", sn)->check(CLI::IsMember({2, 3}));
  surf_cmd->add_option("--R", sR);
  surf_cmd->add_option("--a", sa);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitPass : kExitError;  // usage errors are operational
  }

  try {
    if (*run) return cmd_run(config, out_dir, quiet);
    if (*sw) return cmd_sweep(config, out_dir, max_parallel, quiet);
    if (*val) return cmd_validate(config, quiet);
    if (*ode_cmd) return cmd_oracle_ode(ode, quiet);
    if (*jump_cmd) return cmd_oracle_jump(jump, quiet);
    if (*surf_cmd) return cmd_oracle_surface(sn, sR, sa, quiet);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
