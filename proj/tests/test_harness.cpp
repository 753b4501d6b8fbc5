#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "blowup/blowup.hpp"

using namespace blowup;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
[problem]
p = 2
q = 2
R = 1
n = 2
flux = exp_power
)";

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() /
                   ("blowup_harness_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string config_error(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    return e.message();
  }
  ADD_FAILURE() << "config accepted";
  return {};
}

int run_cli(const std::string& args, std::string* out = nullptr) {
  const auto log = fs::temp_directory_path() /
                   ("blowup_cli_" + std::to_string(::getpid()) + ".log");
  const std::string cmd = std::string(BLOWUP_LAB_EXE) + " " + args + " > " + log.string() + " 2>&1";
  const int st = std::system(cmd.c_str());
  if (out) *out = slurp(log);
  fs::remove(log);
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST(Config, Defaults) {
  const auto cfg = parse_config_string(kMinimal);
  EXPECT_EQ(cfg.solver.N, 201u);
  EXPECT_EQ(cfg.solver.cfl, 0.4);
  EXPECT_EQ(cfg.solver.growth_cap, 0.1);
  EXPECT_EQ(cfg.solver.u_stop, 25.0);
  EXPECT_FALSE(cfg.solver.t_end.has_value());
  EXPECT_EQ(cfg.analysis.a, 0.5);
  EXPECT_EQ(cfg.analysis.fit.min_samples, 20u);
  EXPECT_TRUE(cfg.analysis.dominance);
  EXPECT_FALSE(cfg.sweep.any());
  EXPECT_EQ(cfg.output_dir, "out");
  EXPECT_TRUE(std::holds_alternative<QuadraticRadial>(cfg.problem.initial));
}

TEST(Config, Errors) {
  EXPECT_EQ(config_error("[problem]\nq = 2\nR = 1\nn = 2\nflux = exp_power\n"),
            "missing required key 'p'");
  EXPECT_EQ(config_error("[problem]\np = 0.5\nq = 2\nR = 1\nn = 2\nflux = exp_power\n"),
            "p>1 required for exp_power");
  EXPECT_NE(config_error(std::string(kMinimal) + "[solver]\nN = abc\n").find("'N'"),
            std::string::npos);
  EXPECT_NE(config_error(std::string(kMinimal) + "[sweep]\np =\n").find("empty"), std::string::npos);
  EXPECT_NE(config_error(std::string(kMinimal) + "[solver]\ncfl = 0.7\n").find("cfl"),
            std::string::npos);
  config_error(std::string(kMinimal) + "[initial]\ntype = cubic\n");
  try {
    load_config("/nonexistent/dir/x.ini");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    EXPECT_EQ(e.message().rfind("io:", 0), 0u);
  }
}

TEST(Config, EchoRoundTrip) {
  const std::string text = std::string(kMinimal) +
                           "[solver]\nN = 101\nt_end = 0.003\n[analysis]\nmin_growth = 1.5\n"
                           "[sweep]\np = 2, 3\nflux = exp_power, power\n";
  const auto cfg = parse_config_string(text);
  const auto echo = echo_config(cfg);
  EXPECT_EQ(echo_config(parse_config_string(echo)), echo);
  EXPECT_NE(echo.find("N = 101"), std::string::npos);
  EXPECT_NE(echo.find("t_end = 0.003"), std::string::npos);

  auto tab = parse_config_string(std::string(kMinimal) +
                                 "[initial]\ntype = tabulated\nu = 1, 1.5, 2\nv = 1, 1, 1\n");
  EXPECT_EQ(echo_config(parse_config_string(echo_config(tab))), echo_config(tab));
  EXPECT_EQ(std::get<Tabulated>(tab.problem.initial).u.size(), 3u);
}

TEST(Experiment, ArtifactsAndReport) {
  const auto dir = scratch("run");
  const auto cfg = parse_config_string(kMinimal);
  const auto art = run_experiment(cfg, dir.string());
  ASSERT_TRUE(fs::exists(art.trajectory_path));
  ASSERT_TRUE(fs::exists(art.report_path));
  ASSERT_TRUE(fs::exists(art.config_path));
  const auto csv = slurp(art.trajectory_path);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kTrajectoryHeader);
  EXPECT_EQ(slurp(art.config_path), echo_config(cfg));

  const auto& rep = art.report;
  ASSERT_NE(rep.get("blowup.T_hat"), nullptr);
  ASSERT_NE(rep.get("rate.alpha_hat"), nullptr);
  EXPECT_LE(std::stod(*rep.get("rate.alpha_hat")), 1.1);
  EXPECT_EQ(*rep.get("rate.ansatz"), "log_law");
  EXPECT_EQ(*rep.get("check.fit"), "pass");
  EXPECT_EQ(*rep.get("check.monotonicity"), "pass");
  EXPECT_EQ(*rep.get("check.simultaneity"), "pass");
  EXPECT_EQ(*rep.get("check.rate_exponent"), "pass");
  EXPECT_EQ(*rep.get("check.boundary_set"), "pass");
  EXPECT_EQ(*rep.get("check.dominance"), "pass");
  EXPECT_EQ(*rep.get("config.problem.flux"), "exp_power");
  EXPECT_EQ(*rep.get("config.solver.N"), "201");

  bool any_fail = false;
  for (const auto& c : art.checks) any_fail = any_fail || c.status == CheckStatus::Fail;
  EXPECT_EQ(art.exit_code, any_fail ? kExitCheckFailed : kExitPass);
  EXPECT_EQ(*rep.get("status"), any_fail ? "fail" : "pass");
}

TEST(Experiment, TinyTimeLimitIsInconclusive) {
  const auto cfg = parse_config_string(std::string(kMinimal) + "[solver]\nt_end = 1e-4\n");
  const auto art = run_experiment(cfg, scratch("tiny").string());
  EXPECT_EQ(art.exit_code, kExitPass);
  EXPECT_EQ(*art.report.get("check.fit"), "inconclusive");
  EXPECT_EQ(*art.report.get("check.boundary_set"), "inconclusive");
  EXPECT_EQ(*art.report.get("check.monotonicity"), "pass");
  EXPECT_FALSE(art.T_hat.has_value());
}

TEST(Experiment, CoarseGridDoesNotError) {
  const auto cfg = parse_config_string(std::string(kMinimal) + "[solver]\nN = 16\n");
  const auto art = run_experiment(cfg, scratch("coarse").string());
  EXPECT_TRUE(art.exit_code == kExitPass || art.exit_code == kExitCheckFailed);
}

TEST(Experiment, Deterministic) {
  const auto cfg = parse_config_string(kMinimal);
  const auto a = run_experiment(cfg, scratch("det_a").string());
  const auto b = run_experiment(cfg, scratch("det_b").string());
  EXPECT_EQ(slurp(a.trajectory_path), slurp(b.trajectory_path));
  EXPECT_EQ(slurp(a.report_path), slurp(b.report_path));
}

TEST(Experiment, ValidateOnly) {
  auto rep = validate_experiment(parse_config_string(kMinimal));
  EXPECT_EQ(*rep.get("status"), "pass");
  EXPECT_EQ(*rep.get("rate.alpha"), "1");
  rep = validate_experiment(parse_config_string(std::string(kMinimal) +
                                                "[initial]\na_u = 1\nb_u = -0.5\n"));
  EXPECT_EQ(*rep.get("status"), "fail");
  EXPECT_EQ(*rep.get("initial.u0_monotone"), "fail");
}

TEST(Sweep, ExponentAxis) {
  const auto cfg = parse_config_string(std::string(kMinimal) + "[sweep]\np = 2, 3\nq = 2\n");
  const auto dir = scratch("sweep_p");
  const auto rows = sweep(cfg, dir.string(), 2);
  ASSERT_EQ(rows.size(), 2u);
  ASSERT_TRUE(rows[0].alpha_hat && rows[1].alpha_hat);
  EXPECT_LE(*rows[0].alpha_hat, 1.1);
  EXPECT_LE(*rows[1].alpha_hat, 0.88);
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "run_000" / "trajectory.csv"));
  EXPECT_TRUE(fs::exists(dir / "run_001" / "report.txt"));
}

TEST(Sweep, FamilyRouting) {
  const auto cfg = parse_config_string(std::string(kMinimal) +
                                       "[sweep]\nflux = exp_power, power, exp_linear\n");
  const auto rows = sweep(cfg, scratch("sweep_flux").string(), 3);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].ansatz, "log_law");
  EXPECT_EQ(rows[1].ansatz, "power_law");
  EXPECT_EQ(rows[2].ansatz, "exp_linear_law");
  for (const auto& r : rows) EXPECT_TRUE(r.error.empty()) << r.error;
}

TEST(Sweep, IndependentOfParallelism) {
  const auto cfg = parse_config_string(std::string(kMinimal) +
                                       "[sweep]\np = 2, 2.5, 3\nN = 101, 201\n");
  const auto d1 = scratch("seq");
  const auto d4 = scratch("par");
  sweep(cfg, d1.string(), 1);
  sweep(cfg, d4.string(), 4);
  EXPECT_EQ(slurp(d1 / "summary.csv"), slurp(d4 / "summary.csv"));
  EXPECT_EQ(slurp(d1 / "run_005" / "trajectory.csv"), slurp(d4 / "run_005" / "trajectory.csv"));
}

TEST(Sweep, PerRunFailuresAreRecorded) {
  // p = 1 is rejected for the exponential flux, but the other point still runs
  auto cfg = parse_config_string(std::string(kMinimal) + "[sweep]\np = 1, 2\n");
  const auto rows = sweep(cfg, scratch("sweep_err").string());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].exit_code, kExitError);
  EXPECT_NE(rows[0].error.find("p>1"), std::string::npos);
  EXPECT_NE(rows[1].exit_code, kExitError);
}

TEST(Sweep, Limits) {
  auto cfg = parse_config_string(std::string(kMinimal) + "[sweep]\np = 2, 3\nmax_runs = 1\n");
  try {
    sweep(cfg, scratch("limit").string());
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
  cfg = parse_config_string(kMinimal);
  EXPECT_THROW(sweep(cfg, scratch("noaxes").string()), Error);
}

TEST(Cli, Verbs) {
  const auto dir = scratch("cli");
  write_file((dir / "ok.ini").string(), kMinimal);
  write_file((dir / "tiny.ini").string(), std::string(kMinimal) + "[solver]\nt_end = 1e-4\n");
  write_file((dir / "bad.ini").string(), "[problem]\np = 2\n");
  const std::string out = " --output-dir " + (dir / "out").string();

  std::string text;
  EXPECT_EQ(run_cli("run " + (dir / "tiny.ini").string() + out, &text), 0);
  EXPECT_NE(text.find("check.fit = inconclusive"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "trajectory.csv"));
  EXPECT_EQ(run_cli("run " + (dir / "tiny.ini").string() + out + " --quiet", &text), 0);
  EXPECT_TRUE(text.empty());

  const int code = run_cli("run " + (dir / "ok.ini").string() + out, &text);
  EXPECT_TRUE(code == 0 || code == 2);
  EXPECT_NE(text.find("blowup.T_hat = "), std::string::npos);

  EXPECT_EQ(run_cli("validate " + (dir / "ok.ini").string(), &text), 0);
  EXPECT_NE(text.find("status = pass"), std::string::npos);
  EXPECT_EQ(run_cli("run " + (dir / "bad.ini").string(), &text), 1);
  EXPECT_NE(text.find("missing required key 'q'"), std::string::npos);
  EXPECT_EQ(run_cli("run " + (dir / "missing.ini").string()), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli(""), 1);
}

TEST(Cli, Oracles) {
  std::string text;
  EXPECT_EQ(run_cli("oracle ode --frac 0.9999", &text), 0);
  EXPECT_NE(text.find("lemma.alpha_fit = "), std::string::npos);
  EXPECT_EQ(run_cli("oracle ode --p 3 --q 2 --critical --frac 0.99999999", &text), 0);
  EXPECT_NE(text.find("ode.B0_critical = "), std::string::npos);
  EXPECT_EQ(run_cli("oracle surface --a 2", &text), 0);
  EXPECT_NE(text.find("surface.diverging = true"), std::string::npos);
  EXPECT_EQ(run_cli("oracle jump --distances 0.04,0.02,0.01", &text), 0);
  EXPECT_NE(text.find("status = pass"), std::string::npos);
  EXPECT_EQ(run_cli("oracle jump --theta-min 0.1", &text), 1);
  EXPECT_NE(text.find("resolution"), std::string::npos);
}
