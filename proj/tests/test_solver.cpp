#include <cmath>

#include <gtest/gtest.h>

#include "blowup/solver.hpp"

using namespace blowup;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no blowup::Error thrown";
  return ErrorCode::InvalidParams;
}

std::vector<double> sample(const RadialGrid& g, double (*f)(double)) {
  std::vector<double> out;
  for (double r : g.nodes()) out.push_back(f(r));
  return out;
}

// ∫_0^R f r^{n-1} dr by the trapezoid rule on the grid
double radial_mass(const std::vector<double>& f, const RadialGrid& g, int n) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double a = f[i] * std::pow(g.node(i), n - 1);
    const double b = f[i + 1] * std::pow(g.node(i + 1), n - 1);
    s += 0.5 * (a + b) * g.dr();
  }
  return s;
}

}  // namespace

TEST(RadialLaplacian, ExactOnQuadratics) {
  const auto g = make_grid(1.0, 41);
  auto lap = radial_laplacian(sample(g, [](double r) { return r * r; }), g, 2);
  for (double x : lap) EXPECT_NEAR(x, 4.0, 1e-9);
  lap = radial_laplacian(sample(g, [](double) { return 3.5; }), g, 3);
  for (double x : lap) EXPECT_NEAR(x, 0.0, 1e-12);
  lap = radial_laplacian(sample(g, [](double r) { return 1.0 - r * r; }), g, 3);
  for (double x : lap) EXPECT_NEAR(x, -6.0, 1e-9);
}

TEST(RadialLaplacian, GhostUsedAtBoundary) {
  const auto g = make_grid(1.0, 21);
  const auto f = sample(g, [](double r) { return r * r; });
  // ghost of r² at R + dr
  const double ghost = (1.0 + g.dr()) * (1.0 + g.dr());
  const auto lap = radial_laplacian(f, g, 1, ghost);
  EXPECT_NEAR(lap.back(), 2.0, 1e-9);
  const auto lap2 = radial_laplacian(f, g, 1, ghost + 1.0);
  EXPECT_NEAR(lap2.back() - lap.back(), 1.0 / (g.dr() * g.dr()), 1e-6);
}

TEST(ApplyNeumann, Examples) {
  ProblemParams prm;
  const auto g = make_grid(1.0, 21);
  FieldState s{0.0, std::vector<double>(21, 0.0), std::vector<double>(21, 0.0)};
  auto gh = apply_neumann(s, prm, g);
  EXPECT_NEAR(gh.u, 2.0 * g.dr(), 1e-15);
  EXPECT_NEAR(gh.v, 2.0 * g.dr(), 1e-15);

  prm.flux = FluxFamily::Power;
  s.u.assign(21, 0.7);
  gh = apply_neumann(s, prm, g);
  EXPECT_EQ(gh.u, 0.7);

  prm.flux = FluxFamily::ExpPower;
  s.v.back() = 27.0;
  EXPECT_EQ(code_of([&] { apply_neumann(s, prm, g); }), ErrorCode::FluxOverflow);
}

TEST(AdaptDt, Examples) {
  const auto g = make_grid(1.0, 101);
  SolverConfig cfg;
  FieldState s{0.0, std::vector<double>(101, 9.0), std::vector<double>(101, 1.0)};
  std::vector<double> zero(101, 0.0);
  // the diffusion limit is cfl·dr²/n
  EXPECT_NEAR(adapt_dt(s, cfg, g, 1, zero, zero), cfg.cfl * 1e-4, 1e-18);
  EXPECT_NEAR(adapt_dt(s, cfg, g, 2, zero, zero), cfg.cfl * 1e-4 / 2.0, 1e-18);
  std::vector<double> big(101, 0.0);
  big[50] = 1e6;
  EXPECT_NEAR(adapt_dt(s, cfg, g, 1, big, zero), 1e-6, 1e-20);
  big[50] = 1e30;
  EXPECT_EQ(code_of([&] { adapt_dt(s, cfg, g, 1, zero, big); }), ErrorCode::StepUnderflow);
}

TEST(Step, ConstantIsSteadyUnderZeroFlux) {
  ProblemParams prm;
  prm.flux = FluxFamily::Power;
  const auto g = make_grid(1.0, 51);
  FieldState s{0.0, std::vector<double>(51, 1.0), std::vector<double>(51, 0.0)};
  SolverConfig cfg;
  cfg.N = 51;
  const auto next = step(s, prm, g, cfg);
  EXPECT_GT(next.t, 0.0);
  for (double x : next.u) EXPECT_NEAR(x, 1.0, 1e-15);
}

TEST(Step, BoundaryValueIncreases) {
  ProblemParams prm;
  const auto g = make_grid(1.0, 201);
  SolverConfig cfg;
  const auto s0 = initial_state(prm, g);
  const auto s1 = step(s0, prm, g, cfg);
  EXPECT_GT(s1.u.back(), s0.u.back());
  EXPECT_GT(s1.v.back(), s0.v.back());
}

TEST(Step, FrozenFluxMassBalance) {
  // u_t = Δu, u_r(R) = 1: ∫ u r^{n-1} dr grows at rate R^{n-1}.
  for (int n : {1, 2, 3}) {
    ProblemParams prm;
    prm.n = n;
    prm.R = 1.0;
    prm.initial = QuadraticRadial{1.0, 0.0, 1.0, 0.0};
    SolverConfig cfg;
    cfg.N = 201;
    cfg.frozen_flux = 1.0;
    cfg.t_end = 0.05;
    const auto traj = run(prm, cfg);
    EXPECT_EQ(traj.stop.reason, StopReason::TimeLimit);
    const auto g = make_grid(1.0, 201);
    const double m0 = radial_mass(traj.snapshots.front().u, g, n);
    const double m1 = radial_mass(traj.stop.last_state.u, g, n);
    EXPECT_NEAR(m1 - m0, 0.05, 2e-3) << "n=" << n;
  }
}

TEST(Step, FrozenFluxConvergesToRefinedRun) {
  ProblemParams prm;
  prm.initial = QuadraticRadial{1.0, 0.0, 1.0, 0.0};
  auto boundary_value = [&](std::size_t N) {
    SolverConfig cfg;
    cfg.N = N;
    cfg.frozen_flux = 1.0;
    cfg.t_end = 0.02;
    return run(prm, cfg).stop.last_state.u.back();
  };
  const double ref = boundary_value(401);  // 4× the N=101 grid
  const double e1 = std::abs(boundary_value(51) - ref);
  const double e2 = std::abs(boundary_value(101) - ref);
  EXPECT_LT(e2, 1e-2);
  EXPECT_LT(e2, 0.5 * e1);  // first order in dt at least
}

TEST(Run, TimeLimit) {
  ProblemParams prm;
  SolverConfig cfg;
  cfg.t_end = 0.001;
  const auto traj = run(prm, cfg);
  EXPECT_EQ(traj.stop.reason, StopReason::TimeLimit);
  EXPECT_GE(traj.samples.size(), 2u);
  EXPECT_DOUBLE_EQ(traj.stop.t_stop, 0.001);
  EXPECT_DOUBLE_EQ(traj.samples.back().t, 0.001);
}

TEST(Run, ReferenceBlowupAndProperties) {
  ProblemParams prm;
  SolverConfig cfg;
  const auto traj = run(prm, cfg);
  ASSERT_EQ(traj.stop.reason, StopReason::BlowupThreshold);
  EXPECT_FALSE(traj.stop.nonfinite_guard);
  EXPECT_GT(traj.stop.t_stop, 0.0);
  EXPECT_GT(std::max(traj.stop.arg_u, traj.stop.arg_v), cfg.u_stop);
  // simultaneity proxy
  EXPECT_GT(traj.stop.arg_u, cfg.u_stop / 4.0);
  EXPECT_GT(traj.stop.arg_v, cfg.u_stop / 4.0);
  const std::size_t last = cfg.N - 1;
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const auto& s = traj.samples[k];
    const auto& p = traj.samples[k - 1];
    EXPECT_GT(s.t, p.t);
    const double tol = 1e-8 * (1.0 + s.M);
    EXPECT_GE(s.M - p.M, -tol);
    EXPECT_GE(s.Nv - p.Nv, -tol);
    EXPECT_EQ(s.argmax_u, last);
    EXPECT_EQ(s.argmax_v, last);
  }
  for (const auto& st : traj.snapshots) {
    for (std::size_t i = 0; i < st.u.size(); ++i) {
      EXPECT_GE(st.u[i], 0.5 - 1e-12);
      if (i + 1 < st.u.size() && st.t > 0.0) {
        const double tol = 1e-8 * (1.0 + st.u.back());
        EXPECT_GE(st.u[i + 1] - st.u[i], -tol);
        EXPECT_GE(st.v[i + 1] - st.v[i], -tol);
      }
    }
  }
}

TEST(Run, StopTimeAgreesWithRefinedRun) {
  ProblemParams prm;
  SolverConfig coarse;
  SolverConfig fine;
  fine.N = 801;
  fine.growth_cap = coarse.growth_cap / 4.0;
  const double t1 = run(prm, coarse).stop.t_stop;
  const double t2 = run(prm, fine).stop.t_stop;
  EXPECT_LT(std::abs(t1 - t2) / t2, 0.01);
}

TEST(Run, PowerFamilyBlowsUp) {
  ProblemParams prm;
  prm.flux = FluxFamily::Power;
  SolverConfig cfg;
  const auto traj = run(prm, cfg);
  EXPECT_EQ(traj.stop.reason, StopReason::BlowupThreshold);
  EXPECT_GT(traj.stop.t_stop, 0.1);
}

TEST(Run, UnreachableThresholdEndsInStepUnderflow) {
  ProblemParams prm;
  SolverConfig cfg;
  cfg.u_stop = 600.0;
  const auto traj = run(prm, cfg);
  EXPECT_EQ(traj.stop.reason, StopReason::StepUnderflow);
  EXPECT_LT(traj.stop.arg_u, 600.0);
}

TEST(Run, ConvergenceOrder) {
  ProblemParams prm;
  std::vector<double> M;
  double cap = 0.1;
  for (std::size_t N : {51, 101, 201, 401}) {
    SolverConfig cfg;
    cfg.N = N;
    cfg.growth_cap = cap;
    cfg.t_end = 0.004;
    M.push_back(run(prm, cfg).samples.back().M);
    cap /= 2.0;
  }
  const double order1 = std::log2(std::abs(M[0] - M[1]) / std::abs(M[1] - M[2]));
  const double order2 = std::log2(std::abs(M[1] - M[2]) / std::abs(M[2] - M[3]));
  EXPECT_GE(order1, 1.7);
  EXPECT_GE(order2, 1.7);
}

TEST(Run, RecordEveryDecimatesButKeepsFinalState) {
  ProblemParams prm;
  SolverConfig cfg;
  cfg.record_every = 7;
  const auto traj = run(prm, cfg);
  EXPECT_EQ(traj.samples.back().t, traj.stop.t_stop);
  EXPECT_LE(traj.samples.size(), traj.stop.steps / 7 + 2);
  EXPECT_GE(traj.samples.size(), traj.stop.steps / 7);
}

TEST(Run, InvalidConfig) {
  ProblemParams prm;
  SolverConfig cfg;
  cfg.cfl = 0.6;
  EXPECT_EQ(code_of([&] { run(prm, cfg); }), ErrorCode::InvalidParams);
  cfg = {};
  cfg.u_stop = 700.0;
  EXPECT_EQ(code_of([&] { run(prm, cfg); }), ErrorCode::InvalidParams);
  cfg = {};
  cfg.interior_radius = 1.0;
  EXPECT_EQ(code_of([&] { run(prm, cfg); }), ErrorCode::InvalidParams);
  cfg = {};
  cfg.N = 8;
  EXPECT_EQ(code_of([&] { run(prm, cfg); }), ErrorCode::GridTooCoarse);
}
