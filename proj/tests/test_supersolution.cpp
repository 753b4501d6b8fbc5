#include <cmath>

#include <gtest/gtest.h>

#include "blowup/analysis.hpp"
#include "blowup/supersolution.hpp"

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

// z_t - (z_rr + (n-1) z_r / r) by central differences
double fd_residual(double r, double t, const ComparisonParams& c) {
  const double h = 1e-4 * c.R, k = 1e-6 * (c.T - t);
  auto z = [&](double rr, double tt) { return comparison_value(rr, tt, c); };
  const double zt = (z(r, t + k) - z(r, t - k)) / (2.0 * k);
  const double zrr = (z(r + h, t) - 2.0 * z(r, t) + z(r - h, t)) / (h * h);
  const double zr = (z(r + h, t) - z(r - h, t)) / (2.0 * h);
  return zt - zrr - (c.n - 1) * zr / r;
}

}  // namespace

TEST(Comparison, Examples) {
  EXPECT_EQ(c2_min(2, 1.0, 1.0), 41.0);
  EXPECT_EQ(c2_min(1, 1.0, 1.0), 37.0);
  const ComparisonParams c;
  EXPECT_NEAR(comparison_value(0.0, 0.0, c), 1.0 / 42.0, 1e-16);
  EXPECT_NEAR(comparison_value(1.0, 0.0, c), 1.0 / 41.0, 1e-16);
  EXPECT_EQ(laplacian_h(0.0, 3, 2.0), -48.0);
  EXPECT_EQ(laplacian_h(1.0, 2, 1.0), 8.0);
  EXPECT_EQ(code_of([&] { comparison_value(0.5, 1.0, c); }), ErrorCode::BadTime);
  EXPECT_EQ(code_of([&] { comparison_value(1.5, 0.0, c); }), ErrorCode::InvalidParams);
}

TEST(Comparison, ClosedFormMatchesFiniteDifferences) {
  for (int n : {1, 2, 3}) {
    for (double m : {0.5, 1.0, 2.0}) {
      const ComparisonParams c{2.0, c2_min(n, 1.5, m), m, 0.8, 1.5, n};
      for (double r : {0.2, 0.7, 1.3}) {
        for (double t : {0.0, 0.5, 0.79}) {
          const double exact = supersolution_residual(r, t, c);
          EXPECT_NEAR(fd_residual(r, t, c), exact, 1e-5 * (std::abs(exact) + 1.0))
              << n << " " << m << " " << r << " " << t;
        }
      }
    }
  }
}

TEST(Comparison, ResidualNonnegativeAtTheThreshold) {
  for (int n : {1, 2, 3, 4}) {
    for (double m : {0.25, 0.5, 1.0, 2.0}) {
      for (double R : {0.5, 1.0, 2.0}) {
        ComparisonParams c{1.0, c2_min(n, R, m), m, 1.0, R, n};
        EXPECT_EQ(scan_residual(c, 201, 81).negative, 0u) << n << " " << m << " " << R;
        c.C2 = c2_min(n, R, m) - 2.0;  // the stated threshold is not sharp
        EXPECT_EQ(scan_residual(c, 201, 81).negative, 0u) << n << " " << m << " " << R;
        c.C2 = c2_sharp(n, R, m) * (1.0 + 1e-9);
        EXPECT_EQ(scan_residual(c, 201, 81).negative, 0u) << n << " " << m << " " << R;
        c.C2 = 0.95 * c2_sharp(n, R, m);
        const auto s = scan_residual(c, 201, 81);
        EXPECT_GT(s.negative, 0u) << n << " " << m << " " << R;
        EXPECT_GT(s.t_at_min, 0.99 * c.T);
      }
    }
  }
}

TEST(Comparison, MonotoneInRadiusAndTime) {
  const ComparisonParams c{1.0, 41.0, 1.0, 1.0, 1.0, 2};
  for (double t : {0.0, 0.5, 0.999}) {
    double prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double z = comparison_value(0.01 * i, t, c);
      EXPECT_GT(z, prev);
      prev = z;
    }
  }
  for (double r : {0.0, 0.5, 1.0}) {
    EXPECT_LT(comparison_value(r, 0.2, c), comparison_value(r, 0.9, c));
  }
}

TEST(Comparison, InteriorBound) {
  const ComparisonParams c{3.0, 41.0, 0.8, 1.0, 1.0, 2};
  for (double a : {0.2, 0.5, 0.9}) {
    const double b = interior_bound(c, a);
    for (double t : {0.0, 0.9, 1.0 - 1e-12}) {
      for (int i = 0; i <= 50; ++i) EXPECT_LE(comparison_value(a * i / 50.0, t, c), b);
    }
    EXPECT_NEAR(comparison_value(a, 1.0 - 1e-15, c), b, 1e-9 * b);
  }
}

TEST(Dominance, ReferenceRun) {
  ProblemParams prm;
  SolverConfig cfg;
  const auto traj = run(prm, cfg);
  const auto fit = estimate_blowup_time(traj, prm);
  const auto a = rate_ansatz(prm);
  const auto rb = rate_bound_check(traj, prm, fit.T_hat);
  const auto rep = dominance_check(traj, prm, fit.T_hat, rb.rate_sup_u, rb.rate_sup_v, a.k_u, a.k_v);
  EXPECT_TRUE(rep.passed);
  EXPECT_GT(rep.u.min_margin, 0.0);
  EXPECT_GE(rep.u.initial_margin, 0.0);
  EXPECT_GE(rep.u.C1, rep.u.C * std::pow(rep.u.C2, rep.u.m) * (1.0 - 1e-12));
  EXPECT_EQ(rep.states, traj.snapshots.size());

  DominanceOptions big;
  big.C1_scale = 10.0;
  const auto rep10 =
      dominance_check(traj, prm, fit.T_hat, rb.rate_sup_u, rb.rate_sup_v, a.k_u, a.k_v, big);
  EXPECT_TRUE(rep10.passed);
  EXPECT_NEAR(rep10.u.C1, 10.0 * rep.u.C1, 1e-9 * rep.u.C1);
  EXPECT_GT(rep10.u.min_margin, rep.u.min_margin);

  DominanceOptions zero;
  zero.C1 = 0.0;
  const auto rep0 =
      dominance_check(traj, prm, fit.T_hat, rb.rate_sup_u, rb.rate_sup_v, a.k_u, a.k_v, zero);
  EXPECT_TRUE(rep0.violated);
  EXPECT_FALSE(rep0.passed);
}
