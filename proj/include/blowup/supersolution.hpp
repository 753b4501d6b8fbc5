#pragma once

/// @file supersolution.hpp
/// @brief Comparison function z = C1 / [h(r) + C2 (T-t)]^m with
/// h = (R²-r²)², its analytic heat residual, and a dominance check against
/// computed solutions.
///
/// With D = h + C2 (T-t):
///   z_t - Δz = m C1 D^{-m-1} [C2 + Δh - (m+1)|∇h|²/D],
///   Δh = 8r² - 4n(R²-r²),  |∇h|² = 16 r² (R²-r²)².

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "blowup/error.hpp"
#include "blowup/model.hpp"
#include "blowup/solver.hpp"

namespace blowup {

struct ComparisonParams {
  double C1 = 1.0;
  double C2 = 41.0;
  double m = 1.0;
  double T = 1.0;
  double R = 1.0;
  int n = 2;
};

/// 4nR² + 16R²(m+1) + 1.
inline double c2_min(int n, double R, double m) {
  return 4.0 * n * R * R + 16.0 * R * R * (m + 1.0) + 1.0;
}

/// Infimum over r of -(Δh - (m+1)|∇h|²/h): below this the residual turns
/// negative as t→T.
inline double c2_sharp(int n, double R, double m) {
  return std::max(4.0 * n, 8.0 + 16.0 * m) * R * R;
}

inline double weight_h(double r, double R) {
  const double s = R * R - r * r;
  return s * s;
}

inline double laplacian_h(double r, int n, double R) {
  return 8.0 * r * r - 4.0 * n * (R * R - r * r);
}

inline double grad_h_squared(double r, double R) {
  const double s = R * R - r * r;
  return 16.0 * r * r * s * s;
}

namespace detail {

inline void check_point(double r, double t, const ComparisonParams& c) {
  if (!(t < c.T)) throw Error(ErrorCode::BadTime, "t<T required");
  if (!(r >= 0.0 && r <= c.R)) throw Error(ErrorCode::InvalidParams, "0<=r<=R required");
}

}  // namespace detail

inline double comparison_value(double r, double t, const ComparisonParams& c) {
  detail::check_point(r, t, c);
  return c.C1 * std::pow(weight_h(r, c.R) + c.C2 * (c.T - t), -c.m);
}

/// z_t - Δz from the closed-form derivatives.
inline double supersolution_residual(double r, double t, const ComparisonParams& c) {
  detail::check_point(r, t, c);
  const double D = weight_h(r, c.R) + c.C2 * (c.T - t);
  const double bracket =
      c.C2 + laplacian_h(r, c.n, c.R) - (c.m + 1.0) * grad_h_squared(r, c.R) / D;
  return c.m * c.C1 * std::pow(D, -c.m - 1.0) * bracket;
}

struct ResidualScan {
  double min_residual = std::numeric_limits<double>::infinity();
  double r_at_min = 0.0;
  double t_at_min = 0.0;
  std::size_t negative = 0;
};

/// nr uniform radii on [0,R] × nt times approaching T geometrically
/// (T-t from T down to 1e-8·T).
inline ResidualScan scan_residual(const ComparisonParams& c, std::size_t nr, std::size_t nt) {
  ResidualScan s;
  for (std::size_t j = 0; j < nt; ++j) {
    const double frac = nt > 1 ? static_cast<double>(j) / static_cast<double>(nt - 1) : 0.0;
    const double t = c.T - c.T * std::pow(10.0, -8.0 * frac);
    for (std::size_t i = 0; i < nr; ++i) {
      const double r = nr > 1 ? c.R * static_cast<double>(i) / static_cast<double>(nr - 1) : 0.0;
      const double res = supersolution_residual(r, t, c);
      if (res < 0.0) ++s.negative;
      if (res < s.min_residual) {
        s.min_residual = res;
        s.r_at_min = r;
        s.t_at_min = t;
      }
    }
  }
  return s;
}

/// sup_{r<=a} z(r,t) <= C1 (R²-a²)^{-2m}.
inline double interior_bound(const ComparisonParams& c, double a) {
  return c.C1 * std::pow(c.R * c.R - a * a, -2.0 * c.m);
}

struct DominanceOptions {
  std::optional<double> C1;  ///< explicit amplitude, bypassing the selection rule
  double C1_scale = 1.0;
  std::optional<double> C2;  ///< defaults to c2_min
  std::optional<double> max_radius;  ///< only check nodes with r <= this
};

struct DominanceSide {
  double m = 0.0;
  double C = 0.0;   ///< boundary constant used in C1 >= C·C2^m
  double C1 = 0.0;
  double C2 = 0.0;
  /// min z - w over states with t > 0 (at t = 0 the selection rule can make
  /// the margin exactly zero; that state is reported separately).
  double min_margin = std::numeric_limits<double>::infinity();
  double min_ratio = std::numeric_limits<double>::infinity();  ///< min z / w, t > 0
  double initial_margin = std::numeric_limits<double>::infinity();
  double t_at_min = 0.0;
  std::size_t node_at_min = 0;
};

struct DominanceReport {
  DominanceSide u;
  DominanceSide v;
  std::size_t states = 0;
  bool violated = false;
  bool passed = false;
};

namespace detail {

inline DominanceSide dominate(const Trajectory& traj, const ProblemParams& prm, double T_hat,
                              double rate_sup, double m, bool is_u, const DominanceOptions& opt) {
  DominanceSide s;
  s.m = m;
  s.C2 = opt.C2 ? *opt.C2 : c2_min(prm.n, prm.R, m);
  // Boundary constant: the fitted rate constant, or the observed boundary
  // sup of w(T̂-t)^m over the whole run if that is larger.
  s.C = rate_sup;
  for (const auto& smp : traj.samples) {
    const double w = is_u ? smp.M : smp.Nv;
    if (T_hat > smp.t) s.C = std::max(s.C, w * std::pow(T_hat - smp.t, m));
  }
  const RadialGrid grid(prm.R, traj.stop.last_state.u.size());
  const auto& first = traj.snapshots.front();
  const auto& w0 = is_u ? first.u : first.v;
  double need0 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.node(i);
    need0 = std::max(need0, w0[i] * std::pow(weight_h(r, prm.R) + s.C2 * T_hat, m));
  }
  s.C1 = opt.C1 ? *opt.C1 : opt.C1_scale * std::max(s.C * std::pow(s.C2, m), need0);

  const ComparisonParams cp{s.C1, s.C2, m, T_hat, prm.R, prm.n};
  for (const auto& st : traj.snapshots) {
    if (!(st.t < T_hat)) continue;
    const auto& w = is_u ? st.u : st.v;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r = grid.node(i);
      if (opt.max_radius && r > *opt.max_radius) break;
      const double z = comparison_value(r, st.t, cp);
      const double margin = z - w[i];
      if (st.t <= first.t) {
        s.initial_margin = std::min(s.initial_margin, margin);
        continue;
      }
      if (margin < s.min_margin) {
        s.min_margin = margin;
        s.t_at_min = st.t;
        s.node_at_min = i;
      }
      if (w[i] > 0.0) s.min_ratio = std::min(s.min_ratio, z / w[i]);
    }
  }
  return s;
}

}  // namespace detail

/// Checks z >= u (m = k_u/2) and z >= v (m = k_v/2) at every stored state and
/// node. C1 = max(C·C2^m, max_r w0(r)[h(r)+C2 T̂]^m) unless given explicitly.
inline DominanceReport dominance_check(const Trajectory& traj, const ProblemParams& prm,
                                       double T_hat, double rate_sup_u, double rate_sup_v,
                                       double alpha, double beta,
                                       const DominanceOptions& opt = {}) {
  if (traj.snapshots.empty()) throw Error(ErrorCode::InvalidParams, "no stored states");
  DominanceReport rep;
  rep.u = detail::dominate(traj, prm, T_hat, rate_sup_u, 0.5 * alpha, true, opt);
  rep.v = detail::dominate(traj, prm, T_hat, rate_sup_v, 0.5 * beta, false, opt);
  for (const auto& st : traj.snapshots) rep.states += st.t < T_hat ? 1 : 0;
  rep.violated = rep.u.min_margin < 0.0 || rep.v.min_margin < 0.0 || rep.u.initial_margin < 0.0 ||
                 rep.v.initial_margin < 0.0;
  rep.passed = !rep.violated && rep.states > 0;
  return rep;
}

}  // namespace blowup
