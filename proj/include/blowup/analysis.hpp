#pragma once

/// @file analysis.hpp
/// @brief Blow-up time estimation, rate fitting and rate/boundary diagnostics.
///
/// Each family is fitted in a transformed variable y that is affine in
/// log(T-t) under the upper-rate ansatz:
///
///   ExpPower:   y = M,        y = log C - (α/2) log(T-t)
///   Power:      y = log M,    y = log C - (α/2) log(T-t)
///   ExpLinear:  y = q M,      y = log C - (1/2) log(T-t)
///
/// (and symmetrically for N with β, or p N).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "blowup/error.hpp"
#include "blowup/model.hpp"
#include "blowup/solver.hpp"

namespace blowup {

struct FitOptions {
  std::size_t min_samples = 20;
  double min_growth = 2.0;    ///< required growth of M (or N) across the window
  double max_residual = 1.0;  ///< RMS residual in the transformed variable
  std::size_t scan_points = 241;
};

/// Exponent pair (k_u, k_v) and transform for one flux family.
struct RateAnsatz {
  FluxFamily family;
  double k_u;  ///< y_u = log C - (k_u/2) log(T-t)
  double k_v;
  double p;
  double q;

  double y_u(double M) const { return transform(M, q); }
  double y_v(double N) const { return transform(N, p); }

  std::string tag() const {
    switch (family) {
      case FluxFamily::ExpPower: return "log_law";
      case FluxFamily::Power: return "power_law";
      case FluxFamily::ExpLinear: return "exp_linear_law";
    }
    return "unknown";
  }

 private:
  double transform(double w, double e) const {
    switch (family) {
      case FluxFamily::ExpPower: return w;
      case FluxFamily::Power: return std::log(w);
      case FluxFamily::ExpLinear: return e * w;
    }
    return w;
  }
};

inline RateAnsatz rate_ansatz(const ProblemParams& prm) {
  if (prm.flux == FluxFamily::ExpLinear) return {prm.flux, 1.0, 1.0, prm.p, prm.q};
  const auto ex = rate_exponents(prm.p, prm.q);
  return {prm.flux, ex.alpha, ex.beta, prm.p, prm.q};
}

struct FitWindow {
  std::size_t lo = 0;  ///< first sample index
  std::size_t hi = 0;  ///< last sample index (inclusive)
  std::size_t size() const { return hi - lo + 1; }
};

/// Shortest suffix, inside the maximal strictly increasing suffix of `w`,
/// holding at least min_samples points over which w grows by min_growth.
inline FitWindow select_window(const std::vector<double>& w, const FitOptions& opt) {
  const std::size_t n = w.size();
  if (n == 0) throw Error(ErrorCode::FitFailed, "empty series");
  std::size_t j = n - 1;
  while (j > 0 && w[j - 1] < w[j]) --j;
  if (n - j < opt.min_samples) {
    throw Error(ErrorCode::FitFailed, "non-monotone tail: only " + std::to_string(n - j) +
                                          " increasing samples");
  }
  std::size_t i = n - opt.min_samples;
  while (i > j && w[n - 1] - w[i] < opt.min_growth) --i;
  if (w[n - 1] - w[i] < opt.min_growth) {
    throw Error(ErrorCode::FitFailed, "tail grows by " + std::to_string(w[n - 1] - w[i]) +
                                          " < " + std::to_string(opt.min_growth));
  }
  return {i, n - 1};
}

struct BlowupFit {
  double T_hat = 0.0;
  double C1_hat = 0.0;  ///< e^{log C} of the u fit
  double C2_hat = 0.0;  ///< e^{log C} of the v fit
  double residual = 0.0;
  FitWindow window_u;
  FitWindow window_v;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::string ansatz;
};

namespace detail {

struct Series {
  std::vector<double> dt_to_stop;  ///< t_stop - t_i
  std::vector<double> y;
  double k = 1.0;
};

inline Series make_series(const Trajectory& traj, const FitWindow& w, const RateAnsatz& a, bool u) {
  Series s;
  s.k = u ? a.k_u : a.k_v;
  const double t_stop = traj.samples.back().t;
  for (std::size_t i = w.lo; i <= w.hi; ++i) {
    const auto& smp = traj.samples[i];
    s.dt_to_stop.push_back(t_stop - smp.t);
    s.y.push_back(u ? a.y_u(smp.M) : a.y_v(smp.Nv));
  }
  return s;
}

// Least-squares log C for fixed δ = T - t_stop; returns (log C, sum of squares).
inline std::pair<double, double> fit_offset(const Series& s, double delta) {
  double mean = 0.0;
  std::vector<double> z(s.y.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = s.y[i] + 0.5 * s.k * std::log(s.dt_to_stop[i] + delta);
    mean += z[i];
  }
  mean /= static_cast<double>(z.size());
  double ss = 0.0;
  for (double x : z) ss += (x - mean) * (x - mean);
  return {mean, ss};
}

inline std::vector<double> fit_variable(const Trajectory& traj, bool u) {
  std::vector<double> w;
  w.reserve(traj.samples.size());
  for (const auto& s : traj.samples) w.push_back(u ? s.M : s.Nv);
  return w;
}

// The tail window is chosen on M; N is fitted over the same samples and
// must be strictly increasing there.
inline std::pair<FitWindow, FitWindow> fit_windows(const Trajectory& traj, const FitOptions& opt) {
  const FitWindow w = select_window(fit_variable(traj, true), opt);
  for (std::size_t i = w.lo + 1; i <= w.hi; ++i) {
    if (!(traj.samples[i].Nv > traj.samples[i - 1].Nv)) {
      throw Error(ErrorCode::FitFailed, "N not increasing over the tail window");
    }
  }
  return {w, w};
}

}  // namespace detail

/// Least-squares fit of the family ansatz over the tail windows of M and N
/// with the exponents fixed, minimizing jointly over T and the two log C.
inline BlowupFit estimate_blowup_time(const Trajectory& traj, const ProblemParams& prm,
                                      const FitOptions& opt = {}) {
  if (traj.stop.reason != StopReason::BlowupThreshold) {
    throw Error(ErrorCode::FitFailed, std::string("run stopped by ") + to_string(traj.stop.reason));
  }
  const RateAnsatz a = rate_ansatz(prm);
  BlowupFit fit;
  fit.ansatz = a.tag();
  std::tie(fit.window_u, fit.window_v) = detail::fit_windows(traj, opt);
  const auto su = detail::make_series(traj, fit.window_u, a, true);
  const auto sv = detail::make_series(traj, fit.window_v, a, false);
  for (double y : su.y) {
    if (!std::isfinite(y)) throw Error(ErrorCode::FitFailed, "non-finite transformed series");
  }
  for (double y : sv.y) {
    if (!std::isfinite(y)) throw Error(ErrorCode::FitFailed, "non-finite transformed series");
  }

  const double t_stop = traj.samples.back().t;
  fit.t_lo = traj.samples[std::min(fit.window_u.lo, fit.window_v.lo)].t;
  fit.t_hi = t_stop;
  const double span = t_stop - fit.t_lo;
  if (!(span > 0.0)) throw Error(ErrorCode::FitFailed, "degenerate time window");

  const double n_total = static_cast<double>(su.y.size() + sv.y.size());
  auto objective = [&](double log_delta) {
    const double d = std::exp(log_delta);
    return (detail::fit_offset(su, d).second + detail::fit_offset(sv, d).second) / n_total;
  };

  // Coarse scan in log δ, then Brent refinement inside the best bracket.
  const double hi = std::log(10.0 * span);
  const double lo = std::log(std::max(10.0 * span * 1e-14,
                                      8.0 * std::numeric_limits<double>::epsilon() * t_stop));
  const std::size_t K = std::max<std::size_t>(opt.scan_points, 3);
  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> grid(K);
  for (std::size_t k = 0; k < K; ++k) {
    grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(K - 1);
    const double v = objective(grid[k]);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  const double a_lo = grid[best == 0 ? 0 : best - 1];
  const double a_hi = grid[best + 1 == K ? K - 1 : best + 1];
  const auto r = boost::math::tools::brent_find_minima(objective, a_lo, a_hi, 52);
  double log_delta = r.first;
  if (objective(log_delta) > best_val) log_delta = grid[best];

  const double delta = std::exp(log_delta);
  fit.T_hat = t_stop + delta;
  if (!(fit.T_hat > t_stop)) throw Error(ErrorCode::FitFailed, "T_hat not above t_stop");
  fit.C1_hat = std::exp(detail::fit_offset(su, delta).first);
  fit.C2_hat = std::exp(detail::fit_offset(sv, delta).first);
  fit.residual = std::sqrt(objective(log_delta));
  if (!(fit.residual <= opt.max_residual)) {
    throw Error(ErrorCode::FitFailed, "fit residual " + std::to_string(fit.residual) +
                                          " above " + std::to_string(opt.max_residual));
  }
  return fit;
}

struct RateFit {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  std::size_t samples_u = 0;
  std::size_t samples_v = 0;
};

namespace detail {

// Slope of y against -log(T-t) over the window; samples with T-t<=0 skipped.
inline std::pair<double, std::size_t> regress_slope(const Trajectory& traj, const FitWindow& w,
                                                    double T_hat, const RateAnsatz& a, bool u) {
  const double t_stop = traj.samples.back().t;
  const double delta = T_hat - t_stop;
  std::vector<double> xs, ys;
  for (std::size_t i = w.lo; i <= w.hi; ++i) {
    const auto& s = traj.samples[i];
    const double d = (t_stop - s.t) + delta;
    const double y = u ? a.y_u(s.M) : a.y_v(s.Nv);
    if (d > 0.0 && std::isfinite(y)) {
      xs.push_back(-std::log(d));
      ys.push_back(y);
    }
  }
  if (xs.size() < 10) {
    throw Error(ErrorCode::FitFailed, "only " + std::to_string(xs.size()) + " usable samples");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::FitFailed, "degenerate regression abscissa");
  return {sxy / sxx, xs.size()};
}

}  // namespace detail

/// Free-exponent regression on the tail window: alpha_hat = 2·slope.
inline RateFit fit_rate(const Trajectory& traj, const ProblemParams& prm, double T_hat,
                        const FitOptions& opt = {}) {
  const RateAnsatz a = rate_ansatz(prm);
  RateFit out;
  const auto [wu, wv] = detail::fit_windows(traj, opt);
  const auto [su, nu] = detail::regress_slope(traj, wu, T_hat, a, true);
  const auto [sv, nv] = detail::regress_slope(traj, wv, T_hat, a, false);
  out.alpha_hat = 2.0 * su;
  out.beta_hat = 2.0 * sv;
  out.samples_u = nu;
  out.samples_v = nv;
  return out;
}

struct RateBoundReport {
  double rate_sup_u = 0.0;  ///< sup over the window of e^{y_u}(T̂-t)^{k_u/2}
  double rate_sup_v = 0.0;
  /// Largest later/earlier ratio over the last half-decade of T̂-t.
  double increase_u = 0.0;
  double increase_v = 0.0;
  /// max/min over the last half-decade.
  double variation_u = 0.0;
  double variation_v = 0.0;
  std::size_t tail_samples_u = 0;
  std::size_t tail_samples_v = 0;
  bool finite = false;
  bool passed = false;
};

/// 20% allowance on "non-increasing" over the last half-decade.
inline constexpr double kRateTrendTolerance = 1.2;

namespace detail {

struct TailStats {
  double sup = 0.0;
  double increase = 1.0;
  double variation = 1.0;
  std::size_t tail = 0;
};

inline TailStats rate_tail(const Trajectory& traj, const FitWindow& w, double T_hat, double k,
                           const RateAnsatz& a, bool u) {
  const double t_stop = traj.samples.back().t;
  const double delta = T_hat - t_stop;
  TailStats st;
  st.sup = -std::numeric_limits<double>::infinity();
  const double d_last = (t_stop - traj.samples[w.hi].t) + delta;
  double running_min = std::numeric_limits<double>::infinity();
  double tail_max = 0.0;
  for (std::size_t i = w.lo; i <= w.hi; ++i) {
    const auto& s = traj.samples[i];
    const double d = (t_stop - s.t) + delta;
    const double y = u ? a.y_u(s.M) : a.y_v(s.Nv);
    const double g = std::exp(y + 0.5 * k * std::log(d));
    st.sup = std::max(st.sup, g);
    if (d <= std::sqrt(10.0) * d_last) {
      if (st.tail > 0) st.increase = std::max(st.increase, g / running_min);
      running_min = std::min(running_min, g);
      tail_max = std::max(tail_max, g);
      ++st.tail;
    }
  }
  st.variation = tail_max / running_min;
  return st;
}

}  // namespace detail

/// Sup of e^{y}(T̂-t)^{k/2} over the tail window (e^M(T̂-t)^{α/2} for
/// ExpPower) and its trend over the last half-decade of T̂-t.
inline RateBoundReport rate_bound_check(const Trajectory& traj, const ProblemParams& prm,
                                        double T_hat, double alpha, double beta,
                                        const FitOptions& opt = {}) {
  RateAnsatz a = rate_ansatz(prm);
  a.k_u = alpha;
  a.k_v = beta;
  const auto [wu, wv] = detail::fit_windows(traj, opt);
  const auto tu = detail::rate_tail(traj, wu, T_hat, alpha, a, true);
  const auto tv = detail::rate_tail(traj, wv, T_hat, beta, a, false);
  RateBoundReport r;
  r.rate_sup_u = tu.sup;
  r.rate_sup_v = tv.sup;
  r.increase_u = tu.increase;
  r.increase_v = tv.increase;
  r.variation_u = tu.variation;
  r.variation_v = tv.variation;
  r.tail_samples_u = tu.tail;
  r.tail_samples_v = tv.tail;
  r.finite = std::isfinite(tu.sup) && std::isfinite(tv.sup) && std::isfinite(tu.increase) &&
             std::isfinite(tv.increase);
  r.passed = r.finite && tu.increase <= kRateTrendTolerance && tv.increase <= kRateTrendTolerance;
  return r;
}

inline RateBoundReport rate_bound_check(const Trajectory& traj, const ProblemParams& prm,
                                        double T_hat, const FitOptions& opt = {}) {
  const RateAnsatz a = rate_ansatz(prm);
  return rate_bound_check(traj, prm, T_hat, a.k_u, a.k_v, opt);
}

enum class CheckStatus { Pass, Fail, Inconclusive };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

struct InteriorReport {
  double a = 0.0;
  double interior_sup_u = 0.0;  ///< sup over the run of max_{r<=a} u
  double interior_sup_v = 0.0;
  double ratio_u = 0.0;  ///< interior sup / boundary max at t_stop
  double ratio_v = 0.0;
  /// Relative growth of the interior sup over the final decade of T̂-t.
  double final_decade_growth_u = 0.0;
  double final_decade_growth_v = 0.0;
  std::size_t final_decade_samples = 0;
  /// C_hat (R²-a²)^{-2m}, m = k/2; reported, not gated.
  double envelope_u = std::numeric_limits<double>::quiet_NaN();
  double envelope_v = std::numeric_limits<double>::quiet_NaN();
  bool boundary_at_threshold = false;
  CheckStatus status = CheckStatus::Inconclusive;
};

/// 5% allowance on interior growth over the final decade.
inline constexpr double kInteriorGrowthTolerance = 0.05;

/// Interior plateau check. Interior maxima come from the samples when `a`
/// matches the run's tracking radius, otherwise from the stored snapshots.
inline InteriorReport boundary_set_check(const Trajectory& traj, const ProblemParams& prm, double a,
                                         const std::optional<BlowupFit>& fit = std::nullopt) {
  if (!(a > 0.0 && a < prm.R)) {
    throw Error(ErrorCode::BadRadius, "0<a<R required, got a=" + std::to_string(a));
  }
  InteriorReport rep;
  rep.a = a;
  const auto& last = traj.stop.last_state;
  const std::size_t N = last.u.size();
  const RadialGrid grid(prm.R, N);

  // (t, sup_u, sup_v) series
  std::vector<double> ts, su, sv;
  const auto ia = static_cast<std::size_t>(std::floor(a / grid.dr() + 1e-9));
  if (ia == traj.interior_index) {
    for (const auto& s : traj.samples) {
      ts.push_back(s.t);
      su.push_back(s.sup_u_interior);
      sv.push_back(s.sup_v_interior);
    }
  } else {
    for (const auto& st : traj.snapshots) {
      ts.push_back(st.t);
      su.push_back(*std::max_element(st.u.begin(), st.u.begin() + ia + 1));
      sv.push_back(*std::max_element(st.v.begin(), st.v.begin() + ia + 1));
    }
  }
  rep.interior_sup_u = *std::max_element(su.begin(), su.end());
  rep.interior_sup_v = *std::max_element(sv.begin(), sv.end());
  rep.ratio_u = rep.interior_sup_u / *std::max_element(last.u.begin(), last.u.end());
  rep.ratio_v = rep.interior_sup_v / *std::max_element(last.v.begin(), last.v.end());
  rep.boundary_at_threshold = traj.stop.reason == StopReason::BlowupThreshold;

  if (!rep.boundary_at_threshold || !fit) {
    rep.status = CheckStatus::Inconclusive;
    return rep;
  }

  const double T = fit->T_hat;
  const double d_last = T - ts.back();
  double min_u = std::numeric_limits<double>::infinity(), max_u = 0.0;
  double min_v = std::numeric_limits<double>::infinity(), max_v = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double d = (ts.back() - ts[i]) + d_last;
    if (d <= 10.0 * d_last) {
      min_u = std::min(min_u, su[i]);
      max_u = std::max(max_u, su[i]);
      min_v = std::min(min_v, sv[i]);
      max_v = std::max(max_v, sv[i]);
      ++rep.final_decade_samples;
    }
  }
  rep.final_decade_growth_u = max_u / min_u - 1.0;
  rep.final_decade_growth_v = max_v / min_v - 1.0;

  const RateAnsatz an = rate_ansatz(prm);
  const double h = prm.R * prm.R - a * a;
  rep.envelope_u = fit->C1_hat * std::pow(h, -an.k_u);
  rep.envelope_v = fit->C2_hat * std::pow(h, -an.k_v);

  const bool ok = rep.final_decade_growth_u < kInteriorGrowthTolerance &&
                  rep.final_decade_growth_v < kInteriorGrowthTolerance;
  rep.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
  return rep;
}

struct MonotonicityReport {
  bool positivity = true;   ///< u, v >= min of the initial data at stored states
  bool radial = true;       ///< nodal differences >= -tol at stored states with t > 0
  bool temporal = true;     ///< M, N nondecreasing across samples within tol
  bool argmax_boundary = true;  ///< argmax u, v = N-1 at every sample with t > 0
  double worst_radial = 0.0;    ///< most negative scaled radial difference
  double worst_temporal = 0.0;  ///< most negative scaled change in M or N
  std::size_t first_interior_argmax = 0;  ///< sample index, if argmax_boundary fails
  bool passed() const { return positivity && radial && temporal && argmax_boundary; }
};

/// Tolerance 1e-8·(1+M(t)) for the discrete monotonicity properties.
inline constexpr double kTolMono = 1e-8;

inline MonotonicityReport monotonicity_check(const Trajectory& traj) {
  MonotonicityReport rep;
  if (traj.samples.empty() || traj.snapshots.empty()) return rep;
  const auto& first = traj.snapshots.front();
  const double floor_u = *std::min_element(first.u.begin(), first.u.end());
  const double floor_v = *std::min_element(first.v.begin(), first.v.end());
  const std::size_t last = first.u.size() - 1;
  for (const auto& st : traj.snapshots) {
    const double M = std::max(*std::max_element(st.u.begin(), st.u.end()),
                              *std::max_element(st.v.begin(), st.v.end()));
    const double tol = kTolMono * (1.0 + M);
    for (std::size_t i = 0; i < st.u.size(); ++i) {
      if (st.u[i] < floor_u - tol || st.v[i] < floor_v - tol) rep.positivity = false;
      if (i + 1 < st.u.size() && st.t > first.t) {
        const double d = std::min(st.u[i + 1] - st.u[i], st.v[i + 1] - st.v[i]);
        rep.worst_radial = std::min(rep.worst_radial, d / (1.0 + M));
        if (d < -tol) rep.radial = false;
      }
    }
  }
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const auto& s = traj.samples[k];
    if (k > 0) {
      const auto& prev = traj.samples[k - 1];
      const double tol = kTolMono * (1.0 + std::max(s.M, s.Nv));
      const double d = std::min(s.M - prev.M, s.Nv - prev.Nv);
      rep.worst_temporal = std::min(rep.worst_temporal, d / (1.0 + std::max(s.M, s.Nv)));
      if (d < -tol) rep.temporal = false;
      if ((s.argmax_u != last || s.argmax_v != last) && rep.argmax_boundary) {
        rep.argmax_boundary = false;
        rep.first_interior_argmax = k;
      }
    }
  }
  return rep;
}

}  // namespace blowup
