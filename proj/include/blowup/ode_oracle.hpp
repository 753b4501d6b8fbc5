#pragma once

/// @file ode_oracle.hpp
/// @brief Equality form of the coupled differential inequality
///
///   A' = c B^p / √(T-t),   B' = c A^q / √(T-t),
///
/// its self-similar solutions A = C_A (T-t)^{-α/2}, B = C_B (T-t)^{-β/2},
/// and a numerical check of the upper rate bounds.
///
/// Integration runs in σ = log((T-t0)/(T-t)), where the singular factor
/// becomes dA/dσ = c √(T-t0) e^{-σ/2} B^p and a finite σ range covers
/// (T-t) shrinking by many decades.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "blowup/error.hpp"
#include "blowup/model.hpp"

namespace blowup {

struct OdeParams {
  double c = 0.5;
  double p = 2.0;
  double q = 2.0;
  double T = 1.0;
  double A0 = 1.0;
  double B0 = 1.0;
  double t0 = 0.0;
};

inline void validate(const OdeParams& o) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidParams, m); };
  if (!(o.c > 0.0)) fail("c>0 required");
  if (!(o.p * o.q > 1.0)) throw Error(ErrorCode::DegenerateExponents, "pq>1 required");
  if (!(o.t0 >= 0.0 && o.t0 < o.T)) fail("0<=t0<T required");
  if (!(o.A0 > 0.0 && o.B0 > 0.0)) fail("A0>0 and B0>0 required");
}

struct OdeSeries {
  std::vector<double> t;
  std::vector<double> A;
  std::vector<double> B;
  std::vector<double> remaining;  ///< T - t, kept separately to avoid cancellation
  bool overflow = false;  ///< stopped because A or B exceeded the cap
  std::size_t size() const { return t.size(); }
};

struct OdeOptions {
  std::size_t samples = 2000;  ///< uniform in σ over the requested range
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double cap = 1e12;
};

/// Integrates to t0 + t_stop_frac·(T-t0), or until A or B exceeds the cap.
inline OdeSeries integrate_system(const OdeParams& prm, double t_stop_frac,
                                  const OdeOptions& opt = {}) {
  validate(prm);
  if (!(t_stop_frac > 0.0 && t_stop_frac < 1.0)) {
    throw Error(ErrorCode::InvalidParams, "t_stop_frac in (0,1) required");
  }
  using State = std::array<double, 2>;
  namespace ode = boost::numeric::odeint;

  const double span = prm.T - prm.t0;
  const double k = prm.c * std::sqrt(span);
  auto rhs = [&](const State& x, State& dx, double s) {
    const double damp = k * std::exp(-0.5 * s);
    dx[0] = damp * std::pow(std::max(x[1], 0.0), prm.p);
    dx[1] = damp * std::pow(std::max(x[0], 0.0), prm.q);
  };
  const double s_end = -std::log1p(-t_stop_frac);
  const std::size_t K = std::max<std::size_t>(opt.samples, 2);

  OdeSeries out;
  auto stepper = ode::make_dense_output(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<State>());
  State x{prm.A0, prm.B0};
  stepper.initialize(x, 0.0, 1e-6);
  auto record = [&](double s, const State& st) {
    out.remaining.push_back(span * std::exp(-s));
    out.t.push_back(prm.T - out.remaining.back());
    out.A.push_back(st[0]);
    out.B.push_back(st[1]);
  };
  record(0.0, x);
  std::size_t next = 1;
  while (next < K) {
    try {
      stepper.do_step(rhs);
    } catch (const std::runtime_error&) {  // step control gave up near the singularity
      out.overflow = true;
      break;
    }
    const State& cur = stepper.current_state();
    const bool bad = !std::isfinite(cur[0]) || !std::isfinite(cur[1]);
    while (next < K) {
      const double s = s_end * static_cast<double>(next) / static_cast<double>(K - 1);
      if (s > stepper.current_time()) break;
      State st;
      stepper.calc_state(s, st);
      if (!std::isfinite(st[0]) || !std::isfinite(st[1]) || st[0] > opt.cap || st[1] > opt.cap) {
        out.overflow = true;
        break;
      }
      record(s, st);
      ++next;
    }
    if (out.overflow || bad || cur[0] > opt.cap || cur[1] > opt.cap) {
      out.overflow = out.overflow || next < K;
      break;
    }
  }
  if (out.size() < 10) {
    throw Error(ErrorCode::ParamsTooStiff,
                "overflow after " + std::to_string(out.size()) + " samples");
  }
  return out;
}

struct SelfSimilarConstants {
  double C_A;
  double C_B;
};

/// Positive solution of (α/2)C_A = c C_B^p, (β/2)C_B = c C_A^q:
/// C_B^{pq-1} = β α^q / (2^{q+1} c^{q+1}), C_A = (2c/α) C_B^p.
inline SelfSimilarConstants self_similar_constants(double p, double q, double c) {
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidParams, "c>0 required");
  const auto ex = rate_exponents(p, q);
  const double rhs = ex.beta * std::pow(ex.alpha, q) / (std::pow(2.0, q + 1.0) * std::pow(c, q + 1.0));
  const double CB = std::pow(rhs, 1.0 / (p * q - 1.0));
  return {2.0 * c / ex.alpha * std::pow(CB, p), CB};
}

struct LemmaReport {
  double alpha = 0.0;
  double beta = 0.0;
  double alpha_fit = 0.0;
  double beta_fit = 0.0;
  double C_A = 0.0;  ///< sup over the tail of A (T-t)^{α/2}
  double C_B = 0.0;  ///< sup over the tail of B (T-t)^{β/2}
  double increase_A = 0.0;  ///< largest later/earlier ratio of A (T-t)^{α/2} over the tail
  double increase_B = 0.0;
  std::size_t tail_samples = 0;
  bool diverged = false;  ///< A or B reached 100× its initial size
  bool passed = false;
};

inline constexpr double kLemmaExponentSlack = 1.05;
inline constexpr double kLemmaTrendTolerance = 1.1;

/// Fits log A and log B against -log(T-t) over the second half of the series
/// (in log(T-t)); pass iff the divergence proxy was reached, both fitted
/// exponents are within 5% above α, β and the scaled products do not
/// increase by more than 10% across the tail.
inline LemmaReport verify_lemma_bounds(const OdeSeries& s, const OdeParams& prm) {
  if (s.size() < 10) {
    throw Error(ErrorCode::FitFailed, "series too short: " + std::to_string(s.size()) + " samples");
  }
  const auto ex = rate_exponents(prm.p, prm.q);
  LemmaReport rep;
  rep.alpha = ex.alpha;
  rep.beta = ex.beta;
  const double scale = 100.0 * std::max(prm.A0, prm.B0);
  rep.diverged = s.A.back() >= scale || s.B.back() >= scale;

  // tail: last half of the σ = -log(T-t) range covered
  auto rem = [&](std::size_t i) {
    return s.remaining.size() == s.size() ? s.remaining[i] : prm.T - s.t[i];
  };
  const double x_first = -std::log(rem(0));
  const double x_last = -std::log(rem(s.size() - 1));
  const double x_mid = 0.5 * (x_first + x_last);
  std::vector<double> xs, la, lb, ga, gb;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = rem(i);
    const double x = -std::log(d);
    if (x < x_mid) continue;
    xs.push_back(x);
    la.push_back(std::log(s.A[i]));
    lb.push_back(std::log(s.B[i]));
    ga.push_back(s.A[i] * std::pow(d, 0.5 * ex.alpha));
    gb.push_back(s.B[i] * std::pow(d, 0.5 * ex.beta));
  }
  rep.tail_samples = xs.size();
  if (xs.size() < 5) throw Error(ErrorCode::FitFailed, "tail too short");

  auto slope = [&](const std::vector<double>& y) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (y[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (!(sxx > 0.0)) throw Error(ErrorCode::FitFailed, "degenerate abscissa");
    return sxy / sxx;
  };
  auto increase = [](const std::vector<double>& g) {
    double lo = g.front(), worst = 1.0;
    for (double v : g) {
      worst = std::max(worst, v / lo);
      lo = std::min(lo, v);
    }
    return worst;
  };
  rep.alpha_fit = 2.0 * slope(la);
  rep.beta_fit = 2.0 * slope(lb);
  rep.C_A = *std::max_element(ga.begin(), ga.end());
  rep.C_B = *std::max_element(gb.begin(), gb.end());
  rep.increase_A = increase(ga);
  rep.increase_B = increase(gb);
  rep.passed = rep.diverged && rep.alpha_fit <= kLemmaExponentSlack * ex.alpha &&
               rep.beta_fit <= kLemmaExponentSlack * ex.beta && std::isfinite(rep.C_A) &&
               std::isfinite(rep.C_B) && rep.increase_A <= kLemmaTrendTolerance &&
               rep.increase_B <= kLemmaTrendTolerance;
  return rep;
}

/// B0 such that, with the given A0, the solution blows up exactly at T (the
/// stable manifold of the self-similar orbit), by bisection on whether the
/// solution overflows before σ_max or falls below the orbit.
inline double critical_initial_value(OdeParams prm, double sigma_max = 30.0,
                                     std::size_t iterations = 200) {
  validate(prm);
  const auto cs = self_similar_constants(prm.p, prm.q, prm.c);
  const auto ex = rate_exponents(prm.p, prm.q);
  const double span = prm.T - prm.t0;
  const double frac = -std::expm1(-sigma_max);
  OdeOptions opt;
  opt.samples = 200;
  // true: B0 too large (blows up before T)
  auto too_large = [&](double b0) {
    prm.B0 = b0;
    try {
      const auto s = integrate_system(prm, frac, opt);
      if (s.overflow) return true;
      const double d = span * std::exp(-sigma_max);
      return s.B.back() * std::pow(d, 0.5 * ex.beta) > cs.C_B;
    } catch (const Error&) {
      return true;
    }
  };
  double lo = 0.0, hi = std::max(prm.B0, 1e-3);
  while (!too_large(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  for (std::size_t i = 0; i < iterations && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (too_large(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace blowup
