#pragma once

/// @file solver.hpp
/// @brief Explicit method-of-lines integrator for the radially reduced system
///
///   u_t = u_rr + ((n-1)/r) u_r,   v_t = v_rr + ((n-1)/r) v_r,   0 <= r <= R,
///
/// with u_r(R) = f(v(R)), v_r(R) = g(u(R)) closed by a centered ghost node and
/// the symmetry limit Δu(0) = n u_rr(0) at the origin. Time steps adapt to
/// both the diffusion limit and a cap on the relative growth per step, so the
/// run can follow the solution until the boundary flux is about to overflow.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "blowup/error.hpp"
#include "blowup/model.hpp"

namespace blowup {

struct SolverConfig {
  std::size_t N = 201;
  double cfl = 0.4;          ///< fraction of the diffusion limit dr²/n
  double growth_cap = 0.1;   ///< max relative change of max(u,v) per step
  double u_stop = 25.0;      ///< stop once the flux argument (u^q, v^p, q·u, ...) exceeds this
  std::optional<double> t_end;
  std::size_t record_every = 1;
  double interior_radius = 0.5;
  /// Full field snapshots every k steps (0: only the initial and final state).
  std::size_t snapshot_every = 50;
  std::size_t max_steps = 50'000'000;
  /// Sanity mode: both boundary fluxes frozen at this value.
  std::optional<double> frozen_flux;
};

inline void validate(const SolverConfig& cfg, const ProblemParams& prm) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidParams, msg); };
  if (cfg.N < kMinGridNodes) throw Error(ErrorCode::GridTooCoarse, "N < 16");
  if (!(cfg.cfl > 0.0 && cfg.cfl <= 0.5)) fail("0<cfl<=0.5 required");
  if (!(cfg.growth_cap > 0.0 && cfg.growth_cap <= 0.5)) fail("0<growth_cap<=0.5 required");
  if (!(cfg.u_stop < kOverflowGuard)) fail("u_stop<700 required");
  if (!(cfg.u_stop > 0.0)) fail("u_stop>0 required");
  if (cfg.record_every < 1) fail("record_every>=1 required");
  if (!(cfg.interior_radius > 0.0 && cfg.interior_radius < prm.R)) fail("0<a<R required");
  if (cfg.t_end && !(*cfg.t_end > 0.0)) fail("t_end>0 required");
}

/// Second-order radial Laplacian. Node 0 uses 2n(f1-f0)/dr². Node N-1 uses
/// `ghost` as f_N when given, otherwise the quadratic extrapolation
/// 3f_{N-1} - 3f_{N-2} + f_{N-3}.
inline void radial_laplacian(std::span<const double> f, const RadialGrid& grid, int n,
                             std::optional<double> ghost, std::span<double> out) {
  const std::size_t N = f.size();
  const double dr = grid.dr();
  const double inv_dr2 = 1.0 / (dr * dr);
  out[0] = 2.0 * n * (f[1] - f[0]) * inv_dr2;
  for (std::size_t i = 1; i < N; ++i) {
    const double right =
        i + 1 < N ? f[i + 1] : (ghost ? *ghost : 3.0 * f[N - 1] - 3.0 * f[N - 2] + f[N - 3]);
    const double c = (n - 1) * dr / (2.0 * grid.node(i));
    out[i] = ((right - 2.0 * f[i] + f[i - 1]) + c * (right - f[i - 1])) * inv_dr2;
  }
}

inline std::vector<double> radial_laplacian(std::span<const double> f, const RadialGrid& grid,
                                            int n, std::optional<double> ghost = std::nullopt) {
  std::vector<double> out(f.size());
  radial_laplacian(f, grid, n, ghost, out);
  return out;
}

struct GhostValues {
  double u;
  double v;
};

/// Ghost values for (ghost - f_{N-2})/(2dr) = prescribed flux.
inline GhostValues apply_neumann(const FieldState& s, const ProblemParams& prm,
                                 const RadialGrid& grid,
                                 std::optional<double> frozen_flux = std::nullopt) {
  const std::size_t N = grid.size();
  const double two_dr = 2.0 * grid.dr();
  const double fu = frozen_flux ? *frozen_flux : boundary_flux(prm.flux, s.v[N - 1], prm.p);
  const double fv = frozen_flux ? *frozen_flux : boundary_flux(prm.flux, s.u[N - 1], prm.q);
  return {s.u[N - 2] + two_dr * fu, s.v[N - 2] + two_dr * fv};
}

/// Smallest admissible step relative to dr².
inline constexpr double kStepUnderflowFactor = 1e-16;

/// dt = min(cfl·dr²/n, growth_cap·(1+max(u,v))/max|rate|). Throws StepUnderflow
/// below 1e-16·dr².
inline double adapt_dt(const FieldState& s, const SolverConfig& cfg, const RadialGrid& grid,
                       int n, std::span<const double> rate_u, std::span<const double> rate_v) {
  const double dr2 = grid.dr() * grid.dr();
  double dt = cfg.cfl * dr2 / std::max(1, n);
  double max_rate = 0.0;
  for (double r : rate_u) max_rate = std::max(max_rate, std::abs(r));
  for (double r : rate_v) max_rate = std::max(max_rate, std::abs(r));
  if (max_rate > 0.0) {
    const double max_field = std::max(*std::max_element(s.u.begin(), s.u.end()),
                                      *std::max_element(s.v.begin(), s.v.end()));
    dt = std::min(dt, cfg.growth_cap * (1.0 + max_field) / max_rate);
  }
  if (!(dt >= kStepUnderflowFactor * dr2)) {
    throw Error(ErrorCode::StepUnderflow, "dt=" + std::to_string(dt) + " below 1e-16*dr^2");
  }
  return dt;
}

/// One recorded point of a run.
struct Sample {
  double t = 0.0;
  double dt = 0.0;  ///< step that produced this state (0 for the initial state)
  double M = 0.0;   ///< max_r u
  double Nv = 0.0;  ///< max_r v
  std::size_t argmax_u = 0;
  std::size_t argmax_v = 0;
  double sup_u_interior = 0.0;  ///< max over r <= a of u
  double sup_v_interior = 0.0;
  double flux_u = 0.0;  ///< g(u(R,t))
  double flux_v = 0.0;  ///< f(v(R,t))
};

enum class StopReason { BlowupThreshold, TimeLimit, StepUnderflow };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::BlowupThreshold: return "BlowupThreshold";
    case StopReason::TimeLimit: return "TimeLimit";
    case StopReason::StepUnderflow: return "StepUnderflow";
  }
  return "Unknown";
}

struct StopInfo {
  StopReason reason = StopReason::TimeLimit;
  double t_stop = 0.0;
  FieldState last_state;
  double arg_u = 0.0;  ///< flux argument of u(R) with exponent q at the stop
  double arg_v = 0.0;  ///< flux argument of v(R) with exponent p at the stop
  bool nonfinite_guard = false;
  std::size_t steps = 0;
};

struct Trajectory {
  std::vector<Sample> samples;
  std::vector<FieldState> snapshots;
  StopInfo stop;
  std::size_t interior_index = 0;  ///< last node with r <= a
};

namespace detail {

inline std::size_t last_argmax(const std::vector<double>& f) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (f[i] >= f[k]) k = i;
  }
  return k;
}

inline double flux_or_inf(FluxFamily fam, double w, double e, std::optional<double> frozen) {
  if (frozen) return *frozen;
  try {
    return boundary_flux(fam, w, e);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

inline Sample make_sample(const FieldState& s, double dt, std::size_t ia, const ProblemParams& prm,
                          std::optional<double> frozen) {
  Sample out;
  out.t = s.t;
  out.dt = dt;
  out.argmax_u = last_argmax(s.u);
  out.argmax_v = last_argmax(s.v);
  out.M = s.u[out.argmax_u];
  out.Nv = s.v[out.argmax_v];
  out.sup_u_interior = *std::max_element(s.u.begin(), s.u.begin() + ia + 1);
  out.sup_v_interior = *std::max_element(s.v.begin(), s.v.begin() + ia + 1);
  out.flux_u = flux_or_inf(prm.flux, s.u.back(), prm.q, frozen);
  out.flux_v = flux_or_inf(prm.flux, s.v.back(), prm.p, frozen);
  return out;
}

/// Reusable buffers for forward-Euler steps.
class EulerStepper {
 public:
  EulerStepper(const ProblemParams& prm, const SolverConfig& cfg, const RadialGrid& grid)
      : prm_(prm), cfg_(cfg), grid_(grid), lu_(grid.size()), lv_(grid.size()) {}

  /// Advances `s` in place; returns the step taken.
  double advance(FieldState& s) {
    const auto ghost = apply_neumann(s, prm_, grid_, cfg_.frozen_flux);
    radial_laplacian(s.u, grid_, prm_.n, ghost.u, lu_);
    radial_laplacian(s.v, grid_, prm_.n, ghost.v, lv_);
    double dt = adapt_dt(s, cfg_, grid_, prm_.n, lu_, lv_);
    if (cfg_.t_end) dt = std::min(dt, *cfg_.t_end - s.t);
    if (!(s.t + dt > s.t)) throw Error(ErrorCode::StepUnderflow, "time no longer advances");
    bool finite = true;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      s.u[i] += dt * lu_[i];
      s.v[i] += dt * lv_[i];
      finite = finite && std::isfinite(s.u[i]) && std::isfinite(s.v[i]);
    }
    s.t += dt;
    if (!finite) throw Error(ErrorCode::NumericalBlowupGuard, "non-finite field after step");
    return dt;
  }

 private:
  const ProblemParams& prm_;
  const SolverConfig& cfg_;
  const RadialGrid& grid_;
  std::vector<double> lu_;
  std::vector<double> lv_;
};

}  // namespace detail

/// Single forward-Euler step with ghost-node Neumann closure.
inline FieldState step(const FieldState& state, const ProblemParams& prm, const RadialGrid& grid,
                       const SolverConfig& cfg) {
  FieldState next = state;
  detail::EulerStepper(prm, cfg, grid).advance(next);
  return next;
}

/// Integrates until the flux argument exceeds u_stop, t_end is reached, or the
/// step underflows.
inline Trajectory run(const ProblemParams& prm, const SolverConfig& cfg) {
  validate(prm);
  validate(cfg, prm);
  const RadialGrid grid = make_grid(prm.R, cfg.N);
  FieldState s = initial_state(prm, grid);

  Trajectory traj;
  traj.interior_index = std::min(
      grid.size() - 1, static_cast<std::size_t>(std::floor(cfg.interior_radius / grid.dr() + 1e-9)));
  const std::size_t ia = traj.interior_index;
  const std::size_t last = grid.size() - 1;

  traj.samples.push_back(detail::make_sample(s, 0.0, ia, prm, cfg.frozen_flux));
  traj.snapshots.push_back(s);

  detail::EulerStepper stepper(prm, cfg, grid);
  std::size_t steps = 0;
  double last_dt = 0.0;
  bool last_recorded = true;
  StopInfo& stop = traj.stop;

  for (;;) {
    stop.arg_u = flux_argument(prm.flux, s.u[last], prm.q);
    stop.arg_v = flux_argument(prm.flux, s.v[last], prm.p);
    if (!cfg.frozen_flux && std::max(stop.arg_u, stop.arg_v) > cfg.u_stop) {
      stop.reason = StopReason::BlowupThreshold;
      break;
    }
    if (cfg.t_end && s.t >= *cfg.t_end) {
      stop.reason = StopReason::TimeLimit;
      break;
    }
    if (steps >= cfg.max_steps) {
      stop.reason = StopReason::TimeLimit;
      break;
    }
    FieldState before = s;
    try {
      last_dt = stepper.advance(s);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::StepUnderflow) {
        stop.reason = StopReason::StepUnderflow;
      } else if (e.code() == ErrorCode::NumericalBlowupGuard || e.code() == ErrorCode::FluxOverflow) {
        stop.reason = StopReason::BlowupThreshold;
        stop.nonfinite_guard = true;
      } else {
        throw;
      }
      s = std::move(before);
      break;
    }
    ++steps;
    last_recorded = steps % cfg.record_every == 0;
    if (last_recorded) traj.samples.push_back(detail::make_sample(s, last_dt, ia, prm, cfg.frozen_flux));
    if (cfg.snapshot_every > 0 && steps % cfg.snapshot_every == 0) traj.snapshots.push_back(s);
  }

  if (!last_recorded) traj.samples.push_back(detail::make_sample(s, last_dt, ia, prm, cfg.frozen_flux));
  if (traj.snapshots.back().t != s.t) traj.snapshots.push_back(s);
  stop.t_stop = s.t;
  stop.steps = steps;
  stop.last_state = std::move(s);
  return traj;
}

}  // namespace blowup
