#pragma once

/// @file model.hpp
/// @brief Problem data model for the coupled heat system on a ball B_R in R^n:
///
///   u_t = Δu,  v_t = Δv             in B_R × (0, T)
///   ∂u/∂η = f(v), ∂v/∂η = g(u)      on ∂B_R
///
/// with one of three boundary-flux families (see FluxFamily), radial
/// initial data, and a uniform radial grid on [0, R].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "blowup/error.hpp"

namespace blowup {

/// Boundary flux families. For exponent e and boundary value w:
///   ExpPower:  exp(w^e)   (f(v) = e^{v^p}, g(u) = e^{u^q})
///   Power:     w^e        (f(v) = v^p,     g(u) = u^q)
///   ExpLinear: exp(e·w)   (f(v) = e^{pv},  g(u) = e^{qu})
enum class FluxFamily { ExpPower, Power, ExpLinear };

inline std::string to_string(FluxFamily f) {
  switch (f) {
    case FluxFamily::ExpPower: return "exp_power";
    case FluxFamily::Power: return "power";
    case FluxFamily::ExpLinear: return "exp_linear";
  }
  return "unknown";
}

inline FluxFamily parse_flux_family(const std::string& s) {
  if (s == "exp_power") return FluxFamily::ExpPower;
  if (s == "power") return FluxFamily::Power;
  if (s == "exp_linear") return FluxFamily::ExpLinear;
  throw Error(ErrorCode::InvalidParams, "unknown flux family '" + s + "'");
}

/// u0(r) = a_u + b_u r², v0(r) = a_v + b_v r².
struct QuadraticRadial {
  double a_u = 0.5;
  double b_u = 0.5;
  double a_v = 0.5;
  double b_v = 0.5;
};

/// Nodal values on the grid the run uses; lengths must equal the node count.
struct Tabulated {
  std::vector<double> u;
  std::vector<double> v;
};

using InitialDataSpec = std::variant<QuadraticRadial, Tabulated>;

struct ProblemParams {
  double p = 2.0;
  double q = 2.0;
  double R = 1.0;
  int n = 2;
  FluxFamily flux = FluxFamily::ExpPower;
  InitialDataSpec initial = QuadraticRadial{};
};

/// Throws InvalidParams naming the first violated constraint.
inline void validate(const ProblemParams& prm) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidParams, msg); };
  if (!(prm.R > 0.0) || !std::isfinite(prm.R)) fail("R>0 required");
  if (prm.n < 1) fail("n>=1 required");
  switch (prm.flux) {
    case FluxFamily::ExpPower:
      if (!(prm.p > 1.0)) fail("p>1 required for exp_power");
      if (!(prm.q > 1.0)) fail("q>1 required for exp_power");
      break;
    case FluxFamily::Power:
      if (!(prm.p > 1.0)) fail("p>1 required for power");
      if (!(prm.q > 1.0)) fail("q>1 required for power");
      if (!(prm.p * prm.q > 1.0)) fail("pq>1 required for power");
      break;
    case FluxFamily::ExpLinear:
      if (!(prm.p > 0.0)) fail("p>0 required for exp_linear");
      if (!(prm.q > 0.0)) fail("q>0 required for exp_linear");
      break;
  }
}

struct RateExponents {
  double alpha;
  double beta;
};

/// alpha = (p+1)/(pq-1), beta = (q+1)/(pq-1). Requires pq > 1.
inline RateExponents rate_exponents(double p, double q) {
  const double pq = p * q;
  if (!(pq > 1.0)) throw Error(ErrorCode::DegenerateExponents, "pq>1 required");
  return {(p + 1.0) / (pq - 1.0), (q + 1.0) / (pq - 1.0)};
}

/// Exponential-flux arguments must stay below this (exp overflows near 709.78).
inline constexpr double kOverflowGuard = 700.0;

/// The quantity the stop criterion watches: w^e for ExpPower and Power,
/// e·w for ExpLinear.
inline double flux_argument(FluxFamily family, double w, double e) {
  return family == FluxFamily::ExpLinear ? e * w : std::pow(w, e);
}

inline double boundary_flux(FluxFamily family, double w, double e) {
  if (w < 0.0) w = 0.0;  // fields are nonnegative; clamp round-off
  const double arg = flux_argument(family, w, e);
  if (family == FluxFamily::Power) {
    if (!std::isfinite(arg)) throw Error(ErrorCode::FluxOverflow, "power flux not finite");
    return arg;
  }
  if (!(arg < kOverflowGuard)) {
    throw Error(ErrorCode::FluxOverflow,
                "flux exponent argument " + std::to_string(arg) + " exceeds guard");
  }
  return std::exp(arg);
}

/// Uniform mesh r_i = i·dr on [0, R], dr = R/(N-1).
class RadialGrid {
 public:
  RadialGrid(double R, std::size_t N) : R_(R), N_(N), dr_(R / static_cast<double>(N - 1)) {}

  std::size_t size() const { return N_; }
  double radius() const { return R_; }
  double dr() const { return dr_; }
  /// r_{N-1} is exactly R.
  double node(std::size_t i) const {
    return i + 1 == N_ ? R_ : static_cast<double>(i) * dr_;
  }
  std::vector<double> nodes() const {
    std::vector<double> r(N_);
    for (std::size_t i = 0; i < N_; ++i) r[i] = node(i);
    return r;
  }

 private:
  double R_;
  std::size_t N_;
  double dr_;
};

inline constexpr std::size_t kMinGridNodes = 16;

inline RadialGrid make_grid(double R, std::size_t N) {
  if (!(R > 0.0)) throw Error(ErrorCode::InvalidParams, "R>0 required");
  if (N < kMinGridNodes) {
    throw Error(ErrorCode::GridTooCoarse, "N=" + std::to_string(N) + " < 16");
  }
  return RadialGrid(R, N);
}

struct FieldState {
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> v;
};

struct InitialProfiles {
  std::vector<double> u;
  std::vector<double> v;
};

inline InitialProfiles evaluate(const InitialDataSpec& spec, const RadialGrid& grid) {
  const std::size_t N = grid.size();
  InitialProfiles out;
  if (const auto* qr = std::get_if<QuadraticRadial>(&spec)) {
    out.u.resize(N);
    out.v.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
      const double r2 = grid.node(i) * grid.node(i);
      out.u[i] = qr->a_u + qr->b_u * r2;
      out.v[i] = qr->a_v + qr->b_v * r2;
    }
  } else {
    const auto& tab = std::get<Tabulated>(spec);
    if (tab.u.size() != N || tab.v.size() != N) {
      throw Error(ErrorCode::InvalidInitialData,
                  "tabulated data length does not match grid size " + std::to_string(N));
    }
    out.u = tab.u;
    out.v = tab.v;
  }
  return out;
}

/// Relative tolerance for the discrete initial-data conditions.
inline constexpr double kTolIc = 1e-10;

struct ConditionResult {
  std::string name;
  bool passed = true;
  std::size_t worst_node = 0;
  double worst_value = 0.0;  ///< most negative difference / Laplacian found
};

struct ValidationReport {
  std::vector<ConditionResult> conditions;
  bool passed = true;
  /// u0_r(R) - f(v0(R)) and v0_r(R) - g(u0(R)); only set when the flux is known.
  double compat_mismatch_u = std::numeric_limits<double>::quiet_NaN();
  double compat_mismatch_v = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline ConditionResult check_monotone(const std::string& name, const std::vector<double>& f) {
  ConditionResult c{name, true, 0, 0.0};
  double scale = 0.0;
  for (double x : f) scale = std::max(scale, std::abs(x));
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    const double d = f[i + 1] - f[i];
    if (d < worst) {
      worst = d;
      c.worst_node = i;
    }
  }
  c.worst_value = worst;
  c.passed = worst >= -kTolIc * scale;
  return c;
}

// Discrete radial Laplacian at nodes 0..N-2 (node N-1 needs boundary data).
inline ConditionResult check_subharmonic(const std::string& name, const std::vector<double>& f,
                                         const RadialGrid& grid, int n) {
  ConditionResult c{name, true, 0, 0.0};
  const double dr = grid.dr();
  const double dr2 = dr * dr;
  double scale = 1.0;
  for (double x : f) scale = std::max(scale, std::abs(x));
  double worst = 2.0 * n * (f[1] - f[0]) / dr2;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    const double r = grid.node(i);
    const double lap = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / dr2 +
                       (n - 1) / r * (f[i + 1] - f[i - 1]) / (2.0 * dr);
    if (lap < worst) {
      worst = lap;
      c.worst_node = i;
    }
  }
  c.worst_value = worst;
  c.passed = worst >= -kTolIc * scale / dr2;
  return c;
}

inline void require_admissible(const std::vector<double>& f, const char* which) {
  bool nonzero = false;
  for (double x : f) {
    if (!std::isfinite(x) || x < 0.0) {
      throw Error(ErrorCode::InvalidInitialData, std::string(which) + " is negative or not finite");
    }
    nonzero = nonzero || x > 0.0;
  }
  if (!nonzero) throw Error(ErrorCode::InvalidInitialData, std::string(which) + " is identically zero");
}

}  // namespace detail

/// Checks nonnegativity (throws), radial monotonicity and discrete
/// subharmonicity of u0 and v0.
inline ValidationReport validate_initial_data(const InitialDataSpec& spec, const RadialGrid& grid,
                                              int n) {
  const auto prof = evaluate(spec, grid);
  detail::require_admissible(prof.u, "u0");
  detail::require_admissible(prof.v, "v0");
  ValidationReport rep;
  rep.conditions.push_back(detail::check_monotone("u0_monotone", prof.u));
  rep.conditions.push_back(detail::check_monotone("v0_monotone", prof.v));
  rep.conditions.push_back(detail::check_subharmonic("u0_subharmonic", prof.u, grid, n));
  rep.conditions.push_back(detail::check_subharmonic("v0_subharmonic", prof.v, grid, n));
  rep.passed = std::all_of(rep.conditions.begin(), rep.conditions.end(),
                           [](const ConditionResult& c) { return c.passed; });
  return rep;
}

/// As above, plus the (not enforced) boundary compatibility mismatch.
inline ValidationReport validate_initial_data(const ProblemParams& prm, const RadialGrid& grid) {
  auto rep = validate_initial_data(prm.initial, grid, prm.n);
  const auto prof = evaluate(prm.initial, grid);
  const std::size_t N = grid.size();
  const double dr = grid.dr();
  auto slope = [&](const std::vector<double>& f) {
    return (3.0 * f[N - 1] - 4.0 * f[N - 2] + f[N - 3]) / (2.0 * dr);
  };
  try {
    rep.compat_mismatch_u = slope(prof.u) - boundary_flux(prm.flux, prof.v[N - 1], prm.p);
    rep.compat_mismatch_v = slope(prof.v) - boundary_flux(prm.flux, prof.u[N - 1], prm.q);
  } catch (const Error&) {
    // flux already beyond the guard at t=0; leave the mismatch unset
  }
  return rep;
}

inline FieldState initial_state(const ProblemParams& prm, const RadialGrid& grid) {
  auto prof = evaluate(prm.initial, grid);
  return FieldState{0.0, std::move(prof.u), std::move(prof.v)};
}

}  // namespace blowup
