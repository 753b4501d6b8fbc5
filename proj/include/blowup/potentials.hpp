#pragma once

/// @file potentials.hpp
/// @brief Heat kernel, sphere/circle quadrature, single-layer heat potentials
/// over S_R, the normal-derivative jump check, and the surface integrability
/// test for |x-y|^{-a}.
///
/// Time integrals use product integration: on each panel the density is
/// frozen at the midpoint and the kernel is integrated in closed form
///
///   n=3:  ∫_a^b Γ(ρ,s) ds = [erfc(ρ/2√b) - erfc(ρ/2√a)] / (4πρ)
///   n=2:  ∫_a^b Γ(ρ,s) ds = [E1(ρ²/4b) - E1(ρ²/4a)] / (4π)
///
/// on panels graded geometrically toward s = t-τ = 0.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "blowup/error.hpp"

namespace blowup {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Γ(x,t) = (4πt)^{-n/2} exp(-|x|²/4t), from |x|².
inline double heat_kernel_r2(double r2, double t, int n) {
  if (!(t > 0.0)) throw Error(ErrorCode::BadTime, "heat kernel needs t>0");
  return std::pow(4.0 * std::numbers::pi * t, -0.5 * n) * std::exp(-r2 / (4.0 * t));
}

inline double heat_kernel(std::span<const double> x, double t, int n) {
  double r2 = 0.0;
  for (double c : x) r2 += c * c;
  return heat_kernel_r2(r2, t, n);
}

/// Quadrature on the circle (n=2) or sphere (n=3) of radius R centered at 0.
/// For n=2 the third coordinate is zero.
struct SphereQuadrature {
  int n = 3;
  double R = 1.0;
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  double resolution = 0.0;  ///< smallest length scale the rule resolves

  std::size_t size() const { return nodes.size(); }

  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  /// n=2: m equispaced nodes (trapezoid). n=3: m uniform Gauss–Legendre
  /// panels in polar angle × 32m azimuth nodes.
  static SphereQuadrature uniform(int n, double R, std::size_t m);

  /// Polar angle θ measured from `pole`; panels [0,θ_min], then edges
  /// θ_min·ratio^k up to π, 16 Gauss nodes per panel; n=3 adds `azimuth`
  /// trapezoid nodes per latitude.
  static SphereQuadrature graded(int n, double R, const Vec3& pole, double theta_min,
                                 double ratio = 1.5, std::size_t azimuth = 32);
};

/// Surface measure of S_R: 2πR (n=2), 4πR² (n=3).
inline double surface_measure(int n, double R) {
  return n == 2 ? 2.0 * std::numbers::pi * R : 4.0 * std::numbers::pi * R * R;
}

namespace detail {

struct Node1D {
  double x;
  double w;
};

// 16-point Gauss–Legendre on [a,b].
inline void gauss_panel(double a, double b, std::vector<Node1D>& out) {
  using G = boost::math::quadrature::gauss<double, 16>;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const auto& xs = G::abscissa();
  const auto& ws = G::weights();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out.push_back({c - h * xs[i], h * ws[i]});
    out.push_back({c + h * xs[i], h * ws[i]});
  }
}

inline void check_dim(int n) {
  if (n != 2 && n != 3) throw Error(ErrorCode::InvalidParams, "sphere quadrature needs n in {2,3}");
}

// Orthonormal e1, e2 completing unit vector e3.
inline std::array<Vec3, 2> complete_frame(const Vec3& e3) {
  const Vec3 trial = std::abs(e3[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const double d = dot(trial, e3);
  Vec3 e1{trial[0] - d * e3[0], trial[1] - d * e3[1], trial[2] - d * e3[2]};
  const double l = norm(e1);
  for (double& c : e1) c /= l;
  const Vec3 e2{e3[1] * e1[2] - e3[2] * e1[1], e3[2] * e1[0] - e3[0] * e1[2],
                e3[0] * e1[1] - e3[1] * e1[0]};
  return {e1, e2};
}

inline SphereQuadrature build(int n, double R, const Vec3& pole_in,
                              const std::vector<Node1D>& polar, std::size_t azimuth) {
  check_dim(n);
  if (!(R > 0.0)) throw Error(ErrorCode::InvalidParams, "R>0 required");
  SphereQuadrature q;
  q.n = n;
  q.R = R;
  Vec3 pole = pole_in;
  if (n == 2) pole[2] = 0.0;
  const double pl = norm(pole);
  if (!(pl > 0.0)) throw Error(ErrorCode::InvalidParams, "pole must be nonzero");
  for (double& c : pole) c /= pl;

  if (n == 2) {
    const Vec3 perp{-pole[1], pole[0], 0.0};
    for (const auto& [th, w] : polar) {
      for (int sgn : {-1, 1}) {
        const double c = std::cos(th), s = sgn * std::sin(th);
        q.nodes.push_back({R * (c * pole[0] + s * perp[0]), R * (c * pole[1] + s * perp[1]), 0.0});
        q.weights.push_back(R * w);
      }
    }
    return q;
  }
  const auto [e1, e2] = complete_frame(pole);
  const double dphi = 2.0 * std::numbers::pi / static_cast<double>(azimuth);
  for (const auto& [th, w] : polar) {
    const double st = std::sin(th), ct = std::cos(th);
    for (std::size_t k = 0; k < azimuth; ++k) {
      const double ph = (static_cast<double>(k) + 0.5) * dphi;
      const double a = st * std::cos(ph), b = st * std::sin(ph);
      q.nodes.push_back({R * (a * e1[0] + b * e2[0] + ct * pole[0]),
                         R * (a * e1[1] + b * e2[1] + ct * pole[1]),
                         R * (a * e1[2] + b * e2[2] + ct * pole[2])});
      q.weights.push_back(R * R * st * w * dphi);
    }
  }
  return q;
}

}  // namespace detail

inline SphereQuadrature SphereQuadrature::uniform(int n, double R, std::size_t m) {
  detail::check_dim(n);
  if (m < 1) throw Error(ErrorCode::InvalidParams, "quadrature size must be positive");
  if (n == 2) {
    SphereQuadrature q;
    q.n = 2;
    q.R = R;
    const double dth = 2.0 * std::numbers::pi / static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double th = static_cast<double>(k) * dth;
      q.nodes.push_back({R * std::cos(th), R * std::sin(th), 0.0});
      q.weights.push_back(R * dth);
    }
    q.resolution = R * dth;
    return q;
  }
  std::vector<detail::Node1D> polar;
  const double h = std::numbers::pi / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) detail::gauss_panel(k * h, (k + 1) * h, polar);
  auto q = detail::build(3, R, {0, 0, 1}, polar, 32 * m);
  q.resolution = R * h / 16.0;
  return q;
}

inline SphereQuadrature SphereQuadrature::graded(int n, double R, const Vec3& pole,
                                                 double theta_min, double ratio,
                                                 std::size_t azimuth) {
  if (!(theta_min > 0.0 && theta_min < std::numbers::pi)) {
    throw Error(ErrorCode::InvalidParams, "0<theta_min<pi required");
  }
  if (!(ratio > 1.0)) throw Error(ErrorCode::InvalidParams, "grading ratio must exceed 1");
  std::vector<detail::Node1D> polar;
  double a = 0.0, b = theta_min;
  while (a < std::numbers::pi) {
    detail::gauss_panel(a, b, polar);
    a = b;
    b = std::min(std::numbers::pi, b * ratio);
  }
  auto q = detail::build(n, R, pole, polar, azimuth);
  q.resolution = R * theta_min;
  return q;
}

/// Boundary density φ(y, τ).
using BoundaryDensity = std::function<double(const Vec3&, double)>;

namespace detail {

// E1(x) for x>0; E1(+inf)=0.
inline double expint_e1(double x) {
  if (std::isinf(x)) return 0.0;
  return -std::expint(-x);
}

// ∫_a^b Γ(ρ,s) ds, 0 <= a < b.
inline double kernel_time_integral(double rho, double a, double b, int n) {
  constexpr double pi = std::numbers::pi;
  if (n == 3) {
    if (rho == 0.0) {
      if (a == 0.0) return std::numeric_limits<double>::infinity();
      return (1.0 / std::sqrt(a) - 1.0 / std::sqrt(b)) / (4.0 * pi * std::sqrt(pi));
    }
    const double eb = std::erfc(rho / (2.0 * std::sqrt(b)));
    const double ea = a > 0.0 ? std::erfc(rho / (2.0 * std::sqrt(a))) : 0.0;
    return (eb - ea) / (4.0 * pi * rho);
  }
  const double r2 = rho * rho;
  const double xb = r2 / (4.0 * b);
  const double xa = a > 0.0 ? r2 / (4.0 * a) : std::numeric_limits<double>::infinity();
  return (expint_e1(xb) - expint_e1(xa)) / (4.0 * pi);
}

// d/dρ of kernel_time_integral.
inline double kernel_time_integral_drho(double rho, double a, double b, int n) {
  constexpr double pi = std::numbers::pi;
  const double r2 = rho * rho;
  const double gb = std::exp(-r2 / (4.0 * b));
  const double ga = a > 0.0 ? std::exp(-r2 / (4.0 * a)) : 0.0;
  if (n == 3) {
    const double E = std::erfc(rho / (2.0 * std::sqrt(b))) -
                     (a > 0.0 ? std::erfc(rho / (2.0 * std::sqrt(a))) : 0.0);
    const double dE = -gb / std::sqrt(pi * b) + (a > 0.0 ? ga / std::sqrt(pi * a) : 0.0);
    return (dE * rho - E) / (4.0 * pi * r2);
  }
  return (-2.0 * gb + 2.0 * ga) / (4.0 * pi * rho);
}

// Panel edges in s = t-τ on [0, S]: [0, s_min], then geometric up to S.
inline std::vector<double> time_edges(double S, std::size_t steps) {
  if (steps < 2) steps = 2;
  const double s_min = 1e-8 * S;
  const double ratio = std::pow(S / s_min, 1.0 / static_cast<double>(steps - 1));
  std::vector<double> e(steps + 1);
  e[0] = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    e[k] = s_min * std::pow(ratio, static_cast<double>(k - 1));
  }
  e[steps] = S;
  return e;
}

}  // namespace detail

/// U(x,t) = ∫_{t1}^{t} ∫_{S_R} Γ(x-y, t-τ) φ(y,τ) ds_y dτ.
inline double single_layer(const Vec3& x, double t, const BoundaryDensity& phi, double t1,
                           const SphereQuadrature& quad, std::size_t steps = 40) {
  if (!(t1 < t)) throw Error(ErrorCode::BadWindow, "t1<t required");
  const auto edges = detail::time_edges(t - t1, steps);
  double total = 0.0;
  for (std::size_t j = 0; j < quad.size(); ++j) {
    const auto& y = quad.nodes[j];
    const Vec3 d{x[0] - y[0], x[1] - y[1], x[2] - y[2]};
    const double rho = norm(d);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      const double f = phi(y, t - 0.5 * (edges[k] + edges[k + 1]));
      if (f != 0.0) acc += f * detail::kernel_time_integral(rho, edges[k], edges[k + 1], quad.n);
    }
    total += quad.weights[j] * acc;
  }
  return total;
}

/// ∇U(x,t)·e evaluated with the analytic kernel gradient (e need not be unit).
inline double single_layer_directional(const Vec3& x, const Vec3& e, double t,
                                       const BoundaryDensity& phi, double t1,
                                       const SphereQuadrature& quad, std::size_t steps = 40) {
  if (!(t1 < t)) throw Error(ErrorCode::BadWindow, "t1<t required");
  const auto edges = detail::time_edges(t - t1, steps);
  double total = 0.0;
  for (std::size_t j = 0; j < quad.size(); ++j) {
    const auto& y = quad.nodes[j];
    const Vec3 d{x[0] - y[0], x[1] - y[1], x[2] - y[2]};
    const double rho = norm(d);
    if (rho == 0.0) continue;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      const double f = phi(y, t - 0.5 * (edges[k] + edges[k + 1]));
      if (f != 0.0) acc += f * detail::kernel_time_integral_drho(rho, edges[k], edges[k + 1], quad.n);
    }
    total += quad.weights[j] * acc * dot(d, e) / rho;
  }
  return total;
}

struct JumpReport {
  std::vector<double> distances;
  std::vector<double> interior_derivative;  ///< outward ∂U/∂η at x0 - dη
  double interior_limit = 0.0;              ///< extrapolated to d = 0
  double direct_value = 0.0;                ///< outward ∂U/∂η on S_R (principal value)
  double phi_x0 = 0.0;
  /// Jump along the inward normal, expected -φ(x0,t)/2.
  double jump = 0.0;
  /// Same jump along the outward normal, expected +φ(x0,t)/2.
  double jump_outward = 0.0;
  double tolerance = 0.05;
  bool passed = false;
};

inline constexpr double kTolJump = 0.05;

/// Approaches x0 ∈ S_R along the normal from inside, differentiates U by
/// central differences (step d/50), extrapolates linearly to d=0 and
/// subtracts the on-surface normal derivative.
inline JumpReport jump_check(const Vec3& x0, const BoundaryDensity& phi, double t,
                             const SphereQuadrature& quad, const std::vector<double>& distances,
                             double t1 = 0.0, std::size_t steps = 40, double tol = kTolJump) {
  if (distances.size() < 2) throw Error(ErrorCode::InvalidParams, "need at least two distances");
  const double R = norm(x0);
  if (std::abs(R - quad.R) > 1e-12 * quad.R) {
    throw Error(ErrorCode::InvalidParams, "x0 must lie on S_R");
  }
  for (double d : distances) {
    if (!(d >= quad.resolution) || !(d < R)) {
      throw Error(ErrorCode::ResolutionError,
                  "distance " + std::to_string(d) + " below quadrature resolution " +
                      std::to_string(quad.resolution));
    }
  }
  const Vec3 eta{x0[0] / R, x0[1] / R, x0[2] / R};
  auto at = [&](double d) { return Vec3{x0[0] - d * eta[0], x0[1] - d * eta[1], x0[2] - d * eta[2]}; };

  JumpReport rep;
  rep.distances = distances;
  rep.tolerance = tol;
  for (double d : distances) {
    const double h = d / 50.0;
    const double up = single_layer(at(d - h), t, phi, t1, quad, steps);
    const double dn = single_layer(at(d + h), t, phi, t1, quad, steps);
    rep.interior_derivative.push_back((up - dn) / (2.0 * h));
  }
  // least-squares line D(d) = c0 + c1 d
  const double m = static_cast<double>(distances.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    sx += distances[i];
    sy += rep.interior_derivative[i];
    sxx += distances[i] * distances[i];
    sxy += distances[i] * rep.interior_derivative[i];
  }
  const double c1 = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  rep.interior_limit = (sy - c1 * sx) / m;

  // On S_R: (x0-y)·η = ρ²/(2R), avoiding cancellation near the pole.
  const auto edges = detail::time_edges(t - t1, steps);
  double direct = 0.0;
  for (std::size_t j = 0; j < quad.size(); ++j) {
    const auto& y = quad.nodes[j];
    const Vec3 dv{x0[0] - y[0], x0[1] - y[1], x0[2] - y[2]};
    const double rho = norm(dv);
    if (rho == 0.0) continue;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      const double f = phi(y, t - 0.5 * (edges[k] + edges[k + 1]));
      if (f != 0.0) acc += f * detail::kernel_time_integral_drho(rho, edges[k], edges[k + 1], quad.n);
    }
    direct += quad.weights[j] * acc * rho / (2.0 * R);
  }
  rep.direct_value = direct;
  rep.phi_x0 = phi(x0, t);
  rep.jump_outward = rep.interior_limit - rep.direct_value;
  rep.jump = -rep.jump_outward;
  rep.passed = std::abs(rep.jump + 0.5 * rep.phi_x0) <= tol;
  return rep;
}

struct ConvergenceReport {
  std::vector<double> values;
  std::vector<double> theta_min;
  double value = 0.0;  ///< last refinement
  bool converged = false;
  bool diverging = false;
};

/// ∫_{S_R} |x-y|^{-a} ds_y on pole-aligned graded rules, halving θ_min at
/// each level. Converged: last relative change < 1e-3. Diverging: the
/// increments stop decaying (ratio >= 0.7) while still non-negligible.
inline ConvergenceReport surface_integral_bound(const Vec3& x, double a, int n, double R,
                                                std::size_t levels = 8,
                                                double theta_min0 = 1e-2) {
  if (!(a >= 0.0)) throw Error(ErrorCode::InvalidParams, "a>=0 required");
  if (levels < 3) levels = 3;
  const Vec3 pole = norm(x) > 0.0 ? x : Vec3{0, 0, 1};
  ConvergenceReport rep;
  double th = theta_min0;
  for (std::size_t l = 0; l < levels; ++l, th *= 0.5) {
    const auto q = SphereQuadrature::graded(n, R, pole, th, 1.5, 8);
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const auto& y = q.nodes[j];
      const double rho = norm(Vec3{x[0] - y[0], x[1] - y[1], x[2] - y[2]});
      s += q.weights[j] * std::pow(rho, -a);
    }
    rep.values.push_back(s);
    rep.theta_min.push_back(th);
  }
  const auto& v = rep.values;
  const std::size_t L = v.size();
  rep.value = v[L - 1];
  const double d1 = v[L - 1] - v[L - 2];
  const double d0 = v[L - 2] - v[L - 3];
  rep.converged = std::abs(d1) < 1e-3 * std::abs(v[L - 1]);
  rep.diverging = !rep.converged && d0 != 0.0 && d1 / d0 >= 0.7;
  return rep;
}

/// ∫_{S_R} Γ(x-y, s) ds_y; for x on S_R this behaves like 1/(2√(πs)) as s→0.
inline double surface_kernel_mass(const Vec3& x, double s, const SphereQuadrature& quad) {
  double total = 0.0;
  for (std::size_t j = 0; j < quad.size(); ++j) {
    const auto& y = quad.nodes[j];
    const Vec3 d{x[0] - y[0], x[1] - y[1], x[2] - y[2]};
    total += quad.weights[j] * heat_kernel_r2(dot(d, d), s, quad.n);
  }
  return total;
}

}  // namespace blowup
