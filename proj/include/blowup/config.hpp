#pragma once

/// @file config.hpp
/// @brief Experiment configuration: INI-style `key = value` text with
/// sections [problem], [initial], [solver], [analysis], [sweep], [output].

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "blowup/analysis.hpp"
#include "blowup/error.hpp"
#include "blowup/io.hpp"
#include "blowup/model.hpp"
#include "blowup/solver.hpp"

namespace blowup {

struct AnalysisOptions {
  double a = 0.5;  ///< interior radius for the boundary-set check
  FitOptions fit;
  bool dominance = true;
  std::optional<double> dominance_radius;  ///< restrict dominance to r <= this
  double exponent_slack = 1.1;             ///< fitted exponent <= slack × theoretical
};

struct SweepAxes {
  std::vector<double> p;
  std::vector<double> q;
  std::vector<std::size_t> N;
  std::vector<FluxFamily> flux;
  std::size_t max_runs = 64;
  bool any() const { return !p.empty() || !q.empty() || !N.empty() || !flux.empty(); }
};

struct ExperimentConfig {
  ProblemParams problem;
  SolverConfig solver;
  AnalysisOptions analysis;
  SweepAxes sweep;
  std::string output_dir = "out";
};

namespace detail {

using boost::property_tree::ptree;

inline std::optional<std::string> lookup(const ptree& pt, const std::string& section,
                                         const std::string& key) {
  if (auto v = pt.get_optional<std::string>(ptree::path_type(section + "." + key, '.'))) {
    return boost::algorithm::trim_copy(*v);
  }
  return std::nullopt;
}

inline double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "key '" + key + "': not a number: '" + s + "'");
  }
}

inline std::size_t to_size(const std::string& key, const std::string& s) {
  const double v = to_double(key, s);
  if (!(v >= 0.0) || v != std::floor(v)) {
    throw Error(ErrorCode::ConfigError, "key '" + key + "': not a nonnegative integer: '" + s + "'");
  }
  return static_cast<std::size_t>(v);
}

inline bool to_bool(const std::string& key, const std::string& s) {
  const auto l = boost::algorithm::to_lower_copy(s);
  if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
  if (l == "false" || l == "0" || l == "no" || l == "off") return false;
  throw Error(ErrorCode::ConfigError, "key '" + key + "': not a boolean: '" + s + "'");
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, s, boost::algorithm::is_any_of(", "),
                          boost::algorithm::token_compress_on);
  std::erase_if(parts, [](const std::string& x) { return x.empty(); });
  return parts;
}

inline std::vector<double> to_doubles(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& x : split_list(s)) out.push_back(to_double(key, x));
  return out;
}

}  // namespace detail

/// Parses configuration text. Required: p, q, R, n, flux in [problem].
inline ExperimentConfig parse_config(std::istream& in) {
  using detail::lookup;
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("parse error: ") + e.what());
  }
  ExperimentConfig cfg;
  auto required = [&](const std::string& key) {
    auto v = lookup(pt, "problem", key);
    if (!v || v->empty()) throw Error(ErrorCode::ConfigError, "missing required key '" + key + "'");
    return *v;
  };
  auto& prm = cfg.problem;
  prm.p = detail::to_double("p", required("p"));
  prm.q = detail::to_double("q", required("q"));
  prm.R = detail::to_double("R", required("R"));
  {
    const double n = detail::to_double("n", required("n"));
    if (n != std::floor(n)) throw Error(ErrorCode::ConfigError, "key 'n': not an integer");
    prm.n = static_cast<int>(n);
  }
  try {
    prm.flux = parse_flux_family(required("flux"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, e.message());
  }

  const std::string type = lookup(pt, "initial", "type").value_or("quadratic");
  if (type == "quadratic") {
    QuadraticRadial qr;
    if (auto v = lookup(pt, "initial", "a_u")) qr.a_u = detail::to_double("a_u", *v);
    if (auto v = lookup(pt, "initial", "b_u")) qr.b_u = detail::to_double("b_u", *v);
    if (auto v = lookup(pt, "initial", "a_v")) qr.a_v = detail::to_double("a_v", *v);
    if (auto v = lookup(pt, "initial", "b_v")) qr.b_v = detail::to_double("b_v", *v);
    prm.initial = qr;
  } else if (type == "tabulated") {
    Tabulated tab;
    auto u = lookup(pt, "initial", "u");
    auto v = lookup(pt, "initial", "v");
    if (!u || !v) throw Error(ErrorCode::ConfigError, "tabulated initial data needs 'u' and 'v'");
    tab.u = detail::to_doubles("u", *u);
    tab.v = detail::to_doubles("v", *v);
    prm.initial = tab;
  } else {
    throw Error(ErrorCode::ConfigError, "key 'type': unknown initial data type '" + type + "'");
  }

  auto& sc = cfg.solver;
  if (auto v = lookup(pt, "solver", "N")) sc.N = detail::to_size("N", *v);
  if (auto v = lookup(pt, "solver", "cfl")) sc.cfl = detail::to_double("cfl", *v);
  if (auto v = lookup(pt, "solver", "growth_cap")) sc.growth_cap = detail::to_double("growth_cap", *v);
  if (auto v = lookup(pt, "solver", "u_stop")) sc.u_stop = detail::to_double("u_stop", *v);
  if (auto v = lookup(pt, "solver", "t_end")) sc.t_end = detail::to_double("t_end", *v);
  if (auto v = lookup(pt, "solver", "record_every")) sc.record_every = detail::to_size("record_every", *v);
  if (auto v = lookup(pt, "solver", "interior_radius")) {
    sc.interior_radius = detail::to_double("interior_radius", *v);
  }
  if (auto v = lookup(pt, "solver", "snapshot_every")) {
    sc.snapshot_every = detail::to_size("snapshot_every", *v);
  }
  if (auto v = lookup(pt, "solver", "max_steps")) sc.max_steps = detail::to_size("max_steps", *v);
  if (auto v = lookup(pt, "solver", "frozen_flux")) sc.frozen_flux = detail::to_double("frozen_flux", *v);

  auto& an = cfg.analysis;
  an.a = sc.interior_radius;
  if (auto v = lookup(pt, "analysis", "a")) an.a = detail::to_double("a", *v);
  if (auto v = lookup(pt, "analysis", "min_samples")) an.fit.min_samples = detail::to_size("min_samples", *v);
  if (auto v = lookup(pt, "analysis", "min_growth")) an.fit.min_growth = detail::to_double("min_growth", *v);
  if (auto v = lookup(pt, "analysis", "max_residual")) an.fit.max_residual = detail::to_double("max_residual", *v);
  if (auto v = lookup(pt, "analysis", "dominance")) an.dominance = detail::to_bool("dominance", *v);
  if (auto v = lookup(pt, "analysis", "dominance_radius")) {
    an.dominance_radius = detail::to_double("dominance_radius", *v);
  }
  if (auto v = lookup(pt, "analysis", "exponent_slack")) {
    an.exponent_slack = detail::to_double("exponent_slack", *v);
  }

  auto& sw = cfg.sweep;
  auto axis = [&](const std::string& key) -> std::optional<std::vector<std::string>> {
    auto v = lookup(pt, "sweep", key);
    if (!v) return std::nullopt;
    auto parts = detail::split_list(*v);
    if (parts.empty()) throw Error(ErrorCode::ConfigError, "sweep axis '" + key + "' is empty");
    return parts;
  };
  if (auto a = axis("p")) for (const auto& s : *a) sw.p.push_back(detail::to_double("p", s));
  if (auto a = axis("q")) for (const auto& s : *a) sw.q.push_back(detail::to_double("q", s));
  if (auto a = axis("N")) for (const auto& s : *a) sw.N.push_back(detail::to_size("N", s));
  if (auto a = axis("flux")) {
    for (const auto& s : *a) {
      try {
        sw.flux.push_back(parse_flux_family(s));
      } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, e.message());
      }
    }
  }
  if (auto v = lookup(pt, "sweep", "max_runs")) sw.max_runs = detail::to_size("max_runs", *v);

  if (auto v = lookup(pt, "output", "dir")) cfg.output_dir = *v;

  // constraint violations are configuration errors
  try {
    validate(prm);
    validate(sc, prm);
    if (!(an.a > 0.0 && an.a < prm.R)) throw Error(ErrorCode::InvalidParams, "0<a<R required");
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.message());
  }
  return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "io: cannot read '" + path + "'");
  return parse_config(in);
}

/// Effective configuration (defaults filled in) as INI text.
inline std::string echo_config(const ExperimentConfig& cfg) {
  std::ostringstream o;
  const auto& p = cfg.problem;
  o << "[problem]\n"
    << "p = " << format_double(p.p) << "\n"
    << "q = " << format_double(p.q) << "\n"
    << "R = " << format_double(p.R) << "\n"
    << "n = " << p.n << "\n"
    << "flux = " << to_string(p.flux) << "\n\n[initial]\n";
  if (const auto* qr = std::get_if<QuadraticRadial>(&p.initial)) {
    o << "type = quadratic\n"
      << "a_u = " << format_double(qr->a_u) << "\n"
      << "b_u = " << format_double(qr->b_u) << "\n"
      << "a_v = " << format_double(qr->a_v) << "\n"
      << "b_v = " << format_double(qr->b_v) << "\n";
  } else {
    const auto& tab = std::get<Tabulated>(p.initial);
    auto list = [&](const std::vector<double>& xs) {
      std::string s;
      for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_double(xs[i]);
      return s;
    };
    o << "type = tabulated\n"
      << "u = " << list(tab.u) << "\n"
      << "v = " << list(tab.v) << "\n";
  }
  const auto& s = cfg.solver;
  o << "\n[solver]\n"
    << "N = " << s.N << "\n"
    << "cfl = " << format_double(s.cfl) << "\n"
    << "growth_cap = " << format_double(s.growth_cap) << "\n"
    << "u_stop = " << format_double(s.u_stop) << "\n";
  if (s.t_end) o << "t_end = " << format_double(*s.t_end) << "\n";
  o << "record_every = " << s.record_every << "\n"
    << "interior_radius = " << format_double(s.interior_radius) << "\n"
    << "snapshot_every = " << s.snapshot_every << "\n"
    << "max_steps = " << s.max_steps << "\n";
  if (s.frozen_flux) o << "frozen_flux = " << format_double(*s.frozen_flux) << "\n";
  const auto& a = cfg.analysis;
  o << "\n[analysis]\n"
    << "a = " << format_double(a.a) << "\n"
    << "min_samples = " << a.fit.min_samples << "\n"
    << "min_growth = " << format_double(a.fit.min_growth) << "\n"
    << "max_residual = " << format_double(a.fit.max_residual) << "\n"
    << "dominance = " << (a.dominance ? "true" : "false") << "\n";
  if (a.dominance_radius) o << "dominance_radius = " << format_double(*a.dominance_radius) << "\n";
  o << "exponent_slack = " << format_double(a.exponent_slack) << "\n";
  o << "\n[output]\ndir = " << cfg.output_dir << "\n";
  return o.str();
}

}  // namespace blowup
