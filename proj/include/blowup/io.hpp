#pragma once

/// @file io.hpp
/// @brief Trajectory CSV, flat key/value reports, number formatting.

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "blowup/error.hpp"
#include "blowup/solver.hpp"

namespace blowup {

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kTrajectoryHeader =
    "t,dt,M,Nmax,argmax_u,argmax_v,sup_u_interior,sup_v_interior,flux_u,flux_v";

inline void write_trajectory_csv(std::ostream& o, const Trajectory& traj) {
  o << kTrajectoryHeader << '\n';
  for (const auto& s : traj.samples) {
    o << format_double(s.t) << ',' << format_double(s.dt) << ',' << format_double(s.M) << ','
      << format_double(s.Nv) << ',' << s.argmax_u << ',' << s.argmax_v << ','
      << format_double(s.sup_u_interior) << ',' << format_double(s.sup_v_interior) << ','
      << format_double(s.flux_u) << ',' << format_double(s.flux_v) << '\n';
  }
}

/// Ordered `key = value` lines.
class Report {
 public:
  void set(const std::string& key, const std::string& value) {
    for (auto& kv : entries_) {
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    }
    entries_.emplace_back(key, value);
  }
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
  void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }

  const std::string* get(const std::string& key) const {
    for (const auto& kv : entries_) {
      if (kv.first == key) return &kv.second;
    }
    return nullptr;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& o) const {
    for (const auto& [k, v] : entries_) o << k << " = " << v << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::ConfigError, "io: cannot write '" + path + "'");
  f << content;
  if (!f) throw Error(ErrorCode::ConfigError, "io: write failed for '" + path + "'");
}

}  // namespace blowup
