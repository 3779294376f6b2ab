#pragma once

#include <map>
#include <optional>
#include <string>

#include "uhs/metric.hpp"

namespace uhs {

/// Declarative scenario file: TOML-style `key = value` lines grouped under
/// [section] (and [section.sub]) headers.  Values are strings, numbers,
/// booleans or flat arrays.  Keys flatten to dotted paths.  Any key can be
/// overridden by an environment variable UHS_<PATH> with dots replaced by
/// underscores (e.g. UHS_GRID_N=256).
class Scenario {
public:
  static Scenario parse_file(const std::string& path, bool apply_env = true);
  static Scenario parse_string(const std::string& text, bool apply_env = false);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_array(const std::string& key, std::vector<double> fallback) const;
  std::vector<int> get_int_array(const std::string& key, std::vector<int> fallback) const;

  std::string name() const { return get_string("name", "unnamed"); }
  std::uint64_t seed() const { return static_cast<std::uint64_t>(get_int("seed", 1)); }

  /// FNV-1a hash of the canonical (sorted) key=value serialization plus the
  /// toolkit version; attached to every output.
  std::string fingerprint() const;

  /// Grid from [grid] (d, n, box).
  Grid make_grid() const;
  /// Metric from [metric] (profile = flat | elliptic-bump |
  /// ultrahyperbolic-bump | trapping-annulus, plus amplitudes/radii).
  Metric make_metric() const;
  /// First-order coefficient bumps from [coefficients].
  VectorBump make_b() const;
  VectorBump make_btilde() const;

  const std::map<std::string, std::string>& entries() const { return kv_; }
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

private:
  void validate() const;
  std::map<std::string, std::string> kv_;
};

} // namespace uhs
