#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "qpdl/fourier.hpp"
#include "qpdl/kam.hpp"
#include "qpdl/parallel.hpp"
#include "qpdl/torus.hpp"

namespace qpdl {

/// Flat key=value configuration with [section] headers; section names prefix
/// the keys ("schedule.eps0"). Command-line flags override file values.
class RunConfig {
 public:
  RunConfig();

  static RunConfig from_file(const std::string& path);

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t seed() const;

  int dim() const;  // torus dimension implied by the frequency entry
  Frequency frequency() const;
  ScalarFourier potential() const;
  KamSchedule schedule(int levels) const;
  int levels() const { return get_int("schedule.J", 2); }

  const std::map<std::string, std::string>& raw() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace qpdl
