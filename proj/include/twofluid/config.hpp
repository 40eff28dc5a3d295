#pragma once

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "domain.hpp"
#include "time_integrator.hpp"

namespace twofluid {

struct ConfigError : PreconditionError {
  using PreconditionError::PreconditionError;
};

/// `key = value` lines, `#` starts a comment. Later keys override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>") {
    KeyValueConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
      c.values_[key] = val;
    }
    return c;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse(in, path);
  }

  bool has(const std::string& k) const { return values_.count(k) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& k, const std::string& def) const {
    auto it = values_.find(k);
    return it == values_.end() ? def : it->second;
  }

  double get_double(const std::string& k, double def) const {
    auto it = values_.find(k);
    if (it == values_.end()) return def;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (errno != 0 || end == it->second.c_str() || *end != '\0')
      throw ConfigError("config key " + k + ": not a number: '" + it->second + "'");
    return v;
  }

  long get_int(const std::string& k, long def) const {
    auto it = values_.find(k);
    if (it == values_.end()) return def;
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(it->second.c_str(), &end, 10);
    if (errno != 0 || end == it->second.c_str() || *end != '\0')
      throw ConfigError("config key " + k + ": not an integer: '" + it->second + "'");
    return v;
  }

  /// throws on any key outside `known`
  template <class Range>
  void check_known(const Range& known) const {
    for (const auto& [k, v] : values_) {
      bool ok = false;
      for (const auto& q : known) ok = ok || k == q;
      if (!ok) throw ConfigError("unknown config key '" + k + "'");
    }
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }
  std::map<std::string, std::string> values_;
};

inline const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> k = {
      "domain.L1",          "domain.L2",     "domain.nu",    "domain.T_plus",          "domain.T_minus",
      "integrator.dt",      "integrator.t_end", "integrator.N1", "integrator.N2",       "integrator.scheme",
      "integrator.record_every", "ic.kind",  "ic.amplitude", "ic.seed",                "ic.k2",
      "output.dir"};
  return k;
}

inline DomainConfig apply(const KeyValueConfig& kv, DomainConfig c) {
  c.L1 = kv.get_double("domain.L1", c.L1);
  c.L2 = kv.get_double("domain.L2", c.L2);
  c.nu = kv.get_double("domain.nu", c.nu);
  c.T_plus = kv.get_double("domain.T_plus", c.T_plus);
  c.T_minus = kv.get_double("domain.T_minus", c.T_minus);
  return c;
}

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "cnab2") return Scheme::cnab2;
  if (s == "cn_euler") return Scheme::cn_euler;
  throw ConfigError("unknown scheme '" + s + "' (cnab2 or cn_euler)");
}

inline IcKind ic_kind_from_string(const std::string& s) {
  if (s == "eigenmode") return IcKind::eigenmode;
  if (s == "random") return IcKind::random;
  if (s == "zero") return IcKind::zero;
  throw ConfigError("unknown initial condition '" + s + "' (eigenmode, random or zero)");
}

inline IntegratorConfig apply(const KeyValueConfig& kv, IntegratorConfig c) {
  c.dt = kv.get_double("integrator.dt", c.dt);
  c.t_end = kv.get_double("integrator.t_end", c.t_end);
  c.N1 = static_cast<int>(kv.get_int("integrator.N1", c.N1));
  c.N2 = static_cast<int>(kv.get_int("integrator.N2", c.N2));
  c.record_every = static_cast<int>(kv.get_int("integrator.record_every", c.record_every));
  if (kv.has("integrator.scheme")) c.scheme = scheme_from_string(kv.get_string("integrator.scheme", ""));
  if (kv.has("ic.kind")) c.ic.kind = ic_kind_from_string(kv.get_string("ic.kind", ""));
  c.ic.amplitude = kv.get_double("ic.amplitude", c.ic.amplitude);
  c.ic.seed = static_cast<std::uint64_t>(kv.get_int("ic.seed", static_cast<long>(c.ic.seed)));
  c.ic.k2 = static_cast<int>(kv.get_int("ic.k2", c.ic.k2));
  return c;
}

}  // namespace twofluid
