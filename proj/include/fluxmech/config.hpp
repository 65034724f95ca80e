#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluxmech {

/// Raised for anything the user can fix in a config file or --set flag;
/// the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Dimension {
  Frequency,      // Hz
  Time,           // s
  MagneticField,  // T
  Mass,           // kg
  Length,         // m
  Flux,           // Phi0 units
  Count,          // positive integer
  Scalar,         // dimensionless
};

inline const char* base_unit(Dimension d) {
  switch (d) {
    case Dimension::Frequency: return "Hz";
    case Dimension::Time: return "s";
    case Dimension::MagneticField: return "T";
    case Dimension::Mass: return "kg";
    case Dimension::Length: return "m";
    case Dimension::Flux: return "Phi0";
    case Dimension::Count: return "";
    case Dimension::Scalar: return "";
  }
  return "";
}

namespace detail {

struct UnitEntry {
  const char* token;
  Dimension dimension;
  double factor;
};

inline const std::vector<UnitEntry>& unit_table() {
  static const std::vector<UnitEntry> table = {
      {"Hz", Dimension::Frequency, 1.0},
      {"kHz", Dimension::Frequency, 1e3},
      {"MHz", Dimension::Frequency, 1e6},
      {"GHz", Dimension::Frequency, 1e9},
      {"s", Dimension::Time, 1.0},
      {"ms", Dimension::Time, 1e-3},
      {"us", Dimension::Time, 1e-6},
      {"ns", Dimension::Time, 1e-9},
      {"T", Dimension::MagneticField, 1.0},
      {"mT", Dimension::MagneticField, 1e-3},
      {"uT", Dimension::MagneticField, 1e-6},
      {"kg", Dimension::Mass, 1.0},
      {"pg", Dimension::Mass, 1e-15},
      {"fg", Dimension::Mass, 1e-18},
      {"m", Dimension::Length, 1.0},
      {"mm", Dimension::Length, 1e-3},
      {"um", Dimension::Length, 1e-6},
      {"nm", Dimension::Length, 1e-9},
      {"pm", Dimension::Length, 1e-12},
      {"fm", Dimension::Length, 1e-15},
      {"Phi0", Dimension::Flux, 1.0},
  };
  return table;
}

inline int levenshtein(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = int(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = int(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::string trim(const std::string& s) {
  size_t lo = 0, hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

} // namespace detail

/// One declared parameter of a scenario. Defaults may be NaN, meaning the
/// runner derives the value from the rest of the configuration; derived values
/// still land in the resolved config that accompanies every run.
struct ParamSpec {
  std::string name;
  Dimension dimension = Dimension::Scalar;
  double default_value = 0.0;
  std::string description;
};

struct ConfigEntry {
  std::string key;
  std::string value_text;
  int line = 0;
  int column = 0;
};

/// Splits flat "key = value" text. '#' starts a comment; blank lines ignored.
inline std::vector<ConfigEntry> parse_config_text(const std::string& text) {
  std::vector<ConfigEntry> entries;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config parse error at line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    ConfigEntry entry;
    entry.key = detail::trim(line.substr(0, eq));
    entry.value_text = detail::trim(line.substr(eq + 1));
    entry.line = line_no;
    entry.column = int(eq) + 2;
    if (entry.key.empty() || entry.value_text.empty()) {
      throw ConfigError("config parse error at line " + std::to_string(line_no) + ", column " +
                        std::to_string(entry.column) + ": empty key or value");
    }
    entries.push_back(entry);
  }
  return entries;
}

/// "6 MHz" -> 6e6 for a Frequency key; bare numbers mean the base unit.
inline double parse_value(const std::string& text, Dimension dim, const std::string& key,
                          int line) {
  std::istringstream is(text);
  double number = 0.0;
  if (!(is >> number)) {
    throw ConfigError("config parse error at line " + std::to_string(line) + ": key '" + key +
                      "' has a non-numeric value '" + text + "'");
  }
  std::string unit;
  is >> unit;
  std::string extra;
  if (is >> extra) {
    throw ConfigError("config parse error at line " + std::to_string(line) + ": key '" + key +
                      "' has trailing text after the unit");
  }
  if (!unit.empty()) {
    for (const auto& entry : detail::unit_table()) {
      if (unit == entry.token) {
        if (entry.dimension != dim) {
          throw ConfigError("unit mismatch at line " + std::to_string(line) + ": key '" + key +
                            "' expects " + (std::string(base_unit(dim)).empty()
                                                ? std::string("a dimensionless value")
                                                : std::string(base_unit(dim))) +
                            " but got '" + unit + "'");
        }
        return number * entry.factor;
      }
    }
    throw ConfigError("unknown unit '" + unit + "' at line " + std::to_string(line) +
                      " for key '" + key + "'");
  }
  if (dim == Dimension::Count) {
    if (number != std::floor(number) || number < 0.0) {
      throw ConfigError("key '" + key + "' expects a non-negative integer, got '" + text + "'");
    }
  }
  return number;
}

/// Fully resolved flat configuration in base units, ordered for deterministic
/// serialization and hashing.
struct ResolvedConfig {
  std::string scenario;
  std::map<std::string, double> values;
  std::map<std::string, Dimension> dimensions;

  double get(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) {
      throw std::logic_error("ResolvedConfig: key '" + key + "' was never declared");
    }
    return it->second;
  }

  int get_count(const std::string& key) const { return int(std::llround(get(key))); }

  void set(const std::string& key, double value) {
    if (!values.count(key)) {
      throw std::logic_error("ResolvedConfig: key '" + key + "' was never declared");
    }
    values[key] = value;
  }
};

/// Applies entries against a schema: unknown keys are rejected with the
/// nearest valid name, duplicates are errors, units must match.
inline ResolvedConfig validate_config(const std::string& scenario,
                                      const std::vector<ParamSpec>& schema,
                                      const std::vector<ConfigEntry>& entries) {
  ResolvedConfig resolved;
  resolved.scenario = scenario;
  for (const auto& p : schema) {
    resolved.values[p.name] = p.default_value;
    resolved.dimensions[p.name] = p.dimension;
  }
  std::map<std::string, int> seen;
  for (const auto& entry : entries) {
    const auto spec = std::find_if(schema.begin(), schema.end(),
                                   [&](const ParamSpec& p) { return p.name == entry.key; });
    if (spec == schema.end()) {
      std::string nearest;
      int best = 1 << 20;
      for (const auto& p : schema) {
        const int d = detail::levenshtein(entry.key, p.name);
        if (d < best) {
          best = d;
          nearest = p.name;
        }
      }
      throw ConfigError("unknown key '" + entry.key + "' at line " + std::to_string(entry.line) +
                        " for scenario '" + scenario + "'; nearest valid key is '" + nearest +
                        "'");
    }
    if (seen.count(entry.key)) {
      throw ConfigError("duplicate key '" + entry.key + "' at line " + std::to_string(entry.line) +
                        " (first set at line " + std::to_string(seen[entry.key]) + ")");
    }
    seen[entry.key] = entry.line;
    resolved.values[entry.key] = parse_value(entry.value_text, spec->dimension, entry.key,
                                             entry.line);
  }
  return resolved;
}

namespace detail {

inline std::string format_config_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace detail

/// Canonical text form: sorted keys, base units, full precision.
inline std::string serialize_config(const ResolvedConfig& config) {
  std::ostringstream os;
  os << "scenario = " << config.scenario << "\n";
  for (const auto& [key, value] : config.values) {
    os << key << " = " << detail::format_config_value(value);
    const std::string unit = base_unit(config.dimensions.at(key));
    if (!unit.empty()) os << " " << unit;
    os << "\n";
  }
  return os.str();
}

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

inline std::string config_hash(const ResolvedConfig& config) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(serialize_config(config))));
  return buf;
}

} // namespace fluxmech
