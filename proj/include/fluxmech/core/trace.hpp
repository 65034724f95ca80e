#pragma once

#include <cstdio>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fluxmech {

/// One swept independent variable plus named response columns. The grid must
/// be strictly monotone and every column must match its length. Metadata
/// travels with the trace and is serialized as '#'-prefixed header lines.
struct TraceColumn {
  std::string name;
  std::string unit;
  std::vector<double> values;
};

struct SpectrumTrace {
  std::string x_name;
  std::string x_unit;
  std::vector<double> x;
  std::deque<TraceColumn> columns;
  std::vector<std::pair<std::string, std::string>> metadata;

  void add_metadata(std::string key, std::string value) {
    metadata.emplace_back(std::move(key), std::move(value));
  }

  TraceColumn& add_column(std::string name, std::string unit) {
    columns.push_back({std::move(name), std::move(unit), {}});
    columns.back().values.reserve(x.size());
    return columns.back();
  }

  const TraceColumn& column(const std::string& name) const {
    for (const auto& c : columns) {
      if (c.name == name) return c;
    }
    throw std::out_of_range("SpectrumTrace: no column named '" + name + "'");
  }

  void validate() const {
    for (size_t i = 1; i < x.size(); ++i) {
      const bool up = x[1] > x[0];
      if (up ? !(x[i] > x[i - 1]) : !(x[i] < x[i - 1])) {
        throw std::invalid_argument("SpectrumTrace: grid is not strictly monotone near index " +
                                    std::to_string(i));
      }
    }
    for (const auto& c : columns) {
      if (c.values.size() != x.size()) {
        throw std::invalid_argument("SpectrumTrace: column '" + c.name +
                                    "' length does not match grid length");
      }
    }
  }
};

namespace detail {

/// Full-precision decimal form; 17 significant digits round-trip a binary64.
inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace detail

inline void write_csv(const SpectrumTrace& trace, std::ostream& os) {
  trace.validate();
  for (const auto& [k, v] : trace.metadata) os << "# " << k << ": " << v << "\n";
  os << trace.x_name << " [" << trace.x_unit << "]";
  for (const auto& c : trace.columns) os << "," << c.name << " [" << c.unit << "]";
  os << "\n";
  for (size_t i = 0; i < trace.x.size(); ++i) {
    os << detail::format_full(trace.x[i]);
    for (const auto& c : trace.columns) os << "," << detail::format_full(c.values[i]);
    os << "\n";
  }
}

inline void write_csv_file(const SpectrumTrace& trace, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_csv_file: cannot open '" + path + "'");
  write_csv(trace, os);
}

inline SpectrumTrace read_csv(std::istream& is) {
  SpectrumTrace trace;
  std::string line;
  bool have_header = false;
  auto split_name_unit = [](const std::string& field, std::string& name, std::string& unit) {
    const auto lb = field.rfind(" [");
    if (lb != std::string::npos && field.back() == ']') {
      name = field.substr(0, lb);
      unit = field.substr(lb + 2, field.size() - lb - 3);
    } else {
      name = field;
      unit.clear();
    }
  };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      const auto colon = body.find(": ");
      if (colon != std::string::npos) {
        trace.add_metadata(body.substr(0, colon), body.substr(colon + 2));
      } else {
        trace.add_metadata(body, "");
      }
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!have_header) {
      if (fields.empty()) throw std::runtime_error("read_csv: missing header row");
      split_name_unit(fields[0], trace.x_name, trace.x_unit);
      for (size_t i = 1; i < fields.size(); ++i) {
        std::string name, unit;
        split_name_unit(fields[i], name, unit);
        trace.add_column(name, unit);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != trace.columns.size() + 1) {
      throw std::runtime_error("read_csv: row width does not match header");
    }
    trace.x.push_back(std::stod(fields[0]));
    for (size_t i = 0; i < trace.columns.size(); ++i) {
      trace.columns[i].values.push_back(std::stod(fields[i + 1]));
    }
  }
  trace.validate();
  return trace;
}

inline SpectrumTrace read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_csv_file: cannot open '" + path + "'");
  return read_csv(is);
}

} // namespace fluxmech
