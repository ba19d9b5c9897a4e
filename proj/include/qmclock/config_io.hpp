#pragma once

// Declarative scenario files (JSON) and the string forms used on the command
// line: --pulse {pi|pi2|omega=<rad/s>}, --geometry {rabi|ramsey}.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qmclock/error.hpp"
#include "qmclock/experiments.hpp"
#include "qmclock/physics.hpp"
#include "qmclock/scenario.hpp"

namespace qmclock {

inline Pulse parse_pulse(const std::string& s) {
  if (s == "pi") return Pulse::pi();
  if (s == "pi2" || s == "pi/2" || s == "half_pi") return Pulse::half_pi();
  if (s.rfind("omega=", 0) == 0) {
    const std::string num = s.substr(6);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(num, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad pulse '" + s + "'");
    }
    if (used != num.size()) throw ConfigError("bad pulse '" + s + "'");
    return Pulse::explicit_omega(v);
  }
  throw ConfigError("pulse must be pi, pi2 or omega=<rad/s>, got '" + s + "'");
}

inline Geometry parse_geometry(const std::string& s) {
  if (s == "rabi") return Geometry::Rabi;
  if (s == "ramsey") return Geometry::Ramsey;
  throw ConfigError("geometry must be rabi or ramsey, got '" + s + "'");
}

inline Spacing parse_spacing(const std::string& s) {
  if (s == "linear") return Spacing::Linear;
  if (s == "log") return Spacing::Log;
  throw ConfigError("spacing must be linear or log, got '" + s + "'");
}

/// Scenario fields before validation. The gap is kept as a ratio N = L/l so
/// that field-width overrides keep N fixed.
struct ScenarioDraft {
  PhysicalConstants constants = PhysicalConstants::cesium();
  double velocity = 0.05;
  double field_width = 3e-3;
  double gap_ratio = 0.0;
  std::string pulse;  // empty: pi for Rabi, pi2 for Ramsey
  Geometry geometry = Geometry::Rabi;

  ScenarioConfig resolve() const {
    ScenarioConfig c;
    c.constants = constants;
    c.velocity = velocity;
    c.field_width = field_width;
    c.geometry = geometry;
    c.gap = geometry == Geometry::Ramsey ? gap_ratio * field_width : 0.0;
    if (pulse.empty())
      c.pulse = geometry == Geometry::Rabi ? Pulse::pi() : Pulse::half_pi();
    else
      c.pulse = parse_pulse(pulse);
    c.validate();
    return c;
  }
};

namespace detail {

template <typename T>
T json_get(const nlohmann::json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace detail

/// Applies the scenario keys of a config object on top of `draft`.
/// Recognized keys: dimensionless, hbar, mass, omega0, velocity,
/// field_width, gap_ratio, pulse, geometry.
inline void apply_scenario_json(const nlohmann::json& j, ScenarioDraft& draft) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  if (detail::json_get(j, "dimensionless", false)) draft.constants = PhysicalConstants::dimensionless();
  draft.constants.hbar = detail::json_get(j, "hbar", draft.constants.hbar);
  draft.constants.mass = detail::json_get(j, "mass", draft.constants.mass);
  draft.constants.omega0 = detail::json_get(j, "omega0", draft.constants.omega0);
  draft.velocity = detail::json_get(j, "velocity", draft.velocity);
  draft.field_width = detail::json_get(j, "field_width", draft.field_width);
  draft.gap_ratio = detail::json_get(j, "gap_ratio", draft.gap_ratio);
  draft.pulse = detail::json_get(j, "pulse", draft.pulse);
  if (j.contains("geometry")) draft.geometry = parse_geometry(detail::json_get<std::string>(j, "geometry", ""));
  else if (j.contains("gap_ratio") && draft.gap_ratio > 0.0) draft.geometry = Geometry::Ramsey;
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

/// Numeric columns of a '#'-commented CSV with a header line.
struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return columns[i];
    throw ConfigError("no column '" + name + "' in data file");
  }
};

inline CsvData read_csv_numeric(std::istream& in) {
  CsvData d;
  std::string line;
  const auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (d.header.empty()) {
      d.header = cells;
      d.columns.assign(cells.size(), {});
      continue;
    }
    for (std::size_t i = 0; i < d.header.size(); ++i) {
      double v = kNaN;
      if (i < cells.size()) {
        try {
          v = std::stod(cells[i]);
        } catch (const std::exception&) {
        }
      }
      d.columns[i].push_back(v);
    }
  }
  if (d.header.empty()) throw ConfigError("data file has no header line");
  return d;
}

}  // namespace qmclock
