#pragma once

// JSON run configuration shared by the CLI subcommands.

#include <algorithm>
#include <array>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "twomode/model.hpp"

namespace twomode {

/// Malformed or inconsistent configuration (CLI exit status 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TimeGrid {
  double t_start = 0.0;
  double t_end = 0.0;
  int n_points = 0;

  double at(int i) const {
    if (i == n_points - 1) return t_end;
    return t_start + (t_end - t_start) * static_cast<double>(i) / (n_points - 1);
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

struct SweepAxis {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  int n = 0;

  double at(int i) const {
    if (i == n - 1) return max;
    return min + (max - min) * static_cast<double>(i) / (n - 1);
  }

  friend bool operator==(const SweepAxis&, const SweepAxis&) = default;
};

enum class SweepScaling { kRaw, kScaled };

/// In scaled mode axis1 sweeps m w D_xx / lambda and axis2 sweeps
/// D_xpy / sqrt(lambda^2 + w^2); in raw mode each axis sets a named coefficient.
struct SweepConfig {
  SweepAxis axis1{"D_xx", 0.5, 1.5, 21};
  SweepAxis axis2{"D_xpy", 0.0, 2.0, 41};
  SweepScaling scaling = SweepScaling::kScaled;

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct RunConfig {
  OscillatorParams osc{1.0, 1.0};
  EnvironmentParams env;
  std::optional<Mat4> initial_state;  // empty: two-mode vacuum
  ValidationMode validation = ValidationMode::kStrict;
  std::optional<TimeGrid> time_grid;
  std::optional<SweepConfig> sweep;

  CovarianceMatrix initial_covariance() const {
    return initial_state ? CovarianceMatrix(*initial_state) : make_vacuum_covariance(osc);
  }

  friend bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.osc == b.osc && a.env == b.env && a.validation == b.validation &&
           a.time_grid == b.time_grid && a.sweep == b.sweep &&
           a.initial_state.has_value() == b.initial_state.has_value() &&
           (!a.initial_state || *a.initial_state == *b.initial_state);
  }
};

/// Coefficient names accepted in configs and sweep axes, paired with the
/// field they address and the y-duplicate mirrored in the symmetric class.
struct CoefficientField {
  const char* name;
  double EnvironmentParams::*field;
  double EnvironmentParams::*mirror;  // nullptr: no mirror
};

inline const std::array<CoefficientField, 11>& coefficient_fields() {
  using E = EnvironmentParams;
  static const std::array<CoefficientField, 11> fields{{
      {"lambda", &E::lambda, nullptr},
      {"D_xx", &E::d_xx, &E::d_yy},
      {"D_xpx", &E::d_xpx, &E::d_ypy},
      {"D_xy", &E::d_xy, nullptr},
      {"D_xpy", &E::d_xpy, &E::d_ypx},
      {"D_ypx", &E::d_ypx, &E::d_xpy},
      {"D_pxpx", &E::d_pxpx, &E::d_pypy},
      {"D_yy", &E::d_yy, &E::d_xx},
      {"D_ypy", &E::d_ypy, &E::d_xpx},
      {"D_pxpy", &E::d_pxpy, nullptr},
      {"D_pypy", &E::d_pypy, &E::d_pxpx},
  }};
  return fields;
}

inline const CoefficientField* find_coefficient(const std::string& name) {
  for (const auto& f : coefficient_fields())
    if (name == f.name) return &f;
  return nullptr;
}

namespace detail {

using json = nlohmann::json;

inline double number_at(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing field '" + where + "." + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number())
    throw ConfigError("field '" + where + "." + key + "' must be a number");
  return v.get<double>();
}

inline int int_at(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing field '" + where + "." + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number_integer())
    throw ConfigError("field '" + where + "." + key + "' must be an integer");
  return v.get<int>();
}

inline const json& object_at(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ConfigError(std::string("missing section '") + key + "'");
  const json& v = obj.at(key);
  if (!v.is_object()) throw ConfigError(std::string("section '") + key + "' must be an object");
  return v;
}

inline SweepAxis parse_axis(const json& j, const std::string& where, SweepAxis axis) {
  if (!j.is_object()) throw ConfigError("field '" + where + "' must be an object");
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw ConfigError("field '" + where + ".name' must be a string");
    axis.name = j.at("name").get<std::string>();
  }
  if (j.contains("min")) axis.min = number_at(j, "min", where);
  if (j.contains("max")) axis.max = number_at(j, "max", where);
  if (j.contains("n")) axis.n = int_at(j, "n", where);
  if (!find_coefficient(axis.name))
    throw ConfigError("field '" + where + ".name': unknown coefficient '" + axis.name + "'");
  if (axis.n < 2) throw ConfigError("field '" + where + ".n' must be >= 2");
  if (!(axis.min < axis.max)) throw ConfigError("field '" + where + "': min must be < max");
  return axis;
}

inline std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& doc) {
  using detail::json;
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  RunConfig cfg;

  const json& osc = detail::object_at(doc, "oscillator");
  try {
    cfg.osc = OscillatorParams(detail::number_at(osc, "m", "oscillator"),
                               detail::number_at(osc, "omega", "oscillator"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("oscillator: ") + e.what());
  }

  const json& env = detail::object_at(doc, "environment");
  for (const auto& [key, _] : env.items())
    if (!find_coefficient(key)) throw ConfigError("unknown field 'environment." + key + "'");
  cfg.env.lambda = detail::number_at(env, "lambda", "environment");
  // x-side coefficients default to 0; omitted y-duplicates mirror their x partner.
  for (const auto& f : coefficient_fields()) {
    if (std::string(f.name) == "lambda") continue;
    if (env.contains(f.name)) cfg.env.*f.field = detail::number_at(env, f.name, "environment");
  }
  for (const auto& [y_name, x_name] : {std::pair{"D_yy", "D_xx"}, std::pair{"D_ypy", "D_xpx"},
                                       std::pair{"D_pypy", "D_pxpx"}, std::pair{"D_ypx", "D_xpy"}}) {
    if (!env.contains(y_name)) cfg.env.*find_coefficient(y_name)->field =
        cfg.env.*find_coefficient(x_name)->field;
  }
  if (!cfg.env.all_finite()) throw ConfigError("environment coefficients must be finite");

  if (doc.contains("initial_state")) {
    const json& is = doc.at("initial_state");
    if (is.is_string()) {
      if (is.get<std::string>() != "vacuum")
        throw ConfigError("field 'initial_state' must be \"vacuum\" or a 4x4 array");
    } else if (is.is_array() && is.size() == 4) {
      Mat4 m;
      for (int r = 0; r < 4; ++r) {
        const json& row = is.at(r);
        if (!row.is_array() || row.size() != 4)
          throw ConfigError("field 'initial_state' row " + std::to_string(r) + " must have 4 entries");
        for (int c = 0; c < 4; ++c) {
          if (!row.at(c).is_number())
            throw ConfigError("field 'initial_state' entries must be numbers");
          m(r, c) = row.at(c).get<double>();
        }
      }
      const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ConfigError("field 'initial_state' must be a symmetric matrix");
      cfg.initial_state = m;
    } else {
      throw ConfigError("field 'initial_state' must be \"vacuum\" or a 4x4 array");
    }
  }

  if (doc.contains("validation")) {
    const json& v = doc.at("validation");
    const std::string mode = v.is_string() ? v.get<std::string>() : "";
    if (mode == "strict")
      cfg.validation = ValidationMode::kStrict;
    else if (mode == "lenient")
      cfg.validation = ValidationMode::kLenient;
    else
      throw ConfigError("field 'validation' must be \"strict\" or \"lenient\"");
  }

  if (doc.contains("time_grid")) {
    const json& tg = doc.at("time_grid");
    if (!tg.is_object()) throw ConfigError("section 'time_grid' must be an object");
    TimeGrid grid{detail::number_at(tg, "t_start", "time_grid"),
                  detail::number_at(tg, "t_end", "time_grid"),
                  detail::int_at(tg, "n_points", "time_grid")};
    if (grid.t_start < 0.0) throw ConfigError("field 'time_grid.t_start' must be >= 0");
    if (!(grid.t_end > grid.t_start))
      throw ConfigError("field 'time_grid.t_end' must be > t_start");
    if (grid.n_points < 2) throw ConfigError("field 'time_grid.n_points' must be >= 2");
    cfg.time_grid = grid;
  }

  if (doc.contains("sweep")) {
    const json& sw = doc.at("sweep");
    if (!sw.is_object()) throw ConfigError("section 'sweep' must be an object");
    SweepConfig sweep;
    if (sw.contains("scaling")) {
      const std::string s = sw.at("scaling").is_string() ? sw.at("scaling").get<std::string>() : "";
      if (s == "scaled")
        sweep.scaling = SweepScaling::kScaled;
      else if (s == "raw")
        sweep.scaling = SweepScaling::kRaw;
      else
        throw ConfigError("field 'sweep.scaling' must be \"raw\" or \"scaled\"");
    }
    if (sw.contains("axis1")) sweep.axis1 = detail::parse_axis(sw.at("axis1"), "sweep.axis1", sweep.axis1);
    if (sw.contains("axis2")) sweep.axis2 = detail::parse_axis(sw.at("axis2"), "sweep.axis2", sweep.axis2);
    cfg.sweep = sweep;
  }
  return cfg;
}

inline RunConfig parse_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("JSON syntax error at line " +
                      std::to_string(detail::line_of_byte(text, e.byte)) + ": " + e.what());
  }
  return config_from_json(doc);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

/// Full configuration echo; every coefficient is written explicitly.
inline nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json doc;
  doc["oscillator"] = {{"m", cfg.osc.mass()}, {"omega", cfg.osc.omega()}};
  nlohmann::json env = nlohmann::json::object();
  for (const auto& f : coefficient_fields()) env[f.name] = cfg.env.*f.field;
  doc["environment"] = env;
  if (cfg.initial_state) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < 4; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < 4; ++c) row.push_back((*cfg.initial_state)(r, c));
      rows.push_back(row);
    }
    doc["initial_state"] = rows;
  } else {
    doc["initial_state"] = "vacuum";
  }
  doc["validation"] = to_string(cfg.validation);
  if (cfg.time_grid)
    doc["time_grid"] = {{"t_start", cfg.time_grid->t_start},
                        {"t_end", cfg.time_grid->t_end},
                        {"n_points", cfg.time_grid->n_points}};
  if (cfg.sweep) {
    auto axis = [](const SweepAxis& a) {
      return nlohmann::json{{"name", a.name}, {"min", a.min}, {"max", a.max}, {"n", a.n}};
    };
    doc["sweep"] = {{"scaling", cfg.sweep->scaling == SweepScaling::kScaled ? "scaled" : "raw"},
                    {"axis1", axis(cfg.sweep->axis1)},
                    {"axis2", axis(cfg.sweep->axis2)}};
  }
  return doc;
}

}  // namespace twomode
