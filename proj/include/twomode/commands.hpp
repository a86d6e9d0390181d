#pragma once

// Subcommand implementations behind the `twomode` CLI. Each command writes to
// a stream and returns the process exit status:
//   0 success, 1 usage or parse error, 2 physics-validation or solver error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "twomode/config.hpp"
#include "twomode/dynamics.hpp"
#include "twomode/entanglement.hpp"
#include "twomode/model.hpp"

namespace twomode {

inline constexpr const char* kVersion = "1.0.0";

enum class OutputFormat { kCsv, kJson };

enum ExitStatus : int { kExitOk = 0, kExitUsage = 1, kExitPhysics = 2 };

/// 17 significant digits: round-trip safe for doubles.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

struct MetadataOptions {
  bool timestamp = true;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_metadata(std::ostream& os, const std::string& command, const RunConfig& cfg,
                           const MetadataOptions& opts) {
  os << "# twomode " << command << "\n";
  os << "# version: " << kVersion << "\n";
  os << "# validation: " << to_string(cfg.validation) << "\n";
  os << "# config: " << config_to_json(cfg).dump() << "\n";
  if (opts.timestamp) os << "# generated: " << utc_timestamp() << "\n";
}

inline nlohmann::json metadata_json(const std::string& command, const RunConfig& cfg,
                                    const MetadataOptions& opts) {
  nlohmann::json meta{{"command", command},
                      {"version", kVersion},
                      {"validation", to_string(cfg.validation)},
                      {"config", config_to_json(cfg)}};
  if (opts.timestamp) meta["generated"] = utc_timestamp();
  return meta;
}

namespace detail {

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline void flatten(const nlohmann::json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, os);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), os);
  } else if (j.is_null()) {
    os << prefix << ",\n";
  } else if (j.is_number()) {
    os << prefix << "," << format_number(j.get<double>()) << "\n";
  } else if (j.is_boolean()) {
    os << prefix << "," << (j.get<bool>() ? "true" : "false") << "\n";
  } else {
    os << prefix << "," << j.get<std::string>() << "\n";
  }
}

/// Emits `payload` as JSON (with metadata) or as flattened `quantity,value` CSV.
inline void emit_document(std::ostream& os, OutputFormat fmt, const std::string& command,
                          const RunConfig& cfg, const MetadataOptions& opts,
                          const nlohmann::json& payload) {
  if (fmt == OutputFormat::kJson) {
    nlohmann::json doc{{"metadata", metadata_json(command, cfg, opts)}, {"result", payload}};
    os << doc.dump(2) << "\n";
    return;
  }
  write_metadata(os, command, cfg, opts);
  os << "quantity,value\n";
  flatten(payload, "", os);
}

}  // namespace detail

/// Names of the ten independent covariance entries, upper triangle row-major.
inline const std::array<std::pair<const char*, std::pair<int, int>>, 10>& sigma_entries() {
  static const std::array<std::pair<const char*, std::pair<int, int>>, 10> entries{{
      {"sigma_xx", {kX, kX}},
      {"sigma_xpx", {kX, kPx}},
      {"sigma_xy", {kX, kY}},
      {"sigma_xpy", {kX, kPy}},
      {"sigma_pxpx", {kPx, kPx}},
      {"sigma_ypx", {kPx, kY}},
      {"sigma_pxpy", {kPx, kPy}},
      {"sigma_yy", {kY, kY}},
      {"sigma_ypy", {kY, kPy}},
      {"sigma_pypy", {kPy, kPy}},
  }};
  return entries;
}

inline nlohmann::json covariance_json(const CovarianceMatrix& s) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, rc] : sigma_entries()) j[name] = s(rc.first, rc.second);
  return j;
}

inline nlohmann::json validation_json(const ValidationReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"margin", c.margin}, {"passed", c.passed}});
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : r.failures()) failures.push_back(f);
  return {{"mode", to_string(r.mode)},
          {"passed", r.passed()},
          {"min_gram_eigenvalue", detail::optional_json(r.min_gram_eigenvalue)},
          {"failures", failures},
          {"checks", checks}};
}

inline nlohmann::json report_json(const EntanglementReport& r) {
  nlohmann::json j{
      {"det_a", r.det_a},
      {"det_b", r.det_b},
      {"det_c", r.det_c},
      {"det_sigma", r.det_sigma},
      {"S_general", r.s_general},
      {"S_special", detail::optional_json(r.s_special)},
      {"det_c_closed", detail::optional_json(r.det_c_closed)},
      {"f_sigma", detail::optional_json(r.f_sigma)},
      {"E_general", detail::optional_json(r.e_general)},
      {"E_closed", detail::optional_json(r.e_closed)},
      {"verdict", to_string(r.verdict)},
  };
  if (r.window)
    j["window"] = {{"lower", r.window->lower}, {"upper", r.window->upper}};
  else
    j["window"] = nullptr;
  j["valid_strict"] = r.valid_strict ? nlohmann::json(*r.valid_strict) : nlohmann::json(nullptr);
  j["valid_lenient"] = r.valid_lenient ? nlohmann::json(*r.valid_lenient) : nlohmann::json(nullptr);
  j["notes"] = r.notes;
  return j;
}

inline int cmd_validate(const RunConfig& cfg, std::ostream& os, OutputFormat fmt,
                        const MetadataOptions& opts = {}) {
  const ValidationReport report = validate_environment(cfg.env, cfg.validation);
  detail::emit_document(os, fmt, "validate", cfg, opts, validation_json(report));
  return report.passed() ? kExitOk : kExitPhysics;
}

/// Message describing why the configured environment cannot be simulated, or
/// empty when it can.
inline std::string physics_precheck(const RunConfig& cfg, const ValidationReport& report) {
  if (!(cfg.env.lambda > 0.0))
    return "NotHurwitz: lambda must be > 0 for a steady state to exist";
  if (!report.passed()) {
    std::string msg = "environment fails " + to_string(cfg.validation) + " validation:";
    for (const auto& f : report.failures()) msg += " [" + f + "]";
    return msg;
  }
  return {};
}

inline int cmd_steady_state(const RunConfig& cfg, std::ostream& os, std::ostream& err,
                            OutputFormat fmt, const MetadataOptions& opts = {}) {
  const ValidationReport validation = validate_environment(cfg.env, cfg.validation);
  if (const auto problem = physics_precheck(cfg, validation); !problem.empty()) {
    err << "error: " << problem << "\n";
    return kExitPhysics;
  }
  const DriftMatrix y = build_drift_matrix(cfg.osc, cfg.env);
  const LyapunovSolution lyap = solve_lyapunov(y, build_diffusion_matrix(cfg.env));

  nlohmann::json payload;
  payload["validation"] = validation_json(validation);
  payload["sigma_inf_lyapunov"] = covariance_json(lyap.sigma);
  payload["lyapunov_residual"] = lyap.residual;
  payload["ill_conditioned"] = lyap.ill_conditioned;
  if (lyap.ill_conditioned) err << "warning: lambda << omega; steady state is ill-conditioned\n";
  if (const auto sym = SymmetricEnvironmentParams::from(cfg.env)) {
    const CovarianceMatrix closed = steady_state_closed_form(cfg.osc, *sym);
    payload["sigma_inf_closed_form"] = covariance_json(closed);
    payload["route_discrepancy"] = (closed.matrix() - lyap.sigma.matrix()).cwiseAbs().maxCoeff();
  } else {
    payload["sigma_inf_closed_form"] = nullptr;
    payload["route_discrepancy"] = nullptr;
  }
  payload["entanglement"] = report_json(analyze(lyap.sigma, AnalysisContext{cfg.osc, cfg.env}));
  detail::emit_document(os, fmt, "steady-state", cfg, opts, payload);
  return kExitOk;
}

inline int cmd_evolve(const RunConfig& cfg, std::ostream& os, std::ostream& err, OutputFormat fmt,
                      const MetadataOptions& opts = {}) {
  if (!cfg.time_grid) {
    err << "error: evolve requires a 'time_grid' section\n";
    return kExitUsage;
  }
  const ValidationReport validation = validate_environment(cfg.env, cfg.validation);
  if (const auto problem = physics_precheck(cfg, validation); !problem.empty()) {
    err << "error: " << problem << "\n";
    return kExitPhysics;
  }
  const CovarianceMatrix sigma0 = cfg.initial_covariance();
  if (!sigma0.is_positive_definite()) {
    err << "error: initial covariance matrix is not positive definite\n";
    return kExitPhysics;
  }
  const DriftMatrix y = build_drift_matrix(cfg.osc, cfg.env);
  const CovarianceMatrix sigma_inf = steady_state_lyapunov(y, build_diffusion_matrix(cfg.env));

  struct Row {
    double t;
    CovarianceMatrix sigma;
    double s;
    std::optional<double> e;
    double dist;
  };
  std::vector<Row> rows;
  rows.reserve(static_cast<std::size_t>(cfg.time_grid->n_points));
  for (int i = 0; i < cfg.time_grid->n_points; ++i) {
    const double t = cfg.time_grid->at(i);
    const CovarianceMatrix s = propagate(sigma0, sigma_inf, y, t);
    const EntanglementReport rep = analyze(s);
    rows.push_back({t, s, rep.s_general, rep.e_general,
                    (s.matrix() - sigma_inf.matrix()).cwiseAbs().maxCoeff()});
  }

  if (fmt == OutputFormat::kJson) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json j = covariance_json(r.sigma);
      j["t"] = r.t;
      j["S"] = r.s;
      j["E"] = detail::optional_json(r.e);
      j["dist_max"] = r.dist;
      out.push_back(j);
    }
    nlohmann::json doc{{"metadata", metadata_json("evolve", cfg, opts)},
                       {"sigma_inf", covariance_json(sigma_inf)},
                       {"rows", out}};
    os << doc.dump(2) << "\n";
    return kExitOk;
  }
  write_metadata(os, "evolve", cfg, opts);
  os << "t";
  for (const auto& [name, _] : sigma_entries()) os << "," << name;
  os << ",S,E,dist_max\n";
  for (const auto& r : rows) {
    os << format_number(r.t);
    for (const auto& [_, rc] : sigma_entries()) os << "," << format_number(r.sigma(rc.first, rc.second));
    os << "," << format_number(r.s) << "," << format_optional(r.e) << "," << format_number(r.dist)
       << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Sweep engine

struct SweepRow {
  double axis1 = 0.0;
  double axis2 = 0.0;
  double d_xx = 0.0;
  double d_xpy = 0.0;
  bool valid_strict = false;
  bool valid_lenient = false;
  std::optional<double> s_general;
  std::optional<double> s_special;
  std::optional<double> e_general;
  std::optional<double> e_closed;
  std::string verdict;
};

inline const char* kSweepColumns =
    "axis1,axis2,D_xx,D_xpy,valid_strict,valid_lenient,S_general,S_special,E_general,E_closed,"
    "verdict";

/// Coefficients at one grid point. Scaled mode keeps the special class:
/// D_pxpx = D_pypy = m^2 w^2 D_xx and D_ypx = D_xpy.
inline EnvironmentParams sweep_point_environment(const RunConfig& cfg, double v1, double v2) {
  const SweepConfig& sw = *cfg.sweep;
  EnvironmentParams env = cfg.env;
  if (sw.scaling == SweepScaling::kScaled) {
    const double m = cfg.osc.mass();
    const double w = cfg.osc.omega();
    env.d_xx = env.d_yy = v1 * env.lambda / (m * w);
    env.d_pxpx = env.d_pypy = m * m * w * w * env.d_xx;
    env.d_xpy = env.d_ypx = v2 * std::sqrt(env.lambda * env.lambda + w * w);
    return env;
  }
  for (const auto& [axis, value] : {std::pair{&sw.axis1, v1}, std::pair{&sw.axis2, v2}}) {
    const CoefficientField* f = find_coefficient(axis->name);
    env.*f->field = value;
    if (f->mirror) env.*f->mirror = value;
  }
  return env;
}

inline SweepRow evaluate_sweep_point(const RunConfig& cfg, double v1, double v2) {
  SweepRow row;
  row.axis1 = v1;
  row.axis2 = v2;
  const EnvironmentParams env = sweep_point_environment(cfg, v1, v2);
  row.d_xx = env.d_xx;
  row.d_xpy = env.d_xpy;
  row.valid_strict = validate_environment(env, ValidationMode::kStrict).passed();
  row.valid_lenient = validate_environment(env, ValidationMode::kLenient).passed();
  if (!(env.lambda > 0.0)) {
    row.verdict = "not_hurwitz";
    return row;
  }
  const DriftMatrix y = build_drift_matrix(cfg.osc, env);
  const CovarianceMatrix sigma_inf = steady_state_lyapunov(y, build_diffusion_matrix(env));
  const EntanglementReport rep = analyze(sigma_inf, AnalysisContext{cfg.osc, env});
  row.s_general = rep.s_general;
  row.s_special = rep.s_special;
  // One-mode uncertainty: det A >= 1/4, i.e. m w D_xx / lambda >= 1/2 in the
  // special class.
  if (rep.det_a < 0.25 - 1e-12) {
    row.verdict = "uncertainty_violation";
    return row;
  }
  row.e_general = rep.e_general;
  row.e_closed = rep.e_closed;
  row.verdict = to_string(rep.verdict);
  return row;
}

/// Evaluates the grid row-major over (axis1, axis2). Points are independent and
/// are split across `jobs` threads; the result order is the grid order.
inline std::vector<SweepRow> run_sweep(const RunConfig& cfg, int jobs = 1) {
  const SweepConfig& sw = *cfg.sweep;
  const std::size_t n1 = static_cast<std::size_t>(sw.axis1.n);
  const std::size_t n2 = static_cast<std::size_t>(sw.axis2.n);
  std::vector<SweepRow> rows(n1 * n2);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t k = first; k < rows.size(); k += stride)
      rows[k] = evaluate_sweep_point(cfg, sw.axis1.at(static_cast<int>(k / n2)),
                                     sw.axis2.at(static_cast<int>(k % n2)));
  };
  const std::size_t n_threads = static_cast<std::size_t>(std::max(1, jobs));
  if (n_threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work, t, n_threads);
  }
  return rows;
}

/// Sweep semantics are defined for the symmetric class with D_xy = 0 only.
inline std::string sweep_precheck(const RunConfig& cfg) {
  if (!cfg.sweep) return "sweep requires a 'sweep' section";
  const auto sym = SymmetricEnvironmentParams::from(cfg.env);
  if (!sym || sym->d_xy != 0.0)
    return "sweep requires a symmetric-class base environment with D_xy = 0";
  return {};
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& os, std::ostream& err, OutputFormat fmt,
                     int jobs = 1, const MetadataOptions& opts = {}) {
  if (const auto problem = sweep_precheck(cfg); !problem.empty()) {
    err << "error: " << problem << "\n";
    return kExitUsage;
  }
  const std::vector<SweepRow> rows = run_sweep(cfg, jobs);

  if (fmt == OutputFormat::kJson) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows)
      out.push_back({{"axis1", r.axis1},
                     {"axis2", r.axis2},
                     {"D_xx", r.d_xx},
                     {"D_xpy", r.d_xpy},
                     {"valid_strict", r.valid_strict},
                     {"valid_lenient", r.valid_lenient},
                     {"S_general", detail::optional_json(r.s_general)},
                     {"S_special", detail::optional_json(r.s_special)},
                     {"E_general", detail::optional_json(r.e_general)},
                     {"E_closed", detail::optional_json(r.e_closed)},
                     {"verdict", r.verdict}});
    nlohmann::json doc{{"metadata", metadata_json("sweep", cfg, opts)}, {"rows", out}};
    os << doc.dump(2) << "\n";
    return kExitOk;
  }
  write_metadata(os, "sweep", cfg, opts);
  os << kSweepColumns << "\n";
  for (const auto& r : rows) {
    os << format_number(r.axis1) << "," << format_number(r.axis2) << "," << format_number(r.d_xx)
       << "," << format_number(r.d_xpy) << "," << (r.valid_strict ? "true" : "false") << ","
       << (r.valid_lenient ? "true" : "false") << "," << format_optional(r.s_general) << ","
       << format_optional(r.s_special) << "," << format_optional(r.e_general) << ","
       << format_optional(r.e_closed) << "," << r.verdict << "\n";
  }
  return kExitOk;
}

}  // namespace twomode
