// Command-line front end: validate, steady-state, evolve, sweep.

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "twomode/twomode.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic entanglement of two oscillators in a common Markovian bath"};
  app.require_subcommand(1);
  app.set_version_flag("--version", twomode::kVersion);

  std::string config_path;
  std::string output_path = "-";
  std::string format = "csv";
  int jobs = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--output", output_path, "Output path, or - for stdout");
    sub->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
  };
  auto* validate = app.add_subcommand("validate", "Check environment coefficients");
  auto* steady = app.add_subcommand("steady-state", "Asymptotic covariance and entanglement");
  auto* evolve = app.add_subcommand("evolve", "Covariance time series on the configured grid");
  auto* sweep = app.add_subcommand("sweep", "Two-parameter entanglement surface");
  for (auto* sub : {validate, steady, evolve, sweep}) add_common(sub);
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : twomode::kExitUsage;
  }

  twomode::RunConfig cfg;
  try {
    cfg = twomode::load_config(config_path);
  } catch (const twomode::ConfigError& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << "\n";
    return twomode::kExitUsage;
  }

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (output_path != "-") {
    file.open(output_path);
    if (!file) {
      std::cerr << "error: cannot open output '" << output_path << "'\n";
      return twomode::kExitUsage;
    }
    out = &file;
  }
  const auto fmt = format == "json" ? twomode::OutputFormat::kJson : twomode::OutputFormat::kCsv;

  try {
    if (*validate) return twomode::cmd_validate(cfg, *out, fmt);
    if (*steady) return twomode::cmd_steady_state(cfg, *out, std::cerr, fmt);
    if (*evolve) return twomode::cmd_evolve(cfg, *out, std::cerr, fmt);
    return twomode::cmd_sweep(cfg, *out, std::cerr, fmt, jobs);
  } catch (const twomode::PhysicsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return twomode::kExitPhysics;
  }
}
