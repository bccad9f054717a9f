// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/cli.hpp"

#include <CLI11.hpp>
#include <ctime>
#include <fstream>
#include <optional>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "xheep/address_map.hpp"
#include "xheep/calibration.hpp"
#include "xheep/config.hpp"
#include "xheep/energy.hpp"
#include "xheep/error.hpp"
#include "xheep/scenario.hpp"
#include "xheep/sweep.hpp"

namespace xheep {

namespace {

nlohmann::json metadata() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return {{"generated_at", stamp}, {"tool", "xheep-sim 0.1.0"}};
}

nlohmann::ordered_json with_metadata(const nlohmann::json& body) {
  nlohmann::ordered_json out;
  out["metadata"] = metadata();
  for (const auto& [key, value] : body.items()) out[key] = value;
  return out;
}

void write_text(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  file << text;
  if (!file) throw Error(fmt::format("cannot write {}", path));
}

void emit(const nlohmann::json& body, const std::string& path, std::ostream& out) {
  write_text(with_metadata(body).dump(2) + "\n", path, out);
}

PlatformConfig checked_config(const std::string& path) {
  PlatformConfig c = load_config(path);
  const ValidationReport report = validate(c);
  if (!report.ok()) throw ConfigError(report.errors.front().field, report.to_string());
  return c;
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  const PlatformConfig c = load_config(path);
  const ValidationReport report = validate(c);
  if (!report.ok()) {
    for (const FieldError& e : report.errors) err << fmt::format("{}: {}: {}\n", path, e.field, e.message);
    return kExitValidation;
  }
  out << fmt::format("{}: ok\n", path);
  return kExitOk;
}

int cmd_report_static(const std::string& path, bool map, const std::string& out_path, std::ostream& out) {
  const PlatformConfig c = checked_config(path);
  nlohmann::json body = to_json(static_report(c, AreaModel{}, LeakageModel::for_config(c)));
  if (map) body["address_map"] = to_json(build_address_map(c));
  emit(body, out_path, out);
  return kExitOk;
}

int cmd_run(const std::string& path, const std::optional<std::string>& baseline, const std::string& trace_flag,
            const std::string& out_flag, const std::optional<std::uint64_t>& seed, std::ostream& out) {
  const Scenario s = load_scenario(path);
  RunOptions options;
  options.seed = seed;
  options.baseline = baseline;

  std::string trace_path = trace_flag;
  if (trace_path.empty() && s.trace_path) trace_path = s.trace_path->string();
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path, std::ios::binary);
    if (!trace) throw Error(fmt::format("cannot write {}", trace_path));
    options.trace = &trace;
  }
  const nlohmann::json report = run_scenario(s, options);
  if (trace.is_open()) {
    trace.close();
    if (!trace) throw Error(fmt::format("cannot write {}", trace_path));
  }

  std::string out_path = out_flag;
  if (out_path.empty() && s.report_path) out_path = s.report_path->string();
  emit(report, out_path, out);
  return kExitOk;
}

int cmd_sweep(const std::string& path, unsigned jobs, const std::string& csv, const std::string& out_path,
              std::ostream& out) {
  const SweepSpec spec = load_sweep(path);
  const SweepResult result = run_sweep(spec, jobs);
  if (!csv.empty()) write_text(to_csv(result), csv, out);
  if (csv.empty() || !out_path.empty()) emit(to_json(result, spec), out_path, out);
  return kExitOk;
}

int cmd_calibrate(const std::string& path, const std::string& out_path, std::ostream& out, std::ostream& err) {
  const CalibrationTargets targets = load_targets(path);
  const CalibrationResult result = calibrate(targets);
  emit(to_json(result, targets), out_path, out);
  err << fmt::format("calibrated {} models in {} simulations, max residual {:.4f}\n", result.fits.size(),
                     result.simulations, result.max_residual);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event-driven virtual platform for a configurable RISC-V microcontroller", "xheep-sim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "xheep-sim 0.1.0");

  std::string target;
  std::string out_path;

  auto* validate_cmd = app.add_subcommand("validate", "Check a platform config");
  validate_cmd->add_option("config", target, "Config JSON")->required();

  bool map = false;
  auto* static_cmd = app.add_subcommand("report-static", "Area and leakage breakdown of a config");
  static_cmd->add_option("config", target, "Config JSON")->required();
  static_cmd->add_flag("--map", map, "Include the address map");
  static_cmd->add_option("--out", out_path, "Write the report here instead of stdout");

  std::optional<std::string> baseline;
  std::string trace_path;
  std::optional<std::uint64_t> seed;
  auto* run_cmd = app.add_subcommand("run", "Execute a scenario");
  run_cmd->add_option("scenario", target, "Scenario JSON")->required();
  run_cmd->add_option("--baseline", baseline, "Run name, or report.json#name, to compute ratios against");
  run_cmd->add_option("--trace", trace_path, "Write the event trace CSV here");
  run_cmd->add_option("--out", out_path, "Write the report here instead of stdout");
  run_cmd->add_option("--seed", seed, "Override the scenario seed");

  unsigned jobs = 1;
  std::string csv;
  auto* sweep_cmd = app.add_subcommand("sweep", "Vary one exit-policy parameter");
  sweep_cmd->add_option("spec", target, "Sweep JSON")->required();
  sweep_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 256u));
  sweep_cmd->add_option("--csv", csv, "Write the table as CSV here");
  sweep_cmd->add_option("--out", out_path, "Write the JSON result here instead of stdout");

  auto* cal_cmd = app.add_subcommand("calibrate", "Fit cost and intensity parameters to ratio targets");
  cal_cmd->add_option("targets", target, "Targets JSON")->required();
  cal_cmd->add_option("--out", out_path, "Write the calibration here instead of stdout");

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*validate_cmd) return cmd_validate(target, out, err);
    if (*static_cmd) return cmd_report_static(target, map, out_path, out);
    if (*run_cmd) return cmd_run(target, baseline, trace_path, out_path, seed, out);
    if (*sweep_cmd) return cmd_sweep(target, jobs, csv, out_path, out);
    if (*cal_cmd) return cmd_calibrate(target, out_path, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "simulation error: " << e.what() << "\n";
    return kExitSimulation;
  }
  return kExitValidation;
}

}  // namespace xheep
