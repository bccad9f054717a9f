// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xheep/config.hpp"
#include "xheep/energy.hpp"
#include "xheep/workload.hpp"
#include "xheep/xaif.hpp"

namespace xheep {

/// The three runs every case study compares against CPU-only, no early exit.
struct RatioSet {
  double cpu_ee = 1.0;
  double accel_noee = 1.0;
  double accel_ee = 1.0;
  bool operator==(const RatioSet&) const = default;
};

struct ModelTarget {
  ModelSpec model;
  std::string model_file;
  double exit_rate = 0.0;
  RatioSet speedup;
  RatioSet energy_gain;
};

struct CalibrationTargets {
  PlatformConfig config;
  std::string config_file;
  double tolerance = 0.10;
  double cpu_active_cycle_pj = 10.0;
  /// Model whose offload runs pin cycles_per_element and the accelerator cost.
  std::size_t reference = 0;
  std::vector<ModelTarget> models;
};

CalibrationTargets load_targets(const std::filesystem::path& path);

/// Everything one benchmark run needs besides the model and policy.
struct Calibration {
  DynamicCostTable costs;
  Rational cycles_per_element{16384, 65536};
  std::map<std::string, SegmentIntensity> intensity;

  SegmentIntensity for_model(const std::string& name) const;
};

nlohmann::json to_json(const Calibration& c);
Calibration parse_calibration(const nlohmann::json& doc, const std::string& path);
Calibration load_calibration(const std::filesystem::path& path);

struct ModelFit {
  std::string name;
  double pre_exit_fraction = 0.0;
  double fitted_exit_fraction = 0.0;
  RatioSet speedup;
  RatioSet energy_gain;
  RatioSet speedup_residual;
  RatioSet energy_residual;
  /// Offload-system power over CPU-only power (speedup / energy gain).
  double power_ratio_noee = 0.0;
  double power_ratio_ee = 0.0;
};

struct CalibrationResult {
  Calibration calibration;
  std::vector<ModelFit> fits;
  double max_residual = 0.0;
  std::uint64_t simulations = 0;
};

/// Speedups and energy gains of the four standard runs (deterministic
/// expected-value mode), relative to CPU-only without early exit.
struct CaseStudy {
  ExitOutcome cpu_noee, cpu_ee, accel_noee, accel_ee;
  RatioSet speedup() const;
  RatioSet energy_gain() const;
};
CaseStudy run_case_study(const PlatformConfig& config, const ModelSpec& model, double exit_rate,
                         const Calibration& calibration);

/// Fits the dynamic cost table, cycles_per_element and per-model segment
/// intensities by one-dimensional bisections on simulated ratios.
/// CalibrationInfeasible when a target cannot be bracketed or a final
/// residual exceeds the tolerance.
CalibrationResult calibrate(const CalibrationTargets& targets);

nlohmann::json to_json(const CalibrationResult& result, const CalibrationTargets& targets);

}  // namespace xheep
