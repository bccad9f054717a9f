// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xheep/calibration.hpp"
#include "xheep/config.hpp"
#include "xheep/workload.hpp"

namespace xheep {

enum class SweepParameter : std::uint8_t { Tau, ExitRate };

struct SweepRun {
  std::string name;
  Mapping mapping = Mapping::Cpu;
  ExitPolicy policy = policy::FixedRate{0.0};
};

/// One policy parameter varied over `values`; every point uses the same seed.
struct SweepSpec {
  std::string name;
  PlatformConfig config;
  std::string config_file;
  Calibration calibration;
  std::string calibration_file;
  ModelSpec model;
  std::string model_file;
  Mapping mapping = Mapping::Cpu;
  ExitPolicy policy = policy::FixedRate{0.0};
  SweepParameter parameter = SweepParameter::Tau;
  std::vector<double> values;
  std::uint64_t samples = 1000;
  std::uint64_t seed = 0;
  bool expected_value = false;
  SweepRun baseline;
};

SweepSpec load_sweep(const std::filesystem::path& path);
SweepSpec parse_sweep(const nlohmann::json& doc, const std::filesystem::path& file);

struct SweepPoint {
  double value = 0.0;
  double exit_rate = 0.0;
  double mean_cycles = 0.0;
  double mean_energy_j = 0.0;
  double speedup = 0.0;
  double energy_gain = 0.0;
};

struct SweepResult {
  ExitOutcome baseline;
  std::vector<SweepPoint> points;
};

/// `jobs` > 1 runs points on that many threads, each on its own platform.
/// Points come back in `values` order regardless.
SweepResult run_sweep(const SweepSpec& spec, unsigned jobs = 1);

nlohmann::json to_json(const SweepResult& result, const SweepSpec& spec);
std::string to_csv(const SweepResult& result);

}  // namespace xheep
