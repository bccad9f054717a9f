// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "xheep/calibration.hpp"
#include "xheep/config.hpp"
#include "xheep/dma.hpp"
#include "xheep/power_state.hpp"
#include "xheep/workload.hpp"

namespace xheep {

namespace directive {

struct Load {
  std::uint32_t address = 0;
  std::vector<std::uint8_t> bytes;
};
struct Dump {
  std::string name;
  std::uint32_t address = 0;
  std::uint32_t length = 0;
  /// Raw binary copy of the dumped bytes, if set.
  std::optional<std::filesystem::path> file;
};
struct Access {
  AccessKind kind = AccessKind::Read;
  std::uint32_t address = 0;
  std::uint8_t width = 4;
  std::uint32_t value = 0;
};
struct Power {
  DomainId domain;
  PowerState state = PowerState::On;
};
struct Dma {
  DmaDescriptor descriptor;
};
struct Offload {
  std::uint32_t slot = 0;
  OffloadCommand command;
};
/// `line` is a line name ("dma0", "accel0", "timer", "external").
struct WaitForInterrupt {
  std::optional<std::string> line;
};
struct Compute {
  SimTime cycles = 0;
  double intensity = 1.0;
};
struct Idle {
  SimTime cycles = 0;
};
struct RaiseIrq {
  std::string line;
};
struct RunBenchmark {
  std::string name;
  ModelSpec model;
  std::string model_file;
  ExitPolicy policy;
  Mapping mapping = Mapping::Cpu;
  std::uint64_t samples = 1;
  bool expected_value = false;
  std::optional<std::uint64_t> seed;
};

}  // namespace directive

using Directive = std::variant<directive::Load, directive::Dump, directive::Access, directive::Power, directive::Dma,
                               directive::Offload, directive::WaitForInterrupt, directive::Compute, directive::Idle,
                               directive::RaiseIrq, directive::RunBenchmark>;

struct Scenario {
  std::string name;
  std::filesystem::path file;
  PlatformConfig config;
  std::string config_file;
  std::uint64_t seed = 0;
  std::optional<Calibration> calibration;
  std::string calibration_file;
  std::vector<Directive> directives;
  /// Output defaults, already resolved against the scenario directory.
  std::optional<std::filesystem::path> report_path;
  std::optional<std::filesystem::path> trace_path;
};

/// Parses and checks entity references against the config. Paths inside the
/// file are relative to it. ConfigError on any problem.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& file);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  /// `name` (a run of this report) or `report.json#name`.
  std::optional<std::string> baseline;
  std::ostream* trace = nullptr;
};

/// Executes the scenario. The report keeps wall-clock data under "metadata"
/// only, so reports of identical invocations compare equal without it.
nlohmann::json run_scenario(const Scenario& scenario, const RunOptions& options = {});

struct RatioRow {
  std::string run;
  double speedup = 0.0;
  double energy_gain = 0.0;
};

/// Rows for every run in `report`, relative to `baseline` as described in RunOptions.
std::vector<RatioRow> ratio_table(const nlohmann::json& report, const std::string& baseline,
                                  const std::filesystem::path& base_dir);

}  // namespace xheep
