// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace xheep {

enum class CoreType : std::uint8_t { CV32E20, CV32E40X, CV32E40P, CV32E40PX };
enum class BusTopology : std::uint8_t { OneAtATime, FullCrossbar };
enum class ArbitrationPolicy : std::uint8_t { RoundRobin, FixedPriority };
/// XAIF master ports: dedicated bus masters, or routed through DMA channels.
enum class XaifMasterMode : std::uint8_t { Dedicated, SharedDma };

/// Enum order is also the peripheral address-map order.
enum class Peripheral : std::uint8_t { GPIO, I2C, I2S, SPI, Timer, PLIC };
inline constexpr std::size_t kPeripheralKinds = 6;

std::string_view to_string(CoreType);
std::string_view to_string(BusTopology);
std::string_view to_string(ArbitrationPolicy);
std::string_view to_string(XaifMasterMode);
std::string_view to_string(Peripheral);

/// Fixed latencies, in cycles. None of these come from silicon; all are knobs.
struct TimingConfig {
  std::uint32_t memory_latency = 1;
  std::uint32_t peripheral_latency = 2;
  std::uint32_t gate_latency = 1;
  std::uint32_t retentive_wake_latency = 2;
  std::uint32_t power_up_latency = 10;
  std::uint32_t irq_latency = 1;

  bool operator==(const TimingConfig&) const = default;
};

struct AcceleratorConfig {
  std::uint32_t slot = 0;
  std::string model = "near-mem-vector";
  std::uint32_t bank_index = 0;
  double cycles_per_element = 0.25;

  bool operator==(const AcceleratorConfig&) const = default;
};

struct PlatformConfig {
  CoreType core_type = CoreType::CV32E40P;
  std::uint64_t bank_count = 2;
  std::uint64_t bank_size_bytes = 32 * 1024;
  BusTopology bus_topology = BusTopology::FullCrossbar;
  ArbitrationPolicy arbitration = ArbitrationPolicy::RoundRobin;
  std::uint64_t dma_channel_count = 2;
  std::set<Peripheral> peripherals = {Peripheral::GPIO, Peripheral::I2C,   Peripheral::I2S,
                                      Peripheral::SPI,  Peripheral::Timer, Peripheral::PLIC};
  std::uint64_t accelerator_slots = 0;
  std::uint64_t clock_hz = 300'000'000;
  double voltage_v = 0.8;
  bool xif_available = false;
  double retention_fraction = 0.25;
  /// Empty means every bank is gateable.
  std::vector<bool> bank_gateable;
  /// CPU area/leakage share multiplier per core. Missing cores scale by 1.0.
  std::map<CoreType, double> cpu_share_scale;
  XaifMasterMode xaif_master_mode = XaifMasterMode::Dedicated;
  TimingConfig timing;
  std::vector<AcceleratorConfig> accelerators;

  bool operator==(const PlatformConfig&) const = default;

  bool bank_is_gateable(std::size_t bank) const {
    return bank_gateable.empty() || bank >= bank_gateable.size() || bank_gateable[bank];
  }
  double cpu_scale() const {
    auto it = cpu_share_scale.find(core_type);
    return it == cpu_share_scale.end() ? 1.0 : it->second;
  }
};

/// The X/PX cores expose the coprocessor interface.
constexpr bool core_has_xif(CoreType core) {
  return core == CoreType::CV32E40X || core == CoreType::CV32E40PX;
}

/// The 2 x 32 KiB crossbar instance, all peripherals, no accelerator slots.
PlatformConfig default_config();

struct FieldError {
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<FieldError> errors;

  bool ok() const { return errors.empty(); }
  bool has_error(std::string_view field) const;
  std::string to_string() const;
};

ValidationReport validate(const PlatformConfig& config);

/// Strict parse: unknown keys and wrong types raise ConfigError naming the key.
/// Range checks are left to validate().
PlatformConfig parse_config(const nlohmann::json& doc);
PlatformConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const PlatformConfig& config);

}  // namespace xheep
