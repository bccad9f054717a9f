// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "xheep/address_map.hpp"
#include "xheep/bus.hpp"
#include "xheep/config.hpp"
#include "xheep/cpu.hpp"
#include "xheep/dma.hpp"
#include "xheep/energy.hpp"
#include "xheep/memory.hpp"
#include "xheep/power.hpp"
#include "xheep/sim.hpp"
#include "xheep/xaif.hpp"

namespace xheep {

/// Placeholder register block: plain storage, reachable only while `domain`
/// is On (or always, for the always-on block).
class RegisterFile : public BusSlave {
 public:
  RegisterFile(std::uint32_t size_bytes, const PowerManager& power, std::optional<DomainId> domain);
  AccessResult access(std::uint32_t offset, AccessKind kind, std::uint8_t width, std::uint32_t data) override;

 private:
  std::vector<std::uint8_t> bytes_;
  const PowerManager& power_;
  std::optional<DomainId> domain_;
};

struct Snapshot {
  SimTime time = 0;
  ActivityCounters activity;
  std::vector<DomainResidency> residency;
};

/// One fully wired platform instance.
class Platform {
 public:
  /// ConfigError when `config` fails validate().
  explicit Platform(PlatformConfig config);
  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  const PlatformConfig& config() const { return config_; }
  Engine& engine() { return engine_; }
  const Engine& engine() const { return engine_; }
  const AddressMap& map() const { return map_; }
  Bus& bus() { return bus_; }
  PowerManager& power() { return power_; }
  const PowerManager& power() const { return power_; }
  CpuCore& cpu() { return cpu_; }
  DmaEngine& dma() { return dma_; }
  Xaif& xaif() { return xaif_; }
  std::vector<MemoryBank>& banks() { return banks_; }
  MemoryBank& bank(std::uint32_t index);

  /// Backdoor access to the memory banks by absolute address.
  void load(std::uint32_t address, std::span<const std::uint8_t> bytes);
  std::vector<std::uint8_t> dump(std::uint32_t address, std::uint32_t length) const;

  /// Runs until the event queue drains. SimulationAbort if the core is left
  /// waiting for an interrupt that can no longer arrive.
  void run();

  Snapshot snapshot() const;
  EnergyLedger energy(const Snapshot& from, const Snapshot& to, const DynamicCostTable& costs,
                      const LeakageModel& leak) const;

 private:
  std::pair<MemoryBank*, std::uint32_t> locate(std::uint32_t address) const;

  PlatformConfig config_;
  Engine engine_;
  AddressMap map_;
  std::vector<MemoryBank> banks_;
  PowerManager power_;
  Bus bus_;
  Xaif xaif_;
  CpuCore cpu_;
  DmaEngine dma_;
  std::vector<std::unique_ptr<RegisterFile>> registers_;
};

}  // namespace xheep
