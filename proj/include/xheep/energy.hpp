// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "xheep/config.hpp"
#include "xheep/power_state.hpp"
#include "xheep/sim.hpp"

namespace xheep {

/// Host blocks of the static breakdown.
enum class Block : std::uint8_t { Memory, AoSubsystem, PeripheralSubsystem, Cpu, Bus, Debug };
inline constexpr std::size_t kBlocks = 6;
using ShareTable = std::array<double, kBlocks>;

std::string_view to_string(Block block);

/// Area split of the 2-bank, 65 nm host (0.15 mm^2).
struct AreaModel {
  double total_mm2 = 0.15;
  ShareTable shares = {0.44, 0.21, 0.11, 0.18, 0.04, 0.02};

  double raw_sum() const;
  ShareTable normalized() const;
};

/// Leakage split of the same host (29 uW). The published percentages add up
/// to 103, so accounting uses the normalized table; the raw one is kept for reports.
struct LeakageModel {
  double total_uw = 29.0;
  ShareTable shares = {0.84, 0.06, 0.04, 0.05, 0.02, 0.02};
  double retention_fraction = 0.25;

  static LeakageModel for_config(const PlatformConfig& config);

  double raw_sum() const;
  ShareTable normalized() const;
};

enum class ShareBasis : std::uint8_t { Raw, Normalized };

/// Share of the host total owned by one power domain, after bank splitting,
/// CPU core scaling and peripheral removal. Accelerator domains own nothing.
double domain_share(DomainId domain, const PlatformConfig& config, const ShareTable& shares);

double domain_leakage_uw(DomainId domain, PowerState state, const PlatformConfig& config, const LeakageModel& model,
                         ShareBasis basis = ShareBasis::Normalized);

/// Every power domain of a platform instance, in a fixed order.
std::vector<DomainId> platform_domains(const PlatformConfig& config);

/// The always-on block, bus and debug unit can never leave On.
constexpr bool always_on(DomainId d) {
  return d.kind == DomainKind::AoSubsystem || d.kind == DomainKind::Bus || d.kind == DomainKind::Debug;
}

/// False for always_on() domains and for banks flagged non-gateable.
bool domain_gateable(DomainId domain, const PlatformConfig& config);

struct StaticEntry {
  std::string name;
  double raw_share = 0.0;
  double share = 0.0;  ///< normalized share, after scaling/removal
  double value = 0.0;  ///< mm^2 or uW
  bool removed = false;
  std::vector<StaticEntry> parts;  ///< per-bank split of the memory entry
};

struct LeakageFloor {
  double raw_uw = 0.0;
  double normalized_uw = 0.0;
};

struct StaticReport {
  double area_total_mm2 = 0.0;
  double area_raw_share_sum = 0.0;
  double area_share_sum = 0.0;
  std::vector<StaticEntry> area;
  double leakage_total_uw = 0.0;
  /// Host total the shares refer to, before peripheral removal.
  double leakage_host_uw = 0.0;
  double leakage_raw_share_sum = 0.0;
  double leakage_share_sum = 0.0;
  std::vector<StaticEntry> leakage;
  LeakageFloor deep_sleep;
  std::vector<std::string> flags;
};

StaticReport static_report(const PlatformConfig& config, const AreaModel& area = {}, const LeakageModel& leak = {});
nlohmann::json to_json(const StaticReport& report);

/// Dynamic energy per event class, pJ. Fitted, not measured.
struct DynamicCostTable {
  double cpu_active_cycle = 10.0;
  double accel_active_cycle = 10.0;
  double bus_grant = 0.5;
  double mem_access = 1.0;
  double dma_element = 0.5;
  double peripheral_access = 1.0;

  bool operator==(const DynamicCostTable&) const = default;
};

nlohmann::json to_json(const DynamicCostTable& costs);
DynamicCostTable parse_costs(const nlohmann::json& j, const std::string& path);

struct DomainResidency {
  DomainId domain;
  StateCycles cycles{};
};

struct EnergyEntry {
  double leakage_j = 0.0;
  double dynamic_j = 0.0;
  double total_j() const { return leakage_j + dynamic_j; }
};

class EnergyLedger {
 public:
  void add_leakage(const std::string& component, double joules) { entries_[component].leakage_j += joules; }
  void add_dynamic(const std::string& component, double joules) { entries_[component].dynamic_j += joules; }

  const std::map<std::string, EnergyEntry>& entries() const { return entries_; }
  double leakage_j() const;
  double dynamic_j() const;
  double total_j() const;

  SimTime cycles = 0;
  double duration_s = 0.0;

  EnergyLedger& operator+=(const EnergyLedger& other);
  EnergyLedger scaled(double weight) const;
  nlohmann::json to_json() const;

 private:
  std::map<std::string, EnergyEntry> entries_;
};

/// dynamic = event counts x cost; leakage = sum over domains and states of
/// cycles x share x total x state fraction / clock.
EnergyLedger accrue(const ActivityCounters& activity, std::span<const DomainResidency> residency, SimTime duration,
                    const PlatformConfig& config, const DynamicCostTable& costs, const LeakageModel& leak);

}  // namespace xheep
