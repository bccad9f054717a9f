// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/energy.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "xheep/json_util.hpp"

namespace xheep {

namespace {

constexpr std::array kBlockNames = {"memory", "ao_subsystem", "peripheral_subsystem", "cpu", "bus", "debug"};

double sum(const ShareTable& t) { return std::accumulate(t.begin(), t.end(), 0.0); }

// Tables that already add up to one are returned untouched.
ShareTable normalize(const ShareTable& t) {
  const double s = sum(t);
  if (std::abs(s - 1.0) <= 1e-12 || s <= 0.0) return t;
  ShareTable out{};
  for (std::size_t i = 0; i < kBlocks; ++i) out[i] = t[i] / s;
  return out;
}

double block_scale(Block block, const PlatformConfig& config) {
  switch (block) {
    case Block::Cpu: return config.cpu_scale();
    case Block::PeripheralSubsystem:
      return static_cast<double>(config.peripherals.size()) / static_cast<double>(kPeripheralKinds);
    default: return 1.0;
  }
}

std::vector<StaticEntry> breakdown(const PlatformConfig& config, double total, const ShareTable& raw,
                                   const ShareTable& norm) {
  std::vector<StaticEntry> out;
  for (std::size_t i = 0; i < kBlocks; ++i) {
    const auto block = static_cast<Block>(i);
    const double scale = block_scale(block, config);
    StaticEntry e{kBlockNames[i], raw[i], norm[i] * scale, total * norm[i] * scale, scale == 0.0, {}};
    if (block == Block::Memory) {
      const double n = static_cast<double>(config.bank_count);
      for (std::uint64_t b = 0; b < config.bank_count; ++b) {
        e.parts.push_back({fmt::format("bank{}", b), raw[i] / n, norm[i] / n, total * norm[i] / n, false, {}});
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

/// `raw_total` > 0 adds raw shares and their value against that total.
nlohmann::json entries_json(const std::vector<StaticEntry>& entries, const char* unit, double raw_total) {
  auto arr = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json j;
    j["name"] = e.name;
    if (raw_total > 0.0) {
      j["raw_share"] = e.raw_share;
      j[std::string("raw_") + unit] = e.removed ? 0.0 : e.raw_share * raw_total;
      j["normalized_share"] = e.share;
    } else {
      j["share"] = e.share;
    }
    j[unit] = e.value;
    if (e.removed) j["removed"] = true;
    if (!e.parts.empty()) j["banks"] = entries_json(e.parts, unit, raw_total);
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace

std::string_view to_string(Block block) { return kBlockNames[static_cast<std::size_t>(block)]; }

double AreaModel::raw_sum() const { return sum(shares); }
ShareTable AreaModel::normalized() const { return normalize(shares); }

LeakageModel LeakageModel::for_config(const PlatformConfig& config) {
  LeakageModel m;
  m.retention_fraction = config.retention_fraction;
  return m;
}

double LeakageModel::raw_sum() const { return sum(shares); }
ShareTable LeakageModel::normalized() const { return normalize(shares); }

double domain_share(DomainId domain, const PlatformConfig& config, const ShareTable& shares) {
  auto share = [&](Block b) { return shares[static_cast<std::size_t>(b)] * block_scale(b, config); };
  switch (domain.kind) {
    case DomainKind::Bank: return share(Block::Memory) / static_cast<double>(config.bank_count);
    case DomainKind::Cpu: return share(Block::Cpu);
    case DomainKind::PeripheralSubsystem: return share(Block::PeripheralSubsystem);
    case DomainKind::AoSubsystem: return share(Block::AoSubsystem);
    case DomainKind::Bus: return share(Block::Bus);
    case DomainKind::Debug: return share(Block::Debug);
    case DomainKind::Accelerator: return 0.0;
  }
  return 0.0;
}

double domain_leakage_uw(DomainId domain, PowerState state, const PlatformConfig& config, const LeakageModel& model,
                         ShareBasis basis) {
  const ShareTable table = basis == ShareBasis::Raw ? model.shares : model.normalized();
  return model.total_uw * domain_share(domain, config, table) * leakage_fraction(state, model.retention_fraction);
}

std::vector<DomainId> platform_domains(const PlatformConfig& config) {
  std::vector<DomainId> out{DomainId::cpu()};
  for (std::uint32_t b = 0; b < config.bank_count; ++b) out.push_back(DomainId::bank(b));
  out.push_back(DomainId::peripherals());
  out.push_back(DomainId::ao());
  out.push_back(DomainId::bus());
  out.push_back(DomainId::debug());
  for (std::uint32_t s = 0; s < config.accelerator_slots; ++s) out.push_back(DomainId::accelerator(s));
  return out;
}

bool domain_gateable(DomainId domain, const PlatformConfig& config) {
  if (always_on(domain)) return false;
  if (domain.kind == DomainKind::Bank) return config.bank_is_gateable(domain.index);
  return true;
}

StaticReport static_report(const PlatformConfig& config, const AreaModel& area, const LeakageModel& leak) {
  StaticReport r;
  const ShareTable area_norm = area.normalized();
  r.area = breakdown(config, area.total_mm2, area.shares, area_norm);
  r.area_raw_share_sum = area.raw_sum();
  r.area_share_sum = sum(area_norm);
  for (const auto& e : r.area) r.area_total_mm2 += e.value;

  const ShareTable leak_norm = leak.normalized();
  r.leakage = breakdown(config, leak.total_uw, leak.shares, leak_norm);
  r.leakage_raw_share_sum = leak.raw_sum();
  r.leakage_share_sum = sum(leak_norm);
  r.leakage_host_uw = leak.total_uw;
  for (const auto& e : r.leakage) r.leakage_total_uw += e.value;

  for (DomainId d : platform_domains(config)) {
    if (domain_gateable(d, config)) continue;
    r.deep_sleep.raw_uw += domain_leakage_uw(d, PowerState::On, config, leak, ShareBasis::Raw);
    r.deep_sleep.normalized_uw += domain_leakage_uw(d, PowerState::On, config, leak, ShareBasis::Normalized);
  }

  if (std::abs(r.leakage_raw_share_sum - 1.0) > 1e-12)
    r.flags.push_back(fmt::format("leakage shares sum to {:.2f} before normalization; accounting uses normalized shares",
                                  r.leakage_raw_share_sum));
  if (std::abs(r.area_raw_share_sum - 1.0) > 1e-12)
    r.flags.push_back(fmt::format("area shares sum to {:.2f} before normalization", r.area_raw_share_sum));
  if (config.peripherals.empty()) r.flags.push_back("peripheral subsystem removed");
  return r;
}

nlohmann::json to_json(const StaticReport& r) {
  nlohmann::json j;
  j["area"] = {{"total_mm2", r.area_total_mm2},
               {"raw_share_sum", r.area_raw_share_sum},
               {"share_sum", r.area_share_sum},
               {"components", entries_json(r.area, "mm2", 0.0)}};
  j["leakage"] = {{"total_uw", r.leakage_total_uw},
                  {"host_total_uw", r.leakage_host_uw},
                  {"raw_share_sum", r.leakage_raw_share_sum},
                  {"normalized_share_sum", r.leakage_share_sum},
                  {"components", entries_json(r.leakage, "uw", r.leakage_host_uw)}};
  j["deep_sleep"] = {{"raw_uw", r.deep_sleep.raw_uw}, {"normalized_uw", r.deep_sleep.normalized_uw}};
  j["flags"] = r.flags;
  return j;
}

nlohmann::json to_json(const DynamicCostTable& c) {
  return {{"unit", "pJ"},
          {"cpu_active_cycle", c.cpu_active_cycle},
          {"accel_active_cycle", c.accel_active_cycle},
          {"bus_grant", c.bus_grant},
          {"mem_access", c.mem_access},
          {"dma_element", c.dma_element},
          {"peripheral_access", c.peripheral_access}};
}

DynamicCostTable parse_costs(const nlohmann::json& j, const std::string& path) {
  json_util::ObjectReader r(j, path);
  DynamicCostTable c;
  if (auto unit = r.string("unit"); unit && *unit != "pJ") throw ConfigError(r.field("unit"), "only pJ is supported");
  auto read = [&](std::string_view key, double& out) {
    if (auto v = r.number(key)) {
      if (*v < 0.0) throw ConfigError(r.field(key), "energy cost must be non-negative");
      out = *v;
    }
  };
  read("cpu_active_cycle", c.cpu_active_cycle);
  read("accel_active_cycle", c.accel_active_cycle);
  read("bus_grant", c.bus_grant);
  read("mem_access", c.mem_access);
  read("dma_element", c.dma_element);
  read("peripheral_access", c.peripheral_access);
  r.finish();
  return c;
}

double EnergyLedger::leakage_j() const {
  double s = 0.0;
  for (const auto& [_, e] : entries_) s += e.leakage_j;
  return s;
}

double EnergyLedger::dynamic_j() const {
  double s = 0.0;
  for (const auto& [_, e] : entries_) s += e.dynamic_j;
  return s;
}

double EnergyLedger::total_j() const {
  double s = 0.0;
  for (const auto& [_, e] : entries_) s += e.total_j();
  return s;
}

EnergyLedger& EnergyLedger::operator+=(const EnergyLedger& other) {
  for (const auto& [name, e] : other.entries_) {
    entries_[name].leakage_j += e.leakage_j;
    entries_[name].dynamic_j += e.dynamic_j;
  }
  cycles += other.cycles;
  duration_s += other.duration_s;
  return *this;
}

EnergyLedger EnergyLedger::scaled(double weight) const {
  EnergyLedger out;
  for (const auto& [name, e] : entries_) out.entries_[name] = {e.leakage_j * weight, e.dynamic_j * weight};
  out.cycles = static_cast<SimTime>(std::llround(static_cast<double>(cycles) * weight));
  out.duration_s = duration_s * weight;
  return out;
}

nlohmann::json EnergyLedger::to_json() const {
  nlohmann::json comps = nlohmann::json::object();
  for (const auto& [name, e] : entries_) {
    comps[name] = {{"leakage_j", e.leakage_j}, {"dynamic_j", e.dynamic_j}, {"total_j", e.total_j()}};
  }
  return {{"cycles", cycles},
          {"duration_s", duration_s},
          {"leakage_j", leakage_j()},
          {"dynamic_j", dynamic_j()},
          {"total_j", total_j()},
          {"components", comps}};
}

EnergyLedger accrue(const ActivityCounters& a, std::span<const DomainResidency> residency, SimTime duration,
                    const PlatformConfig& config, const DynamicCostTable& costs, const LeakageModel& leak) {
  constexpr double kPico = 1e-12;
  constexpr double kMicro = 1e-6;
  EnergyLedger ledger;
  ledger.cycles = duration;
  ledger.duration_s = static_cast<double>(duration) / static_cast<double>(config.clock_hz);

  ledger.add_dynamic("cpu", a.cpu_weighted_cycles * costs.cpu_active_cycle * kPico);
  ledger.add_dynamic("accelerator", a.accel_weighted_cycles * costs.accel_active_cycle * kPico);
  ledger.add_dynamic("bus", static_cast<double>(a.bus_grants) * costs.bus_grant * kPico);
  ledger.add_dynamic("memory", static_cast<double>(a.mem_accesses) * costs.mem_access * kPico);
  ledger.add_dynamic("dma", static_cast<double>(a.dma_elements) * costs.dma_element * kPico);
  ledger.add_dynamic("peripherals", static_cast<double>(a.peripheral_accesses) * costs.peripheral_access * kPico);

  for (const DomainResidency& r : residency) {
    double joules = 0.0;
    for (std::size_t s = 0; s < kPowerStates; ++s) {
      const double uw = domain_leakage_uw(r.domain, static_cast<PowerState>(s), config, leak);
      joules += uw * kMicro * static_cast<double>(r.cycles[s]) / static_cast<double>(config.clock_hz);
    }
    if (r.domain.kind == DomainKind::Accelerator && joules == 0.0) continue;
    ledger.add_leakage(r.domain.to_string(), joules);
  }
  return ledger;
}

}  // namespace xheep
