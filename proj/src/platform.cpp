// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/platform.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "xheep/error.hpp"
#include "xheep/json_util.hpp"

namespace xheep {

namespace {

PlatformConfig checked(PlatformConfig config) {
  const ValidationReport report = validate(config);
  if (!report.ok()) throw ConfigError(report.errors.front().field, report.to_string());
  return config;
}

std::vector<MemoryBank> make_banks(const PlatformConfig& c) {
  std::vector<MemoryBank> banks;
  banks.reserve(c.bank_count);
  for (std::uint32_t b = 0; b < c.bank_count; ++b) {
    banks.emplace_back(b, static_cast<std::uint32_t>(c.bank_size_bytes), c.bank_is_gateable(b));
  }
  return banks;
}

}  // namespace

RegisterFile::RegisterFile(std::uint32_t size_bytes, const PowerManager& power, std::optional<DomainId> domain)
    : bytes_(size_bytes, 0), power_(power), domain_(domain) {}

AccessResult RegisterFile::access(std::uint32_t offset, AccessKind kind, std::uint8_t width, std::uint32_t data) {
  if (domain_ && power_.state(*domain_) != PowerState::On) return {BusStatus::SlaveError, 0};
  if (std::uint64_t(offset) + width > bytes_.size()) return {BusStatus::SlaveError, 0};
  if (kind == AccessKind::Write) {
    for (std::uint8_t i = 0; i < width; ++i) bytes_[offset + i] = static_cast<std::uint8_t>(data >> (8 * i));
    return {BusStatus::Ok, 0};
  }
  std::uint32_t v = 0;
  for (std::uint8_t i = 0; i < width; ++i) v |= std::uint32_t(bytes_[offset + i]) << (8 * i);
  return {BusStatus::Ok, v};
}

Platform::Platform(PlatformConfig config)
    : config_(checked(std::move(config))),
      map_(build_address_map(config_)),
      banks_(make_banks(config_)),
      power_(engine_, config_, banks_),
      bus_(engine_, map_, config_.bus_topology, config_.arbitration, config_.timing),
      xaif_(engine_, bus_, power_, banks_, config_),
      cpu_(engine_, bus_, power_, xaif_),
      dma_(engine_, bus_, power_, static_cast<std::uint32_t>(config_.dma_channel_count)) {
  for (std::size_t i = 0; i < map_.size(); ++i) {
    const Region& r = map_[i];
    switch (r.kind) {
      case RegionKind::MemoryBank: bus_.attach_slave(i, banks_[r.unit]); break;
      case RegionKind::Peripheral:
        registers_.push_back(std::make_unique<RegisterFile>(r.size_bytes, power_, DomainId::peripherals()));
        bus_.attach_slave(i, *registers_.back());
        break;
      case RegionKind::AoPeripheral:
        registers_.push_back(std::make_unique<RegisterFile>(r.size_bytes, power_, std::nullopt));
        bus_.attach_slave(i, *registers_.back());
        break;
      case RegionKind::AcceleratorWindow: break;  // wired by the socket on attach
    }
  }
  for (const AcceleratorConfig& a : config_.accelerators) {
    xaif_.attach(AcceleratorRegistry::instance().create(a), a.slot);
  }
}

MemoryBank& Platform::bank(std::uint32_t index) {
  if (index >= banks_.size()) throw SimulationAbort(fmt::format("no bank {}", index));
  return banks_[index];
}

std::pair<MemoryBank*, std::uint32_t> Platform::locate(std::uint32_t address) const {
  auto where = map_.find(address);
  if (!where || map_[where->index].kind != RegionKind::MemoryBank)
    throw ConfigError("address", fmt::format("{} is not in a memory bank", json_util::hex32(address)));
  auto* b = const_cast<MemoryBank*>(&banks_[map_[where->index].unit]);
  return {b, where->offset};
}

void Platform::load(std::uint32_t address, std::span<const std::uint8_t> data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto [b, off] = locate(static_cast<std::uint32_t>(address + i));
    b->bytes()[off] = data[i];
  }
}

std::vector<std::uint8_t> Platform::dump(std::uint32_t address, std::uint32_t length) const {
  std::vector<std::uint8_t> out(length);
  for (std::uint32_t i = 0; i < length; ++i) {
    auto [b, off] = locate(address + i);
    out[i] = b->bytes()[off];
  }
  return out;
}

void Platform::run() {
  engine_.run();
  if (!cpu_.idle()) {
    throw SimulationAbort(fmt::format("cpu stalled at cycle {}: {}", engine_.now(),
                                      cpu_.sleeping() ? "waiting for an interrupt that never arrives"
                                                      : "program did not finish"));
  }
}

Snapshot Platform::snapshot() const { return {engine_.now(), engine_.activity(), power_.residencies()}; }

EnergyLedger Platform::energy(const Snapshot& from, const Snapshot& to, const DynamicCostTable& costs,
                              const LeakageModel& leak) const {
  std::vector<DomainResidency> delta = to.residency;
  for (DomainResidency& d : delta) {
    auto it = std::find_if(from.residency.begin(), from.residency.end(),
                           [&](const DomainResidency& r) { return r.domain == d.domain; });
    if (it == from.residency.end()) continue;
    for (std::size_t s = 0; s < kPowerStates; ++s) d.cycles[s] -= it->cycles[s];
  }
  return accrue(to.activity - from.activity, delta, to.time - from.time, config_, costs, leak);
}

}  // namespace xheep
