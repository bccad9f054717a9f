// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/address_map.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include <fmt/format.h>

#include "xheep/config.hpp"
#include "xheep/json_util.hpp"

namespace xheep {

std::string_view to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::MemoryBank: return "MemoryBank";
    case RegionKind::Peripheral: return "Peripheral";
    case RegionKind::AoPeripheral: return "AoPeripheral";
    case RegionKind::AcceleratorWindow: return "AcceleratorWindow";
  }
  return "?";
}

AddressMap::AddressMap(std::vector<Region> regions) : regions_(std::move(regions)) {
  std::sort(regions_.begin(), regions_.end(),
            [](const Region& a, const Region& b) { return a.base < b.base; });
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    if (regions_[i].size_bytes == 0)
      throw std::invalid_argument("region '" + regions_[i].name + "' is empty");
    if (regions_[i].end() > 0x1'0000'0000ull)
      throw std::invalid_argument("region '" + regions_[i].name + "' exceeds the 32-bit space");
    if (i > 0 && regions_[i - 1].end() > regions_[i].base)
      throw std::invalid_argument("regions '" + regions_[i - 1].name + "' and '" + regions_[i].name + "' overlap");
  }
}

std::optional<RegionRef> AddressMap::find(std::uint32_t addr) const {
  // First region whose base is above addr; the candidate is the one before it.
  auto it = std::upper_bound(regions_.begin(), regions_.end(), addr,
                             [](std::uint32_t a, const Region& r) { return a < r.base; });
  if (it == regions_.begin()) return std::nullopt;
  --it;
  if (!it->contains(addr)) return std::nullopt;
  return RegionRef{static_cast<std::size_t>(it - regions_.begin()), addr - it->base};
}

std::optional<std::size_t> AddressMap::index_of(RegionKind kind, std::uint32_t unit) const {
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    if (regions_[i].kind == kind && regions_[i].unit == unit) return i;
  }
  return std::nullopt;
}

AddressMap build_address_map(const PlatformConfig& config) {
  std::vector<Region> regions;
  const auto bank_size = static_cast<std::uint32_t>(config.bank_size_bytes);
  for (std::uint32_t i = 0; i < config.bank_count; ++i) {
    regions.push_back({fmt::format("bank{}", i), kMemoryBase + i * bank_size, bank_size, RegionKind::MemoryBank, i});
  }
  std::uint32_t slot = 0;
  for (Peripheral p : config.peripherals) {
    std::string name(to_string(p));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
    regions.push_back({name, kPeripheralBase + slot * kPeripheralStride, kPeripheralStride, RegionKind::Peripheral,
                       static_cast<std::uint32_t>(p)});
    ++slot;
  }
  regions.push_back({"ao", kAoBase, kAoSize, RegionKind::AoPeripheral, 0});
  for (std::uint32_t s = 0; s < config.accelerator_slots; ++s) {
    regions.push_back({fmt::format("accel{}", s), kAcceleratorBase + s * kAcceleratorWindow, kAcceleratorWindow,
                       RegionKind::AcceleratorWindow, s});
  }
  return AddressMap(std::move(regions));
}

nlohmann::json to_json(const AddressMap& map) {
  auto out = nlohmann::json::array();
  for (const Region& r : map.regions()) {
    out.push_back({{"name", r.name},
                   {"base", json_util::hex32(r.base)},
                   {"last", json_util::hex32(static_cast<std::uint32_t>(r.end() - 1))},
                   {"size_bytes", r.size_bytes},
                   {"kind", to_string(r.kind)}});
  }
  return out;
}

}  // namespace xheep
