// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace xheep {

struct PlatformConfig;

inline constexpr std::uint32_t kMemoryBase = 0x0000'0000;
inline constexpr std::uint32_t kPeripheralBase = 0x2000'0000;
inline constexpr std::uint32_t kPeripheralStride = 0x1000;
inline constexpr std::uint32_t kAoBase = 0x2010'0000;
inline constexpr std::uint32_t kAoSize = 0x1'0000;
inline constexpr std::uint32_t kAcceleratorBase = 0x3000'0000;
inline constexpr std::uint32_t kAcceleratorWindow = 0x1'0000;
inline constexpr std::uint64_t kMaxAcceleratorSlots = (0x1'0000'0000ull - kAcceleratorBase) / kAcceleratorWindow;

enum class RegionKind : std::uint8_t { MemoryBank, Peripheral, AoPeripheral, AcceleratorWindow };

std::string_view to_string(RegionKind kind);

struct Region {
  std::string name;
  std::uint32_t base = 0;
  std::uint32_t size_bytes = 0;
  RegionKind kind = RegionKind::MemoryBank;
  /// Bank index, Peripheral enum value, or accelerator slot.
  std::uint32_t unit = 0;

  std::uint64_t end() const { return std::uint64_t(base) + size_bytes; }
  bool contains(std::uint32_t addr) const { return addr >= base && addr < end(); }
};

struct RegionRef {
  std::size_t index = 0;
  std::uint32_t offset = 0;

  bool operator==(const RegionRef&) const = default;
};

/// Sorted, non-overlapping list of regions.
class AddressMap {
 public:
  AddressMap() = default;
  /// Sorts by base and throws std::invalid_argument on overlap or empty regions.
  explicit AddressMap(std::vector<Region> regions);

  std::span<const Region> regions() const { return regions_; }
  std::size_t size() const { return regions_.size(); }
  const Region& operator[](std::size_t i) const { return regions_[i]; }

  std::optional<RegionRef> find(std::uint32_t addr) const;
  std::optional<std::size_t> index_of(RegionKind kind, std::uint32_t unit) const;

 private:
  std::vector<Region> regions_;
};

/// Banks from 0x0 in index order, peripherals at 0x2000_0000 (4 KiB each, enum
/// order), the always-on block at 0x2010_0000, accelerator windows at
/// 0x3000_0000 (64 KiB per slot). Requires a config that passed validate().
AddressMap build_address_map(const PlatformConfig& config);

nlohmann::json to_json(const AddressMap& map);

}  // namespace xheep
