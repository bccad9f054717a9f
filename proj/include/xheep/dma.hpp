// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xheep/address_map.hpp"
#include "xheep/bus.hpp"
#include "xheep/sim.hpp"

namespace xheep {

class PowerManager;

/// 1D/2D strided transfer. Strides are signed byte offsets; outer_count 1 is a 1D copy.
struct DmaDescriptor {
  std::uint32_t channel = 0;
  std::uint32_t src_base = 0;
  std::uint32_t dst_base = 0;
  std::uint8_t element_size_bytes = 4;
  std::uint32_t inner_count = 1;
  std::uint32_t outer_count = 1;
  std::int64_t src_inner_stride = 4;
  std::int64_t src_outer_stride = 0;
  std::int64_t dst_inner_stride = 4;
  std::int64_t dst_outer_stride = 0;

  std::uint64_t total_elements() const { return std::uint64_t(inner_count) * outer_count; }
  bool operator==(const DmaDescriptor&) const = default;
};

struct AddressPair {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  bool operator==(const AddressPair&) const = default;
};

/// Row-major enumeration: for j < outer, i < inner:
///   src = src_base + j*src_outer_stride + i*src_inner_stride (same for dst).
/// ConfigError when an address leaves the 32-bit space or the descriptor is
/// malformed (zero counts, bad element size).
std::vector<AddressPair> address_sequence(const DmaDescriptor& desc);

/// address_sequence() plus: every element access must decode and stay inside
/// one region of `map`.
void check_descriptor(const DmaDescriptor& desc, const AddressMap& map);

DmaDescriptor parse_descriptor(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const DmaDescriptor& desc);

enum class ChannelStatus : std::uint8_t { Idle, Busy, Done, Error };
std::string_view to_string(ChannelStatus status);

/// Multi-channel engine. Each channel is its own bus master and moves one
/// element at a time: read, then the paired write, each arbitrated.
class DmaEngine : public Component, public BusMaster {
 public:
  DmaEngine(Engine& engine, Bus& bus, PowerManager& power, std::uint32_t channels);

  std::string_view name() const override { return "dma"; }
  void handle(const Event& event) override;
  std::string describe(const Event& event) const override;
  void on_response(const BusResponse& response) override;

  /// ChannelBusy if the channel is active; ConfigError for bad descriptors.
  void configure_and_start(const DmaDescriptor& desc);

  std::uint32_t channel_count() const { return static_cast<std::uint32_t>(channels_.size()); }
  ChannelStatus status(std::uint32_t channel) const;
  bool busy(std::uint32_t channel) const { return status(channel) == ChannelStatus::Busy; }
  std::uint64_t elements_done(std::uint32_t channel) const;
  std::optional<BusResponse> last_error(std::uint32_t channel) const;

  /// (src, dst) pairs in the order the channel completed them.
  const std::vector<AddressPair>& observed(std::uint32_t channel) const;
  void clear_observed(std::uint32_t channel);
  void set_recording(bool on) { recording_ = on; }

  SimTime started_at(std::uint32_t channel) const;
  SimTime finished_at(std::uint32_t channel) const;

 private:
  enum class Phase : std::uint8_t { Read, Write };

  struct Channel {
    ChannelStatus status = ChannelStatus::Idle;
    DmaDescriptor desc;
    std::uint64_t next = 0;  // element index
    std::uint32_t inner = 0;
    std::uint32_t outer = 0;
    Phase phase = Phase::Read;
    std::uint32_t buffer = 0;
    std::uint64_t done = 0;
    std::optional<BusResponse> error;
    std::vector<AddressPair> observed;
    SimTime started = 0;
    SimTime finished = 0;
  };

  AddressPair current(const Channel& ch) const;
  void issue(std::uint32_t channel);
  void finish(std::uint32_t channel, ChannelStatus status);

  Engine& engine_;
  Bus& bus_;
  PowerManager& power_;
  ComponentId id_;
  std::vector<Channel> channels_;
  bool recording_ = true;
};

}  // namespace xheep
