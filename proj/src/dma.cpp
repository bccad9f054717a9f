// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/dma.hpp"

#include <fmt/format.h>

#include "xheep/error.hpp"
#include "xheep/json_util.hpp"
#include "xheep/power.hpp"

namespace xheep {

namespace {

constexpr std::int64_t kAddressSpace = std::int64_t(1) << 32;

std::uint32_t element_address(std::uint32_t base, std::int64_t outer_stride, std::int64_t inner_stride,
                              std::uint32_t j, std::uint32_t i, const char* which) {
  const std::int64_t a = std::int64_t(base) + std::int64_t(j) * outer_stride + std::int64_t(i) * inner_stride;
  if (a < 0 || a >= kAddressSpace)
    throw ConfigError(which, fmt::format("element ({}, {}) falls outside the 32-bit address space", j, i));
  return static_cast<std::uint32_t>(a);
}

void check_shape(const DmaDescriptor& d) {
  if (d.element_size_bytes != 1 && d.element_size_bytes != 2 && d.element_size_bytes != 4)
    throw ConfigError("element_size_bytes", "must be 1, 2 or 4");
  if (d.inner_count == 0) throw ConfigError("inner_count", "must be positive");
  if (d.outer_count == 0) throw ConfigError("outer_count", "must be positive");
}

}  // namespace

std::vector<AddressPair> address_sequence(const DmaDescriptor& d) {
  check_shape(d);
  std::vector<AddressPair> out;
  out.reserve(d.total_elements());
  for (std::uint32_t j = 0; j < d.outer_count; ++j) {
    for (std::uint32_t i = 0; i < d.inner_count; ++i) {
      out.push_back({element_address(d.src_base, d.src_outer_stride, d.src_inner_stride, j, i, "src_base"),
                     element_address(d.dst_base, d.dst_outer_stride, d.dst_inner_stride, j, i, "dst_base")});
    }
  }
  return out;
}

void check_descriptor(const DmaDescriptor& d, const AddressMap& map) {
  auto check = [&](std::uint32_t addr, const char* which) {
    auto where = map.find(addr);
    if (!where || std::uint64_t(where->offset) + d.element_size_bytes > map[where->index].size_bytes)
      throw ConfigError(which, fmt::format("address {} does not decode to a region", json_util::hex32(addr)));
  };
  for (const AddressPair& p : address_sequence(d)) {
    check(p.src, "src_base");
    check(p.dst, "dst_base");
  }
}

DmaDescriptor parse_descriptor(const nlohmann::json& j, const std::string& path) {
  json_util::ObjectReader r(j, path);
  DmaDescriptor d;
  d.channel = static_cast<std::uint32_t>(r.require_u64("channel"));
  d.src_base = r.require_address("src_base");
  d.dst_base = r.require_address("dst_base");
  if (auto v = r.u64("element_size_bytes")) {
    if (*v > 4) throw ConfigError(r.field("element_size_bytes"), "must be 1, 2 or 4");
    d.element_size_bytes = static_cast<std::uint8_t>(*v);
  }
  auto count = [&](std::string_view key, std::uint32_t& out) {
    if (auto v = r.u64(key)) {
      if (*v == 0 || *v > 0xFFFF'FFFFu) throw ConfigError(r.field(key), "must be a positive 32-bit count");
      out = static_cast<std::uint32_t>(*v);
    }
  };
  count("inner_count", d.inner_count);
  count("outer_count", d.outer_count);
  // Unset strides default to dense packing.
  d.src_inner_stride = d.dst_inner_stride = d.element_size_bytes;
  d.src_outer_stride = d.dst_outer_stride = std::int64_t(d.element_size_bytes) * d.inner_count;
  if (auto v = r.i64("src_inner_stride")) d.src_inner_stride = *v;
  if (auto v = r.i64("src_outer_stride")) d.src_outer_stride = *v;
  if (auto v = r.i64("dst_inner_stride")) d.dst_inner_stride = *v;
  if (auto v = r.i64("dst_outer_stride")) d.dst_outer_stride = *v;
  r.finish();
  try {
    check_shape(d);
  } catch (const ConfigError& e) {
    throw ConfigError(path + "." + e.field(), e.what());
  }
  return d;
}

nlohmann::json to_json(const DmaDescriptor& d) {
  return {{"channel", d.channel},
          {"src_base", json_util::hex32(d.src_base)},
          {"dst_base", json_util::hex32(d.dst_base)},
          {"element_size_bytes", d.element_size_bytes},
          {"inner_count", d.inner_count},
          {"outer_count", d.outer_count},
          {"src_inner_stride", d.src_inner_stride},
          {"src_outer_stride", d.src_outer_stride},
          {"dst_inner_stride", d.dst_inner_stride},
          {"dst_outer_stride", d.dst_outer_stride}};
}

std::string_view to_string(ChannelStatus status) {
  switch (status) {
    case ChannelStatus::Idle: return "idle";
    case ChannelStatus::Busy: return "busy";
    case ChannelStatus::Done: return "done";
    case ChannelStatus::Error: return "error";
  }
  return "?";
}

DmaEngine::DmaEngine(Engine& engine, Bus& bus, PowerManager& power, std::uint32_t channels)
    : engine_(engine), bus_(bus), power_(power), channels_(channels) {
  id_ = engine_.add_component(*this);
}

ChannelStatus DmaEngine::status(std::uint32_t channel) const {
  if (channel >= channels_.size()) throw SimulationAbort(fmt::format("no DMA channel {}", channel));
  return channels_[channel].status;
}

std::uint64_t DmaEngine::elements_done(std::uint32_t channel) const {
  status(channel);
  return channels_[channel].done;
}

std::optional<BusResponse> DmaEngine::last_error(std::uint32_t channel) const {
  status(channel);
  return channels_[channel].error;
}

const std::vector<AddressPair>& DmaEngine::observed(std::uint32_t channel) const {
  status(channel);
  return channels_[channel].observed;
}

void DmaEngine::clear_observed(std::uint32_t channel) {
  status(channel);
  channels_[channel].observed.clear();
}

SimTime DmaEngine::started_at(std::uint32_t channel) const {
  status(channel);
  return channels_[channel].started;
}

SimTime DmaEngine::finished_at(std::uint32_t channel) const {
  status(channel);
  return channels_[channel].finished;
}

void DmaEngine::configure_and_start(const DmaDescriptor& desc) {
  if (desc.channel >= channels_.size())
    throw ConfigError("channel", fmt::format("no DMA channel {} (have {})", desc.channel, channels_.size()));
  Channel& ch = channels_[desc.channel];
  if (ch.status == ChannelStatus::Busy) throw ChannelBusy(fmt::format("DMA channel {} is busy", desc.channel));
  check_descriptor(desc, bus_.map());

  ch.status = ChannelStatus::Busy;
  ch.desc = desc;
  ch.next = 0;
  ch.inner = 0;
  ch.outer = 0;
  ch.phase = Phase::Read;
  ch.done = 0;
  ch.error.reset();
  ch.observed.clear();
  ch.started = engine_.now();
  ch.finished = 0;
  issue(desc.channel);
}

AddressPair DmaEngine::current(const Channel& ch) const {
  const DmaDescriptor& d = ch.desc;
  const auto at = [&](std::uint32_t base, std::int64_t outer, std::int64_t inner) {
    return static_cast<std::uint32_t>(std::int64_t(base) + std::int64_t(ch.outer) * outer +
                                      std::int64_t(ch.inner) * inner);
  };
  return {at(d.src_base, d.src_outer_stride, d.src_inner_stride), at(d.dst_base, d.dst_outer_stride, d.dst_inner_stride)};
}

void DmaEngine::issue(std::uint32_t channel) {
  Channel& ch = channels_[channel];
  const AddressPair a = current(ch);
  const auto master = MasterId::dma(static_cast<std::uint16_t>(channel));
  if (ch.phase == Phase::Read) {
    bus_.request(*this, master, a.src, AccessKind::Read, ch.desc.element_size_bytes);
  } else {
    bus_.request(*this, master, a.dst, AccessKind::Write, ch.desc.element_size_bytes, ch.buffer);
  }
}

void DmaEngine::on_response(const BusResponse& response) {
  const std::uint32_t channel = response.txn.master.index;
  Channel& ch = channels_.at(channel);
  if (ch.status != ChannelStatus::Busy) throw SimulationAbort(fmt::format("response for idle DMA channel {}", channel));

  if (response.status != BusStatus::Ok) {
    ch.error = response;
    finish(channel, ChannelStatus::Error);
    return;
  }
  if (ch.phase == Phase::Read) {
    ch.buffer = response.data;
    ch.phase = Phase::Write;
    issue(channel);
    return;
  }

  const AddressPair a = current(ch);
  if (recording_) ch.observed.push_back(a);
  ++ch.done;
  ++engine_.activity().dma_elements;
  if (engine_.trace()) {
    engine_.note(name(), fmt::format("DmaElementDone(ch={};n={};src={};dst={})", channel, ch.done,
                                     json_util::hex32(a.src), json_util::hex32(a.dst)));
  }

  if (ch.done == ch.desc.total_elements()) {
    finish(channel, ChannelStatus::Done);
    return;
  }
  if (++ch.inner == ch.desc.inner_count) {
    ch.inner = 0;
    ++ch.outer;
  }
  ch.phase = Phase::Read;
  issue(channel);
}

void DmaEngine::finish(std::uint32_t channel, ChannelStatus status) {
  Channel& ch = channels_[channel];
  ch.status = status;
  ch.finished = engine_.now();
  engine_.schedule(Event{engine_.now(), id_, EventKind::DmaChannelDone, channel});
}

void DmaEngine::handle(const Event& event) {
  if (event.kind != EventKind::DmaChannelDone)
    throw SimulationAbort(fmt::format("dma got unexpected event {}", payload_string(event)));
  power_.raise(power_.line(IrqSource::DmaChannel, static_cast<std::uint32_t>(event.tag)));
}

std::string DmaEngine::describe(const Event& event) const {
  if (event.kind == EventKind::DmaChannelDone && event.tag < channels_.size()) {
    const Channel& ch = channels_[event.tag];
    return fmt::format("DmaChannelDone(ch={};status={};elements={})", event.tag, to_string(ch.status), ch.done);
  }
  return payload_string(event);
}

}  // namespace xheep
