// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/memory.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "xheep/error.hpp"

namespace xheep {

MemoryBank::MemoryBank(std::uint32_t index, std::uint32_t size_bytes, bool gateable)
    : index_(index), gateable_(gateable), contents_(size_bytes, 0) {}

AccessResult MemoryBank::access(std::uint32_t offset, AccessKind kind, std::uint8_t width, std::uint32_t data) {
  if (std::uint64_t(offset) + width > contents_.size())
    throw SimulationAbort(fmt::format("bank{}: access at offset {} width {} past end {}", index_, offset, width,
                                      contents_.size()));
  if (!bus_accessible()) return {BusStatus::SlaveError, 0};
  if (kind == AccessKind::Write) {
    for (std::uint8_t b = 0; b < width; ++b) contents_[offset + b] = static_cast<std::uint8_t>(data >> (8 * b));
    return {BusStatus::Ok, 0};
  }
  std::uint32_t value = 0;
  for (std::uint8_t b = 0; b < width; ++b) value |= std::uint32_t(contents_[offset + b]) << (8 * b);
  return {BusStatus::Ok, value};
}

SimTime MemoryBank::begin_transition(PowerState target, SimTime now, const TimingConfig& timing) {
  pending_ = target;
  pending_done_ = now + transition_latency(power_state(), target, timing);
  return pending_done_;
}

void MemoryBank::complete_transition(SimTime now) {
  if (!pending_ || now < pending_done_) return;
  const PowerState target = *pending_;
  pending_.reset();
  apply(target, now);
}

void MemoryBank::apply(PowerState target, SimTime now) {
  if (target == power_state()) return;
  residency_.change(target, now);
  if (target == PowerState::Off) std::fill(contents_.begin(), contents_.end(), std::uint8_t{0});
}

std::uint32_t MemoryBank::read_word(std::uint32_t offset) const {
  if (std::uint64_t(offset) + 4 > contents_.size()) throw SimulationAbort("read_word past end of bank");
  std::uint32_t value = 0;
  for (int b = 0; b < 4; ++b) value |= std::uint32_t(contents_[offset + b]) << (8 * b);
  return value;
}

void MemoryBank::write_word(std::uint32_t offset, std::uint32_t value) {
  if (std::uint64_t(offset) + 4 > contents_.size()) throw SimulationAbort("write_word past end of bank");
  for (int b = 0; b < 4; ++b) contents_[offset + b] = static_cast<std::uint8_t>(value >> (8 * b));
}

}  // namespace xheep
