// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "xheep/bus.hpp"
#include "xheep/power_state.hpp"

namespace xheep {

enum class BankMode : std::uint8_t { MemoryMode, ComputeMode };

/// One SRAM bank. Bus-visible only while On and in MemoryMode. Contents
/// survive clock gating and retention; entering Off clears them, so every
/// Off -> On sequence reads back zeros.
class MemoryBank : public BusSlave {
 public:
  MemoryBank(std::uint32_t index, std::uint32_t size_bytes, bool gateable = true);

  /// Little-endian. Throws SimulationAbort when offset + width > size.
  AccessResult access(std::uint32_t offset, AccessKind kind, std::uint8_t width, std::uint32_t data) override;

  std::uint32_t index() const { return index_; }
  std::uint32_t size_bytes() const { return static_cast<std::uint32_t>(contents_.size()); }
  bool gateable() const { return gateable_; }

  PowerState power_state() const { return residency_.state(); }
  BankMode mode() const { return mode_; }
  void set_mode(BankMode mode) { mode_ = mode; }
  bool bus_accessible() const { return power_state() == PowerState::On && mode_ == BankMode::MemoryMode; }

  /// Starts a transition at `now`; returns the completion cycle. The state is
  /// unchanged until complete_transition() runs at that cycle. A newer request
  /// replaces a pending one.
  SimTime begin_transition(PowerState target, SimTime now, const TimingConfig& timing);
  /// Applies the pending transition, if any.
  void complete_transition(SimTime now);
  std::optional<PowerState> pending_target() const { return pending_; }

  /// Backdoor access for loaders, dumps and near-memory kernels (ignores power state).
  std::span<std::uint8_t> bytes() { return contents_; }
  std::span<const std::uint8_t> bytes() const { return contents_; }
  std::uint32_t read_word(std::uint32_t offset) const;
  void write_word(std::uint32_t offset, std::uint32_t value);

  StateCycles residency(SimTime now) const { return residency_.residency(now); }

 private:
  void apply(PowerState target, SimTime now);

  std::uint32_t index_;
  bool gateable_;
  std::vector<std::uint8_t> contents_;
  BankMode mode_ = BankMode::MemoryMode;
  ResidencyTracker residency_;
  std::optional<PowerState> pending_;
  SimTime pending_done_ = 0;
};

}  // namespace xheep
