// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "xheep/config.hpp"
#include "xheep/sim.hpp"

namespace xheep {

enum class PowerState : std::uint8_t { On, ClockGated, Retentive, Off };
inline constexpr std::size_t kPowerStates = 4;

std::string_view to_string(PowerState state);
std::optional<PowerState> parse_power_state(std::string_view text);

/// Fraction of full leakage drawn in `state`. Clock gating stops switching, not leakage.
constexpr double leakage_fraction(PowerState state, double retention_fraction) {
  switch (state) {
    case PowerState::On:
    case PowerState::ClockGated: return 1.0;
    case PowerState::Retentive: return retention_fraction;
    case PowerState::Off: return 0.0;
  }
  return 1.0;
}

/// Cycles until a transition from `from` to `to` completes. Same state: 0.
SimTime transition_latency(PowerState from, PowerState to, const TimingConfig& timing);

enum class DomainKind : std::uint8_t { Cpu, Bank, PeripheralSubsystem, AoSubsystem, Bus, Debug, Accelerator };

struct DomainId {
  DomainKind kind = DomainKind::Cpu;
  std::uint32_t index = 0;

  static constexpr DomainId cpu() { return {DomainKind::Cpu, 0}; }
  static constexpr DomainId bank(std::uint32_t i) { return {DomainKind::Bank, i}; }
  static constexpr DomainId peripherals() { return {DomainKind::PeripheralSubsystem, 0}; }
  static constexpr DomainId ao() { return {DomainKind::AoSubsystem, 0}; }
  static constexpr DomainId bus() { return {DomainKind::Bus, 0}; }
  static constexpr DomainId debug() { return {DomainKind::Debug, 0}; }
  static constexpr DomainId accelerator(std::uint32_t slot) { return {DomainKind::Accelerator, slot}; }

  auto operator<=>(const DomainId&) const = default;
  std::string to_string() const;
};

/// "cpu", "bank1", "peripherals", "ao", "bus", "debug", "accel0".
std::optional<DomainId> parse_domain(std::string_view text);

/// Cycles spent in each power state, indexed by PowerState.
using StateCycles = std::array<SimTime, kPowerStates>;

class ResidencyTracker {
 public:
  explicit ResidencyTracker(PowerState initial = PowerState::On, SimTime start = 0)
      : state_(initial), since_(start) {}

  PowerState state() const { return state_; }
  void change(PowerState to, SimTime at);
  StateCycles residency(SimTime now) const;

 private:
  PowerState state_;
  SimTime since_;
  StateCycles accumulated_{};
};

}  // namespace xheep
