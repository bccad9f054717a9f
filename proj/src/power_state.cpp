// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/power_state.hpp"

#include <charconv>

#include <fmt/format.h>

#include "xheep/error.hpp"

namespace xheep {

std::string_view to_string(PowerState state) {
  switch (state) {
    case PowerState::On: return "On";
    case PowerState::ClockGated: return "ClockGated";
    case PowerState::Retentive: return "Retentive";
    case PowerState::Off: return "Off";
  }
  return "?";
}

std::optional<PowerState> parse_power_state(std::string_view text) {
  if (text == "On" || text == "on") return PowerState::On;
  if (text == "ClockGated" || text == "clock-gated") return PowerState::ClockGated;
  if (text == "Retentive" || text == "retentive") return PowerState::Retentive;
  if (text == "Off" || text == "off") return PowerState::Off;
  return std::nullopt;
}

SimTime transition_latency(PowerState from, PowerState to, const TimingConfig& timing) {
  if (from == to) return 0;
  if (from == PowerState::Off) return timing.power_up_latency;
  if (to == PowerState::On && from == PowerState::Retentive) return timing.retentive_wake_latency;
  return timing.gate_latency;
}

std::string DomainId::to_string() const {
  switch (kind) {
    case DomainKind::Cpu: return "cpu";
    case DomainKind::Bank: return fmt::format("bank{}", index);
    case DomainKind::PeripheralSubsystem: return "peripherals";
    case DomainKind::AoSubsystem: return "ao";
    case DomainKind::Bus: return "bus";
    case DomainKind::Debug: return "debug";
    case DomainKind::Accelerator: return fmt::format("accel{}", index);
  }
  return "?";
}

std::optional<DomainId> parse_domain(std::string_view text) {
  if (text == "cpu") return DomainId::cpu();
  if (text == "peripherals") return DomainId::peripherals();
  if (text == "ao") return DomainId::ao();
  if (text == "bus") return DomainId::bus();
  if (text == "debug") return DomainId::debug();
  auto indexed = [&](std::string_view prefix, DomainKind kind) -> std::optional<DomainId> {
    if (!text.starts_with(prefix) || text.size() == prefix.size()) return std::nullopt;
    std::uint32_t index = 0;
    auto digits = text.substr(prefix.size());
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
    return DomainId{kind, index};
  };
  if (auto d = indexed("bank", DomainKind::Bank)) return d;
  return indexed("accel", DomainKind::Accelerator);
}

void ResidencyTracker::change(PowerState to, SimTime at) {
  if (at < since_) throw SimulationAbort("power state change back in time");
  accumulated_[static_cast<std::size_t>(state_)] += at - since_;
  state_ = to;
  since_ = at;
}

StateCycles ResidencyTracker::residency(SimTime now) const {
  StateCycles out = accumulated_;
  if (now > since_) out[static_cast<std::size_t>(state_)] += now - since_;
  return out;
}

}  // namespace xheep
