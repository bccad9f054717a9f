// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "xheep/energy.hpp"
#include "xheep/memory.hpp"
#include "xheep/power_state.hpp"
#include "xheep/sim.hpp"

namespace xheep {

enum class IrqSource : std::uint8_t { DmaChannel, Accelerator, Timer, External };

struct InterruptLine {
  std::uint32_t id = 0;
  IrqSource source = IrqSource::External;
  std::uint32_t index = 0;

  bool operator==(const InterruptLine&) const = default;
  std::string to_string() const;
};

/// Power manager plus the fast interrupt router. Banks delegate their
/// transition rules to MemoryBank; every other domain keeps its own tracker.
class PowerManager : public Component {
 public:
  PowerManager(Engine& engine, const PlatformConfig& config, std::vector<MemoryBank>& banks);

  std::string_view name() const override { return "power"; }
  void handle(const Event& event) override;
  std::string describe(const Event& event) const override;

  /// Returns the completion cycle. IllegalTransition when a non-gateable
  /// domain is asked to leave On, or the domain does not exist.
  SimTime request_transition(DomainId domain, PowerState target);

  PowerState state(DomainId domain) const;
  bool gateable(DomainId domain) const;
  bool exists(DomainId domain) const;
  const std::vector<DomainId>& domains() const { return domains_; }

  /// Called with the new state whenever `domain` completes a transition.
  void on_change(DomainId domain, std::function<void(PowerState)> listener);

  // --- interrupts -------------------------------------------------------

  InterruptLine line(IrqSource source, std::uint32_t index = 0) const;
  std::vector<InterruptLine> lines() const;
  /// Raises `line` through an IrqRaise event delivered this cycle.
  void raise(const InterruptLine& line);
  /// Sets the pending flag; a sleeping CPU gets one CpuResume irq_latency later.
  void route_interrupt(const InterruptLine& line);
  bool pending(std::uint32_t line_id) const;
  bool any_pending() const;
  /// Clears the flag; returns whether it was set.
  bool consume(std::uint32_t line_id);
  std::optional<std::uint32_t> consume_any();

  /// wait-for-interrupt: the CPU clock-gates until the next routed interrupt.
  void sleep_cpu();
  bool cpu_sleeping() const { return cpu_sleeping_; }
  void set_cpu_resume_handler(std::function<void()> handler) { on_resume_ = std::move(handler); }
  std::uint64_t resume_count() const { return resumes_; }
  std::uint64_t routed_count() const { return routed_; }

  std::vector<DomainResidency> residencies() const;

 private:
  struct Domain {
    DomainId id;
    bool gateable = true;
    ResidencyTracker tracker;
    std::optional<PowerState> pending;
    std::uint64_t generation = 0;
  };
  struct Transition {
    DomainId domain;
    PowerState target;
    std::uint64_t generation;
  };

  Domain* find(DomainId id);
  const Domain* find(DomainId id) const;
  void apply(DomainId id, PowerState target);

  Engine& engine_;
  const PlatformConfig& config_;
  std::vector<MemoryBank>& banks_;
  ComponentId id_;
  std::vector<DomainId> domains_;
  std::map<DomainId, Domain> own_;
  std::map<std::uint64_t, Transition> transitions_;
  std::uint64_t next_transition_ = 1;
  std::map<DomainId, std::vector<std::function<void(PowerState)>>> listeners_;

  std::uint32_t line_count_;
  std::vector<bool> pending_lines_;
  bool cpu_sleeping_ = false;
  bool resume_queued_ = false;
  std::uint64_t resumes_ = 0;
  std::uint64_t routed_ = 0;
  std::function<void()> on_resume_;
};

/// Leakage with every gateable domain Off: the always-on residue.
LeakageFloor deep_sleep_leakage(const PlatformConfig& config, const LeakageModel& leak = {});

/// Total leakage for an explicit state assignment; unlisted domains are On.
double leakage_power_uw(const PlatformConfig& config, const std::map<DomainId, PowerState>& states,
                        const LeakageModel& leak = {}, ShareBasis basis = ShareBasis::Normalized);

}  // namespace xheep
