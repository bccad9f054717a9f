// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/sim.hpp"

#include <fmt/format.h>

#include "xheep/error.hpp"

namespace xheep {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::BusGrant: return "BusGrant";
    case EventKind::BusResponse: return "BusResponse";
    case EventKind::DmaElementDone: return "DmaElementDone";
    case EventKind::DmaChannelDone: return "DmaChannelDone";
    case EventKind::IrqRaise: return "IrqRaise";
    case EventKind::PowerTransitionDone: return "PowerTransitionDone";
    case EventKind::AccelDone: return "AccelDone";
    case EventKind::CpuResume: return "CpuResume";
    case EventKind::Custom: return "Custom";
  }
  return "?";
}

std::string payload_string(const Event& event) {
  if (event.kind == EventKind::BusGrant || event.kind == EventKind::CpuResume) return std::string(to_string(event.kind));
  return fmt::format("{}({})", to_string(event.kind), event.tag);
}

ActivityCounters& ActivityCounters::operator+=(const ActivityCounters& o) {
  cpu_active_cycles += o.cpu_active_cycles;
  accel_active_cycles += o.accel_active_cycles;
  bus_grants += o.bus_grants;
  mem_accesses += o.mem_accesses;
  dma_elements += o.dma_elements;
  peripheral_accesses += o.peripheral_accesses;
  cpu_weighted_cycles += o.cpu_weighted_cycles;
  accel_weighted_cycles += o.accel_weighted_cycles;
  return *this;
}

ActivityCounters ActivityCounters::operator-(const ActivityCounters& o) const {
  ActivityCounters d;
  d.cpu_active_cycles = cpu_active_cycles - o.cpu_active_cycles;
  d.accel_active_cycles = accel_active_cycles - o.accel_active_cycles;
  d.bus_grants = bus_grants - o.bus_grants;
  d.mem_accesses = mem_accesses - o.mem_accesses;
  d.dma_elements = dma_elements - o.dma_elements;
  d.peripheral_accesses = peripheral_accesses - o.peripheral_accesses;
  d.cpu_weighted_cycles = cpu_weighted_cycles - o.cpu_weighted_cycles;
  d.accel_weighted_cycles = accel_weighted_cycles - o.accel_weighted_cycles;
  return d;
}

void CsvTrace::record(SimTime cycle, std::string_view component, std::string_view payload) {
  out_ << cycle << ',' << component << ',' << payload << '\n';
}

ComponentId Engine::add_component(Component& component, Phase phase) {
  components_.push_back(&component);
  phases_.push_back(phase);
  return static_cast<ComponentId>(components_.size() - 1);
}

std::string_view Engine::component_name(ComponentId id) const {
  auto i = static_cast<std::size_t>(id);
  return i < components_.size() ? components_[i]->name() : std::string_view("?");
}

void Engine::schedule(const Event& event) {
  if (event.time < now_) {
    throw SimulationAbort(fmt::format("event {} for '{}' scheduled at cycle {} but now is {}",
                                      payload_string(event), component_name(event.target), event.time, now_));
  }
  if (static_cast<std::size_t>(event.target) >= components_.size())
    throw SimulationAbort(fmt::format("event for unknown component id {}", static_cast<std::uint32_t>(event.target)));
  const auto id = static_cast<std::size_t>(event.target);
  const std::uint64_t rank = (std::uint64_t(phases_[id]) << 32) | id;
  queue_.push({event, rank, next_seq_++});
}

RunSummary Engine::run_until(SimTime limit) {
  while (!queue_.empty()) {
    const Queued next = queue_.top();
    if (next.event.time > limit) {
      now_ = std::max(now_, limit);
      break;
    }
    queue_.pop();
    now_ = next.event.time;
    ++events_processed_;
    Component& target = *components_[static_cast<std::size_t>(next.event.target)];
    if (trace_) trace_->record(now_, target.name(), target.describe(next.event));
    target.handle(next.event);
  }
  return summary();
}

RunSummary Engine::run() { return run_until(~SimTime{0}); }

void Engine::note(std::string_view component, std::string_view payload) {
  if (trace_) trace_->record(now_, component, payload);
}

}  // namespace xheep
