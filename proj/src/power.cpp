// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/power.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "xheep/error.hpp"

namespace xheep {

std::string InterruptLine::to_string() const {
  switch (source) {
    case IrqSource::DmaChannel: return fmt::format("dma{}", index);
    case IrqSource::Accelerator: return fmt::format("accel{}", index);
    case IrqSource::Timer: return "timer";
    case IrqSource::External: return "external";
  }
  return "?";
}

PowerManager::PowerManager(Engine& engine, const PlatformConfig& config, std::vector<MemoryBank>& banks)
    : engine_(engine),
      config_(config),
      banks_(banks),
      domains_(platform_domains(config)),
      line_count_(static_cast<std::uint32_t>(config.dma_channel_count + config.accelerator_slots + 2)),
      pending_lines_(line_count_, false) {
  id_ = engine_.add_component(*this);
  for (DomainId d : domains_) {
    own_.emplace(d, Domain{d, domain_gateable(d, config), ResidencyTracker(PowerState::On, engine_.now()), {}, 0});
  }
}

PowerManager::Domain* PowerManager::find(DomainId id) {
  auto it = own_.find(id);
  return it == own_.end() ? nullptr : &it->second;
}

const PowerManager::Domain* PowerManager::find(DomainId id) const {
  auto it = own_.find(id);
  return it == own_.end() ? nullptr : &it->second;
}

bool PowerManager::exists(DomainId domain) const { return find(domain) != nullptr; }

bool PowerManager::gateable(DomainId domain) const {
  const Domain* d = find(domain);
  return d && d->gateable;
}

PowerState PowerManager::state(DomainId domain) const {
  if (domain.kind == DomainKind::Bank && domain.index < banks_.size()) return banks_[domain.index].power_state();
  const Domain* d = find(domain);
  if (!d) throw IllegalTransition("no such power domain: " + domain.to_string());
  return d->tracker.state();
}

SimTime PowerManager::request_transition(DomainId domain, PowerState target) {
  Domain* d = find(domain);
  if (!d) throw IllegalTransition("no such power domain: " + domain.to_string());
  if (!d->gateable && target != PowerState::On)
    throw IllegalTransition(fmt::format("{} is not gateable and cannot enter {}", domain.to_string(), to_string(target)));

  const SimTime now = engine_.now();
  SimTime done = now;
  if (domain.kind == DomainKind::Bank) {
    done = banks_[domain.index].begin_transition(target, now, config_.timing);
  } else {
    done = now + transition_latency(d->tracker.state(), target, config_.timing);
    d->pending = target;
  }
  const std::uint64_t tid = next_transition_++;
  transitions_[tid] = {domain, target, ++d->generation};
  engine_.schedule(Event{done, id_, EventKind::PowerTransitionDone, tid});
  return done;
}

void PowerManager::apply(DomainId id, PowerState target) {
  Domain& d = own_.at(id);
  d.pending.reset();
  if (d.tracker.state() != target) d.tracker.change(target, engine_.now());
}

void PowerManager::on_change(DomainId domain, std::function<void(PowerState)> listener) {
  listeners_[domain].push_back(std::move(listener));
}

void PowerManager::handle(const Event& event) {
  switch (event.kind) {
    case EventKind::PowerTransitionDone: {
      auto it = transitions_.find(event.tag);
      if (it == transitions_.end()) return;
      const Transition t = it->second;
      transitions_.erase(it);
      Domain& d = own_.at(t.domain);
      if (t.generation != d.generation) return;  // superseded by a newer request
      if (t.domain.kind == DomainKind::Bank) {
        banks_[t.domain.index].complete_transition(engine_.now());
      } else {
        apply(t.domain, t.target);
      }
      const PowerState now_state = state(t.domain);
      if (auto l = listeners_.find(t.domain); l != listeners_.end()) {
        for (auto& fn : l->second) fn(now_state);
      }
      break;
    }
    case EventKind::IrqRaise: {
      if (event.tag >= line_count_) throw SimulationAbort(fmt::format("irq line {} does not exist", event.tag));
      const auto id = static_cast<std::uint32_t>(event.tag);
      InterruptLine l{id, IrqSource::External, 0};
      for (const InterruptLine& candidate : lines()) {
        if (candidate.id == id) l = candidate;
      }
      route_interrupt(l);
      break;
    }
    case EventKind::CpuResume: {
      resume_queued_ = false;
      if (!cpu_sleeping_) return;
      Domain& cpu = own_.at(DomainId::cpu());
      ++cpu.generation;  // cancels a gating transition still in flight
      apply(DomainId::cpu(), PowerState::On);
      cpu_sleeping_ = false;
      ++resumes_;
      if (auto l = listeners_.find(DomainId::cpu()); l != listeners_.end()) {
        for (auto& fn : l->second) fn(PowerState::On);
      }
      if (on_resume_) on_resume_();
      break;
    }
    default:
      throw SimulationAbort(fmt::format("power manager got unexpected event {}", payload_string(event)));
  }
}

std::string PowerManager::describe(const Event& event) const {
  if (event.kind == EventKind::PowerTransitionDone) {
    if (auto it = transitions_.find(event.tag); it != transitions_.end())
      return fmt::format("PowerTransitionDone({}->{})", it->second.domain.to_string(), to_string(it->second.target));
  }
  if (event.kind == EventKind::IrqRaise && event.tag < line_count_) {
    for (const InterruptLine& l : lines()) {
      if (l.id == event.tag) return fmt::format("IrqRaise({})", l.to_string());
    }
  }
  return payload_string(event);
}

InterruptLine PowerManager::line(IrqSource source, std::uint32_t index) const {
  const auto dma = static_cast<std::uint32_t>(config_.dma_channel_count);
  const auto slots = static_cast<std::uint32_t>(config_.accelerator_slots);
  switch (source) {
    case IrqSource::DmaChannel:
      if (index >= dma) throw SimulationAbort(fmt::format("no DMA channel {}", index));
      return {index, source, index};
    case IrqSource::Accelerator:
      if (index >= slots) throw SimulationAbort(fmt::format("no accelerator slot {}", index));
      return {dma + index, source, index};
    case IrqSource::Timer: return {dma + slots, source, 0};
    case IrqSource::External: return {dma + slots + 1, source, 0};
  }
  throw SimulationAbort("unknown interrupt source");
}

std::vector<InterruptLine> PowerManager::lines() const {
  std::vector<InterruptLine> out;
  for (std::uint32_t k = 0; k < config_.dma_channel_count; ++k) out.push_back(line(IrqSource::DmaChannel, k));
  for (std::uint32_t s = 0; s < config_.accelerator_slots; ++s) out.push_back(line(IrqSource::Accelerator, s));
  out.push_back(line(IrqSource::Timer));
  out.push_back(line(IrqSource::External));
  return out;
}

void PowerManager::raise(const InterruptLine& l) {
  engine_.schedule(Event{engine_.now(), id_, EventKind::IrqRaise, l.id});
}

void PowerManager::route_interrupt(const InterruptLine& l) {
  if (l.id >= line_count_) throw SimulationAbort(fmt::format("irq line {} does not exist", l.id));
  pending_lines_[l.id] = true;
  ++routed_;
  if (cpu_sleeping_ && !resume_queued_) {
    engine_.schedule(Event{engine_.now() + config_.timing.irq_latency, id_, EventKind::CpuResume, 0});
    resume_queued_ = true;
  }
}

bool PowerManager::pending(std::uint32_t line_id) const {
  return line_id < pending_lines_.size() && pending_lines_[line_id];
}

bool PowerManager::any_pending() const {
  return std::find(pending_lines_.begin(), pending_lines_.end(), true) != pending_lines_.end();
}

bool PowerManager::consume(std::uint32_t line_id) {
  if (!pending(line_id)) return false;
  pending_lines_[line_id] = false;
  return true;
}

std::optional<std::uint32_t> PowerManager::consume_any() {
  for (std::uint32_t i = 0; i < pending_lines_.size(); ++i) {
    if (pending_lines_[i]) {
      pending_lines_[i] = false;
      return i;
    }
  }
  return std::nullopt;
}

void PowerManager::sleep_cpu() {
  if (cpu_sleeping_) return;
  request_transition(DomainId::cpu(), PowerState::ClockGated);
  cpu_sleeping_ = true;
}

std::vector<DomainResidency> PowerManager::residencies() const {
  std::vector<DomainResidency> out;
  const SimTime now = engine_.now();
  for (DomainId d : domains_) {
    if (d.kind == DomainKind::Bank) {
      out.push_back({d, banks_[d.index].residency(now)});
    } else {
      out.push_back({d, own_.at(d).tracker.residency(now)});
    }
  }
  return out;
}

double leakage_power_uw(const PlatformConfig& config, const std::map<DomainId, PowerState>& states,
                        const LeakageModel& leak, ShareBasis basis) {
  double total = 0.0;
  for (DomainId d : platform_domains(config)) {
    auto it = states.find(d);
    total += domain_leakage_uw(d, it == states.end() ? PowerState::On : it->second, config, leak, basis);
  }
  return total;
}

LeakageFloor deep_sleep_leakage(const PlatformConfig& config, const LeakageModel& leak) {
  std::map<DomainId, PowerState> states;
  for (DomainId d : platform_domains(config)) {
    if (domain_gateable(d, config)) states[d] = PowerState::Off;
  }
  return {leakage_power_uw(config, states, leak, ShareBasis::Raw),
          leakage_power_uw(config, states, leak, ShareBasis::Normalized)};
}

}  // namespace xheep
