// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <ostream>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

namespace xheep {

/// Clock cycles since the start of a run.
using SimTime = std::uint64_t;

enum class ComponentId : std::uint32_t {};

enum class EventKind : std::uint8_t {
  BusGrant,
  BusResponse,
  DmaElementDone,
  DmaChannelDone,
  IrqRaise,
  PowerTransitionDone,
  AccelDone,
  CpuResume,
  Custom,
};

std::string_view to_string(EventKind kind);

struct Event {
  SimTime time = 0;
  ComponentId target{};
  EventKind kind = EventKind::Custom;
  std::uint64_t tag = 0;
};

/// "Kind" or "Kind(tag)"; BusGrant and CpuResume carry no tag.
std::string payload_string(const Event& event);

class Component {
 public:
  virtual ~Component() = default;
  virtual std::string_view name() const = 0;
  virtual void handle(const Event& event) = 0;
  /// Payload column of the trace line for `event`.
  virtual std::string describe(const Event& event) const { return payload_string(event); }
};

/// Activity counters read by the energy ledger. Weighted cycles are cycles
/// multiplied by the per-segment activity intensity.
struct ActivityCounters {
  std::uint64_t cpu_active_cycles = 0;
  std::uint64_t accel_active_cycles = 0;
  std::uint64_t bus_grants = 0;
  std::uint64_t mem_accesses = 0;
  std::uint64_t dma_elements = 0;
  std::uint64_t peripheral_accesses = 0;
  double cpu_weighted_cycles = 0.0;
  double accel_weighted_cycles = 0.0;

  ActivityCounters& operator+=(const ActivityCounters& other);
  ActivityCounters operator-(const ActivityCounters& other) const;
  bool operator==(const ActivityCounters&) const = default;
};

struct RunSummary {
  SimTime final_time = 0;
  std::uint64_t events_processed = 0;
  ActivityCounters activity;
};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void record(SimTime cycle, std::string_view component, std::string_view payload) = 0;
};

/// `cycle,component,payload` lines.
class CsvTrace : public TraceSink {
 public:
  explicit CsvTrace(std::ostream& out) : out_(out) {}
  void record(SimTime cycle, std::string_view component, std::string_view payload) override;

 private:
  std::ostream& out_;
};

/// Late components see a cycle after every normal component has.
enum class Phase : std::uint8_t { Normal, Late };

/// Single-threaded discrete-event engine. Same-cycle events are delivered by
/// (target phase, target component id, insertion sequence); ids follow
/// registration order.
class Engine {
 public:
  Engine() = default;
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  ComponentId add_component(Component& component, Phase phase = Phase::Normal);
  std::string_view component_name(ComponentId id) const;

  SimTime now() const { return now_; }

  /// Throws SimulationAbort when event.time < now().
  void schedule(const Event& event);
  void schedule_in(SimTime delay, ComponentId target, EventKind kind, std::uint64_t tag = 0) {
    schedule(Event{now_ + delay, target, kind, tag});
  }

  /// Delivers events until the queue drains or the next one lies past `limit`
  /// (in which case now() is advanced to `limit`).
  RunSummary run_until(SimTime limit);
  RunSummary run();

  bool idle() const { return queue_.empty(); }
  std::size_t pending_events() const { return queue_.size(); }
  std::uint64_t events_processed() const { return events_processed_; }

  ActivityCounters& activity() { return activity_; }
  const ActivityCounters& activity() const { return activity_; }
  RunSummary summary() const { return {now_, events_processed_, activity_}; }

  void set_trace(TraceSink* sink) { trace_ = sink; }
  TraceSink* trace() const { return trace_; }
  /// Trace line that is not tied to a delivered event.
  void note(std::string_view component, std::string_view payload);

 private:
  struct Queued {
    Event event;
    std::uint64_t rank;
    std::uint64_t seq;
  };
  struct Later {
    bool operator()(const Queued& a, const Queued& b) const {
      if (a.event.time != b.event.time) return a.event.time > b.event.time;
      if (a.rank != b.rank) return a.rank > b.rank;
      return a.seq > b.seq;
    }
  };

  std::vector<Component*> components_;
  std::vector<Phase> phases_;
  std::priority_queue<Queued, std::vector<Queued>, Later> queue_;
  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t events_processed_ = 0;
  ActivityCounters activity_;
  TraceSink* trace_ = nullptr;
};

}  // namespace xheep
