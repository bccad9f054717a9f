// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "xheep/bus.hpp"
#include "xheep/power.hpp"
#include "xheep/sim.hpp"
#include "xheep/xaif.hpp"

namespace xheep {

namespace cpu_op {

/// Busy for `cycles`; dynamic energy is weighted by `intensity`.
struct Compute {
  SimTime cycles = 0;
  double intensity = 1.0;
};
/// Stalls without activity (no dynamic energy).
struct Idle {
  SimTime cycles = 0;
};
struct Access {
  AccessKind kind = AccessKind::Read;
  std::uint32_t address = 0;
  std::uint8_t width = 4;
  std::uint32_t data = 0;
  /// Throw SimulationAbort on an error response instead of recording it.
  bool must_succeed = false;
};
/// Programs `command` into the slot's window over the bus.
struct Offload {
  std::uint32_t slot = 0;
  OffloadCommand command;
};
/// Sleeps until `line` (or any line) is pending, then consumes it.
struct WaitForInterrupt {
  std::optional<std::uint32_t> line;
};
/// Zero-time hook, run when the program reaches it.
struct Call {
  std::function<void()> fn;
};

}  // namespace cpu_op

using CpuOp = std::variant<cpu_op::Compute, cpu_op::Idle, cpu_op::Access, cpu_op::Offload, cpu_op::WaitForInterrupt,
                           cpu_op::Call>;

struct CpuAccessRecord {
  BusResponse response;
};

/// In-order host core executing a queue of abstract operations.
class CpuCore : public Component, public BusMaster {
 public:
  CpuCore(Engine& engine, Bus& bus, PowerManager& power, Xaif& xaif);

  std::string_view name() const override { return "cpu"; }
  void handle(const Event& event) override;
  std::string describe(const Event& event) const override;
  void on_response(const BusResponse& response) override;

  /// Appends to the program; starts executing at now() if the core was idle.
  void push(CpuOp op);
  void push(std::vector<CpuOp> ops);

  /// Nothing queued and nothing in progress.
  bool idle() const { return ops_.empty() && !in_progress_; }
  bool sleeping() const { return waiting_irq_; }

  const std::vector<CpuAccessRecord>& accesses() const { return accesses_; }
  std::optional<std::uint32_t> last_read() const { return last_read_; }
  std::uint64_t errors() const { return errors_; }

 private:
  void kick();
  void next();
  void finish_op();
  bool try_consume();

  Engine& engine_;
  Bus& bus_;
  PowerManager& power_;
  Xaif& xaif_;
  ComponentId id_;
  std::deque<CpuOp> ops_;
  bool in_progress_ = false;
  bool waiting_irq_ = false;
  bool kick_queued_ = false;
  std::optional<std::uint32_t> wait_line_;
  bool current_must_succeed_ = false;
  std::uint64_t op_seq_ = 0;
  std::vector<CpuAccessRecord> accesses_;
  std::optional<std::uint32_t> last_read_;
  std::uint64_t errors_ = 0;
};

}  // namespace xheep
