// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/cpu.hpp"

#include <fmt/format.h>

#include "xheep/error.hpp"

namespace xheep {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

CpuCore::CpuCore(Engine& engine, Bus& bus, PowerManager& power, Xaif& xaif)
    : engine_(engine), bus_(bus), power_(power), xaif_(xaif) {
  id_ = engine_.add_component(*this);
  power_.set_cpu_resume_handler([this] {
    if (!waiting_irq_) return;
    if (try_consume()) {
      waiting_irq_ = false;
      finish_op();
    } else {
      power_.sleep_cpu();
    }
  });
}

void CpuCore::push(CpuOp op) {
  ops_.push_back(std::move(op));
  kick();
}

void CpuCore::push(std::vector<CpuOp> ops) {
  for (auto& op : ops) ops_.push_back(std::move(op));
  kick();
}

void CpuCore::kick() {
  if (in_progress_ || kick_queued_) return;
  kick_queued_ = true;
  engine_.schedule(Event{engine_.now(), id_, EventKind::Custom, 0});
}

bool CpuCore::try_consume() {
  if (wait_line_) return power_.consume(*wait_line_);
  return power_.consume_any().has_value();
}

void CpuCore::finish_op() {
  in_progress_ = false;
  next();
}

void CpuCore::next() {
  while (!ops_.empty() && !in_progress_) {
    CpuOp op = std::move(ops_.front());
    ops_.pop_front();
    in_progress_ = true;
    std::visit(
        overloaded{
            [&](cpu_op::Compute& c) {
              if (c.cycles == 0) {
                in_progress_ = false;
                return;
              }
              engine_.activity().cpu_active_cycles += c.cycles;
              engine_.activity().cpu_weighted_cycles += static_cast<double>(c.cycles) * c.intensity;
              engine_.schedule(Event{engine_.now() + c.cycles, id_, EventKind::Custom, ++op_seq_});
            },
            [&](cpu_op::Idle& c) {
              if (c.cycles == 0) {
                in_progress_ = false;
                return;
              }
              engine_.schedule(Event{engine_.now() + c.cycles, id_, EventKind::Custom, ++op_seq_});
            },
            [&](cpu_op::Access& a) {
              current_must_succeed_ = a.must_succeed;
              bus_.request(*this, MasterId::cpu_data(), a.address, a.kind, a.width, a.data);
            },
            [&](cpu_op::Offload& o) {
              XaifSocket& socket = xaif_.ready_for_offload(o.slot);
              const std::uint32_t base = socket.window().base;
              auto writes = nmv::command_writes(o.command);
              for (auto it = writes.rbegin(); it != writes.rend(); ++it) {
                ops_.push_front(cpu_op::Access{AccessKind::Write, base + it->first, 4, it->second, true});
              }
              in_progress_ = false;
            },
            [&](cpu_op::WaitForInterrupt& w) {
              wait_line_ = w.line;
              if (try_consume()) {
                in_progress_ = false;
                return;
              }
              waiting_irq_ = true;
              power_.sleep_cpu();
            },
            [&](cpu_op::Call& c) {
              if (c.fn) c.fn();
              in_progress_ = false;
            },
        },
        op);
  }
}

void CpuCore::handle(const Event& event) {
  if (event.kind != EventKind::Custom)
    throw SimulationAbort(fmt::format("cpu got unexpected event {}", payload_string(event)));
  if (event.tag == 0) {
    kick_queued_ = false;
    if (!in_progress_) next();
    return;
  }
  finish_op();
}

std::string CpuCore::describe(const Event& event) const {
  if (event.kind == EventKind::Custom) {
    return event.tag == 0 ? std::string("CpuStart") : fmt::format("CpuOpDone({})", event.tag);
  }
  return payload_string(event);
}

void CpuCore::on_response(const BusResponse& response) {
  accesses_.push_back({response});
  const SimTime stall = response.complete_cycle - response.txn.issue_cycle;
  engine_.activity().cpu_active_cycles += stall;
  engine_.activity().cpu_weighted_cycles += static_cast<double>(stall);
  if (response.status != BusStatus::Ok) {
    ++errors_;
    if (current_must_succeed_) {
      throw SimulationAbort(fmt::format("cpu {} at {} failed: {}", response.txn.kind == AccessKind::Read ? "read" : "write",
                                        response.txn.address, to_string(response.status)));
    }
  } else if (response.txn.kind == AccessKind::Read) {
    last_read_ = response.data;
  }
  finish_op();
}

}  // namespace xheep
