// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/bus.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "xheep/error.hpp"
#include "xheep/json_util.hpp"

namespace xheep {

std::string MasterId::to_string() const {
  switch (kind) {
    case MasterKind::CpuInstr: return "cpu-instr";
    case MasterKind::CpuData: return "cpu-data";
    case MasterKind::Dma: return fmt::format("dma{}", index);
    case MasterKind::Accelerator: return fmt::format("accel{}", index);
    case MasterKind::Debug: return "debug";
  }
  return "?";
}

std::string_view to_string(BusStatus status) {
  switch (status) {
    case BusStatus::Ok: return "ok";
    case BusStatus::DecodeError: return "decode-error";
    case BusStatus::SlaveError: return "slave-error";
  }
  return "?";
}

std::optional<RegionRef> decode(std::uint32_t addr, const AddressMap& map) { return map.find(addr); }

std::size_t Arbiter::pick(std::span<const ArbitrationRequest> pending, const std::vector<std::size_t>& contenders,
                          std::optional<std::uint32_t>& last) {
  auto key_of = [&](std::size_t i) { return pending[i].master.key(); };
  std::size_t lowest = contenders.front();
  for (std::size_t i : contenders) {
    if (key_of(i) < key_of(lowest)) lowest = i;
  }
  std::size_t winner = lowest;
  if (policy_ == ArbitrationPolicy::RoundRobin && last) {
    std::optional<std::size_t> next;
    for (std::size_t i : contenders) {
      if (key_of(i) > *last && (!next || key_of(i) < key_of(*next))) next = i;
    }
    if (next) winner = *next;
  }
  last = key_of(winner);
  return winner;
}

std::vector<std::size_t> Arbiter::arbitrate(std::span<const ArbitrationRequest> pending) {
  std::vector<std::size_t> grants;
  if (pending.empty()) return grants;
  if (topology_ == BusTopology::OneAtATime) {
    std::vector<std::size_t> all(pending.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    grants.push_back(pick(pending, all, last_system_));
    return grants;
  }
  std::map<std::size_t, std::vector<std::size_t>> by_slave;
  for (std::size_t i = 0; i < pending.size(); ++i) by_slave[pending[i].slave].push_back(i);
  for (auto& [slave, contenders] : by_slave) grants.push_back(pick(pending, contenders, last_by_slave_[slave]));
  std::sort(grants.begin(), grants.end());
  return grants;
}

SimTime completion_latency(RegionKind kind, const TimingConfig& timing) {
  return kind == RegionKind::MemoryBank ? timing.memory_latency : timing.peripheral_latency;
}

Bus::Bus(Engine& engine, const AddressMap& map, BusTopology topology, ArbitrationPolicy policy,
         const TimingConfig& timing)
    : engine_(engine), map_(map), timing_(timing), arbiter_(topology, policy), slaves_(map.size(), nullptr) {
  id_ = engine_.add_component(*this, Phase::Late);
}

void Bus::attach_slave(std::size_t region_index, BusSlave& slave) {
  if (region_index >= slaves_.size()) throw SimulationAbort("attach_slave: no such region");
  slaves_[region_index] = &slave;
}

std::uint64_t Bus::request(BusMaster& reply_to, MasterId master, std::uint32_t address, AccessKind kind,
                           std::uint8_t width, std::uint32_t data) {
  if (width != 1 && width != 2 && width != 4)
    throw SimulationAbort(fmt::format("bus access width {} from {}", width, master.to_string()));
  if (outstanding_by_master_.contains(master.key()))
    throw SimulationAbort(fmt::format("{} already has an outstanding transaction", master.to_string()));

  BusTransaction txn{next_txn_++, master, address, kind, width, data, engine_.now(), std::nullopt};
  ++stats_.issued;
  outstanding_by_master_[master.key()] = txn.id;

  auto where = decode(address, map_);
  if (!where || std::uint64_t(where->offset) + width > map_[where->index].size_bytes) {
    // No grant; the error answer still takes one cycle.
    BusResponse resp{txn, BusStatus::DecodeError, 0, std::nullopt, engine_.now() + 1};
    in_flight_[txn.id] = {resp, &reply_to};
    ++stats_.in_flight;
    engine_.schedule(Event{resp.complete_cycle, id_, EventKind::BusResponse, txn.id});
    return txn.id;
  }
  pending_.push_back({txn, where->index, &reply_to});
  ++stats_.pending;
  ensure_tick();
  return txn.id;
}

void Bus::ensure_tick() {
  if (tick_queued_) return;
  const SimTime now = engine_.now();
  const SimTime at = (last_arbitration_ && *last_arbitration_ == now) ? now + 1 : now;
  engine_.schedule(Event{at, id_, EventKind::BusGrant, 0});
  tick_queued_ = true;
}

void Bus::handle(const Event& event) {
  switch (event.kind) {
    case EventKind::BusGrant:
      tick_queued_ = false;
      arbitrate_now();
      break;
    case EventKind::BusResponse:
      deliver(event.tag);
      break;
    default:
      throw SimulationAbort(fmt::format("bus got unexpected event {}", payload_string(event)));
  }
}

void Bus::arbitrate_now() {
  const SimTime now = engine_.now();
  last_arbitration_ = now;
  if (pending_.empty()) return;

  std::vector<ArbitrationRequest> requests;
  requests.reserve(pending_.size());
  for (const auto& p : pending_) requests.push_back({p.txn.master, p.slave});
  const std::vector<std::size_t> grants = arbiter_.arbitrate(requests);

  std::vector<bool> granted(pending_.size(), false);
  for (std::size_t g : grants) {
    granted[g] = true;
    Pending& p = pending_[g];
    p.txn.grant_cycle = now;
    const Region& region = map_[p.slave];
    AccessResult result{BusStatus::SlaveError, 0};
    if (BusSlave* slave = slaves_[p.slave]) {
      result = slave->access(p.txn.address - region.base, p.txn.kind, p.txn.width_bytes, p.txn.data);
    }
    ++stats_.granted;
    ++engine_.activity().bus_grants;
    if (region.kind == RegionKind::MemoryBank) {
      ++engine_.activity().mem_accesses;
    } else {
      ++engine_.activity().peripheral_accesses;
    }
    if (grant_observer_) grant_observer_(p.txn, p.slave);

    BusResponse resp{p.txn, result.status, result.data, p.slave, now + completion_latency(region.kind, timing_)};
    in_flight_[p.txn.id] = {resp, p.reply_to};
    ++stats_.in_flight;
    --stats_.pending;
    engine_.schedule(Event{resp.complete_cycle, id_, EventKind::BusResponse, p.txn.id});
  }

  std::vector<Pending> rest;
  rest.reserve(pending_.size() - grants.size());
  for (std::size_t i = 0; i < pending_.size(); ++i) {
    if (!granted[i]) rest.push_back(pending_[i]);
  }
  pending_ = std::move(rest);
  if (!pending_.empty()) {
    engine_.schedule(Event{now + 1, id_, EventKind::BusGrant, 0});
    tick_queued_ = true;
  }
}

void Bus::deliver(std::uint64_t txn_id) {
  auto it = in_flight_.find(txn_id);
  if (it == in_flight_.end()) throw SimulationAbort(fmt::format("response for unknown transaction {}", txn_id));
  InFlight f = it->second;
  in_flight_.erase(it);
  --stats_.in_flight;
  if (f.response.status == BusStatus::Ok) {
    ++stats_.completed;
  } else {
    ++stats_.errored;
  }
  outstanding_by_master_.erase(f.response.txn.master.key());
  f.reply_to->on_response(f.response);
}

std::string Bus::describe(const Event& event) const {
  if (event.kind != EventKind::BusResponse) return payload_string(event);
  auto it = in_flight_.find(event.tag);
  if (it == in_flight_.end()) return payload_string(event);
  const BusResponse& r = it->second.response;
  return fmt::format("BusResponse(txn={};master={};slave={};kind={};addr={};width={};issue={};grant={};complete={};status={})",
                     r.txn.id, r.txn.master.to_string(), r.slave ? map_[*r.slave].name : std::string("none"),
                     r.txn.kind == AccessKind::Read ? "R" : "W", json_util::hex32(r.txn.address), r.txn.width_bytes,
                     r.txn.issue_cycle, r.txn.grant_cycle ? fmt::format("{}", *r.txn.grant_cycle) : std::string("-"),
                     r.complete_cycle, to_string(r.status));
}

}  // namespace xheep
