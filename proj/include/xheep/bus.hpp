// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xheep/address_map.hpp"
#include "xheep/config.hpp"
#include "xheep/sim.hpp"

namespace xheep {

enum class MasterKind : std::uint8_t { CpuInstr, CpuData, Dma, Accelerator, Debug };

/// Bus master identity. key() defines the round-robin order.
struct MasterId {
  MasterKind kind = MasterKind::CpuData;
  std::uint16_t index = 0;

  static constexpr MasterId cpu_instr() { return {MasterKind::CpuInstr, 0}; }
  static constexpr MasterId cpu_data() { return {MasterKind::CpuData, 0}; }
  static constexpr MasterId dma(std::uint16_t channel) { return {MasterKind::Dma, channel}; }
  static constexpr MasterId accelerator(std::uint16_t port) { return {MasterKind::Accelerator, port}; }
  static constexpr MasterId debug() { return {MasterKind::Debug, 0}; }

  constexpr std::uint32_t key() const { return (std::uint32_t(kind) << 16) | index; }
  auto operator<=>(const MasterId& o) const { return key() <=> o.key(); }
  bool operator==(const MasterId& o) const { return key() == o.key(); }
  std::string to_string() const;
};

enum class AccessKind : std::uint8_t { Read, Write };
enum class BusStatus : std::uint8_t { Ok, DecodeError, SlaveError };

std::string_view to_string(BusStatus status);

struct AccessResult {
  BusStatus status = BusStatus::Ok;
  std::uint32_t data = 0;
};

/// Anything that answers bus accesses at a region-relative offset.
class BusSlave {
 public:
  virtual ~BusSlave() = default;
  virtual AccessResult access(std::uint32_t offset, AccessKind kind, std::uint8_t width, std::uint32_t data) = 0;
};

struct BusTransaction {
  std::uint64_t id = 0;
  MasterId master;
  std::uint32_t address = 0;
  AccessKind kind = AccessKind::Read;
  std::uint8_t width_bytes = 4;
  std::uint32_t data = 0;
  SimTime issue_cycle = 0;
  std::optional<SimTime> grant_cycle;
};

struct BusResponse {
  BusTransaction txn;
  BusStatus status = BusStatus::Ok;
  std::uint32_t data = 0;
  /// Region index, absent on decode errors.
  std::optional<std::size_t> slave;
  SimTime complete_cycle = 0;
};

class BusMaster {
 public:
  virtual ~BusMaster() = default;
  virtual void on_response(const BusResponse& response) = 0;
};

/// Region containing `addr` plus the offset within it.
std::optional<RegionRef> decode(std::uint32_t addr, const AddressMap& map);

struct ArbitrationRequest {
  MasterId master;
  std::size_t slave = 0;
};

/// Grant selection. OneAtATime: one grant per cycle system-wide. FullCrossbar:
/// one grant per slave per cycle. Round-robin resumes after the master granted
/// last (per slave, or system-wide in OneAtATime); FixedPriority always picks
/// the lowest key.
class Arbiter {
 public:
  Arbiter(BusTopology topology, ArbitrationPolicy policy) : topology_(topology), policy_(policy) {}

  /// Indices into `pending` that win this cycle, ascending.
  std::vector<std::size_t> arbitrate(std::span<const ArbitrationRequest> pending);

  BusTopology topology() const { return topology_; }

 private:
  std::size_t pick(std::span<const ArbitrationRequest> pending, const std::vector<std::size_t>& contenders,
                   std::optional<std::uint32_t>& last);

  BusTopology topology_;
  ArbitrationPolicy policy_;
  std::map<std::size_t, std::optional<std::uint32_t>> last_by_slave_;
  std::optional<std::uint32_t> last_system_;
};

/// Cycles from grant to response: memory banks vs. register-style slaves.
SimTime completion_latency(RegionKind kind, const TimingConfig& timing);

struct BusStats {
  std::uint64_t issued = 0;
  std::uint64_t granted = 0;
  std::uint64_t completed = 0;
  std::uint64_t errored = 0;
  std::uint64_t pending = 0;
  std::uint64_t in_flight = 0;
};

/// OBI-style interconnect, registered in the late phase. One arbitration pass
/// sees every request issued in a cycle.
class Bus : public Component {
 public:
  Bus(Engine& engine, const AddressMap& map, BusTopology topology, ArbitrationPolicy policy,
      const TimingConfig& timing);

  std::string_view name() const override { return "bus"; }
  void handle(const Event& event) override;
  std::string describe(const Event& event) const override;

  void attach_slave(std::size_t region_index, BusSlave& slave);

  /// Issues at now(). One outstanding transaction per master; width 1, 2 or 4.
  std::uint64_t request(BusMaster& reply_to, MasterId master, std::uint32_t address, AccessKind kind,
                        std::uint8_t width, std::uint32_t data = 0);

  /// Called at grant time for every granted transaction (tests, probes).
  void set_grant_observer(std::function<void(const BusTransaction&, std::size_t slave)> observer) {
    grant_observer_ = std::move(observer);
  }

  const BusStats& stats() const { return stats_; }
  const AddressMap& map() const { return map_; }
  ComponentId id() const { return id_; }

 private:
  struct Pending {
    BusTransaction txn;
    std::size_t slave;
    BusMaster* reply_to;
  };
  struct InFlight {
    BusResponse response;
    BusMaster* reply_to;
  };

  void arbitrate_now();
  void ensure_tick();
  void deliver(std::uint64_t txn_id);

  Engine& engine_;
  const AddressMap& map_;
  TimingConfig timing_;
  Arbiter arbiter_;
  ComponentId id_;
  std::vector<BusSlave*> slaves_;
  std::vector<Pending> pending_;
  std::map<std::uint64_t, InFlight> in_flight_;
  std::map<std::uint32_t, std::uint64_t> outstanding_by_master_;
  std::uint64_t next_txn_ = 1;
  bool tick_queued_ = false;
  std::optional<SimTime> last_arbitration_;
  BusStats stats_;
  std::function<void(const BusTransaction&, std::size_t)> grant_observer_;
};

}  // namespace xheep
