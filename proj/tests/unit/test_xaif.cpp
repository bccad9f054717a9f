// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <doctest.h>

#include "../support/gen.hpp"
#include "xheep/error.hpp"

using namespace xheep;

namespace {

__extension__ using u128 = unsigned __int128;

PlatformConfig one_slot() {
  PlatformConfig c = default_config();
  c.accelerator_slots = 1;
  return c;
}

PlatformConfig attached() {
  PlatformConfig c = one_slot();
  c.accelerators = {{0, "near-mem-vector", 1, 0.25}};
  return c;
}

OffloadCommand timed(std::uint32_t count, double cpe = 0.25) {
  OffloadCommand cmd;
  cmd.kernel_id = nmv::kKernelTimed;
  cmd.element_count = count;
  cmd.cycles_per_element = rational_from_double(cpe);
  return cmd;
}

}  // namespace

TEST_SUITE("xaif") {
  TEST_CASE("attach exposes the slot window") {
    Platform p(one_slot());
    XaifSocket& s = p.xaif().attach(std::make_unique<NearMemVector>(1), 0);
    CHECK(s.window().base == 0x3000'0000);
    CHECK(s.window().size_bytes == 0x1'0000);
    CHECK(s.master_ports() == std::vector<MasterId>{MasterId::accelerator(0)});
  }

  TEST_CASE("attach errors") {
    Platform p(one_slot());
    CHECK_THROWS_AS(p.xaif().attach(std::make_unique<NearMemVector>(1), 1), NoSuchSlot);
    p.xaif().attach(std::make_unique<NearMemVector>(1), 0);
    CHECK_THROWS_AS(p.xaif().attach(std::make_unique<NearMemVector>(0), 0), SlotOccupied);
  }

  TEST_CASE("shared-dma master mode") {
    PlatformConfig c = attached();
    c.xaif_master_mode = XaifMasterMode::SharedDma;
    Platform p(c);
    CHECK(p.xaif().socket(0)->master_ports() == std::vector<MasterId>{MasterId::dma(0)});
  }

  TEST_CASE("registry knows the near-memory model") {
    CHECK(AcceleratorRegistry::instance().contains("near-mem-vector"));
    PlatformConfig c = attached();
    c.accelerators[0].model = "systolic-array";
    CHECK_THROWS(Platform{c});
  }

  TEST_CASE("busy time is ceil(count x cpe)") {
    Platform p(attached());
    p.xaif().offload(0, timed(1024));
    p.engine().run_until(255);
    CHECK(p.xaif().socket(0)->state() == AccelState::Busy);
    CHECK(p.bank(1).mode() == BankMode::ComputeMode);
    p.engine().run_until(256);
    CHECK(p.xaif().socket(0)->state() == AccelState::Done);
    CHECK(p.bank(1).mode() == BankMode::MemoryMode);
    CHECK(p.engine().activity().accel_active_cycles == 256);
    CHECK(p.power().pending(p.power().line(IrqSource::Accelerator, 0).id));
  }

  TEST_CASE("second offload while busy") {
    Platform p(attached());
    p.xaif().offload(0, timed(64));
    CHECK_THROWS_AS(p.xaif().ready_for_offload(0), AcceleratorBusy);
    CHECK_THROWS_AS(p.xaif().ready_for_offload(3), NoSuchSlot);
  }

  TEST_CASE("compute bank is hidden while busy") {
    Platform p(attached());
    p.cpu().push(cpu_op::Offload{0, timed(1000)});
    p.cpu().push(cpu_op::Access{AccessKind::Read, 0x8000, 4, 0, false});
    p.cpu().push(cpu_op::Access{AccessKind::Read, 0x0000, 4, 0, false});
    p.cpu().push(cpu_op::WaitForInterrupt{p.power().line(IrqSource::Accelerator, 0).id});
    p.cpu().push(cpu_op::Access{AccessKind::Read, 0x8000, 4, 0, false});
    p.run();
    const auto& acc = p.cpu().accesses();
    REQUIRE(acc.size() >= 3);
    CHECK(acc[acc.size() - 3].response.status == BusStatus::SlaveError);
    CHECK(acc[acc.size() - 2].response.status == BusStatus::Ok);
    CHECK(acc.back().response.status == BusStatus::Ok);
  }

  TEST_CASE("scale-add kernel") {
    Platform p(attached());
    std::vector<std::uint8_t> words;
    for (std::uint32_t i = 0; i < 16; ++i)
      for (int b = 0; b < 4; ++b) words.push_back(static_cast<std::uint8_t>(i >> (8 * b)));
    p.load(0x8000, words);
    OffloadCommand cmd = timed(16, 1.0);
    cmd.kernel_id = nmv::kKernelScaleAdd;
    cmd.scale = 5;
    cmd.add = 3;
    p.cpu().push(cpu_op::Offload{0, cmd});
    p.cpu().push(cpu_op::WaitForInterrupt{p.power().line(IrqSource::Accelerator, 0).id});
    p.run();
    for (std::uint32_t i = 0; i < 16; ++i) CHECK(p.bank(1).read_word(4 * i) == 5 * i + 3);
  }

  TEST_CASE("powered-down accelerator") {
    Platform p(attached());
    p.power().request_transition(DomainId::accelerator(0), PowerState::Off);
    p.engine().run();
    CHECK_THROWS_AS(p.xaif().ready_for_offload(0), PoweredDown);
    p.cpu().push(cpu_op::Offload{0, timed(8)});
    CHECK_THROWS_AS(p.run(), PoweredDown);
  }

  TEST_CASE("clock gating freezes progress") {
    Platform p(attached());
    p.xaif().offload(0, timed(400, 1.0));
    p.engine().run_until(100);
    p.power().request_transition(DomainId::accelerator(0), PowerState::ClockGated);
    p.engine().run_until(300);
    CHECK(p.xaif().socket(0)->state() == AccelState::Busy);
    p.power().request_transition(DomainId::accelerator(0), PowerState::On);
    p.engine().run();
    CHECK(p.xaif().socket(0)->state() == AccelState::Done);
    CHECK(p.engine().activity().accel_active_cycles == 400);
    CHECK(p.engine().now() > 400);
  }

  TEST_CASE("register interface") {
    OffloadCommand cmd = timed(10, 0.5);
    const auto writes = nmv::command_writes(cmd);
    REQUIRE_FALSE(writes.empty());
    CHECK(writes.back() == std::pair<std::uint32_t, std::uint32_t>{nmv::kCtrl, 1});
    cmd.cycles_per_element = {1, 3};
    CHECK_THROWS(nmv::command_writes(cmd));
  }

  TEST_CASE("rational ceiling is exact (property)") {
    test::Gen g(61);
    for (int i = 0; i < 5000; ++i) {
      const Rational r{static_cast<std::uint64_t>(g.range(1, 1 << 20)), static_cast<std::uint64_t>(g.range(1, 1 << 16))};
      const std::uint64_t n = g.below(1ull << 32);
      const u128 prod = static_cast<u128>(n) * r.num;
      const std::uint64_t expect = static_cast<std::uint64_t>((prod + r.den - 1) / r.den);
      CHECK(r.ceil_mul(n) == expect);
    }
    CHECK(Rational{1, 4}.ceil_mul(1024) == 256);
    CHECK(rational_from_double(0.25) == Rational{16384, 65536});
  }
}
