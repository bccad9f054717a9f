// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <doctest.h>

#include "../support/gen.hpp"
#include "xheep/error.hpp"
#include "xheep/memory.hpp"

using namespace xheep;

namespace {

void settle(MemoryBank& b, PowerState target, SimTime& now, const TimingConfig& t) {
  now = b.begin_transition(target, now, t);
  b.complete_transition(now);
}

}  // namespace

TEST_SUITE("memory") {
  TEST_CASE("read after write") {
    MemoryBank b(0, 1024);
    CHECK(b.access(0, AccessKind::Write, 4, 0xDEADBEEF).status == BusStatus::Ok);
    const AccessResult r = b.access(0, AccessKind::Read, 4, 0);
    CHECK(r.status == BusStatus::Ok);
    CHECK(r.data == 0xDEADBEEF);
  }

  TEST_CASE("little-endian sub-word access") {
    MemoryBank b(0, 1024);
    b.access(8, AccessKind::Write, 4, 0x11223344);
    CHECK(b.access(8, AccessKind::Read, 1, 0).data == 0x44);
    CHECK(b.access(10, AccessKind::Read, 2, 0).data == 0x1122);
    b.access(9, AccessKind::Write, 1, 0xAB);
    CHECK(b.read_word(8) == 0x1122AB44);
  }

  TEST_CASE("out-of-range offset aborts") {
    MemoryBank b(0, 256);
    CHECK_THROWS_AS(b.access(254, AccessKind::Read, 4, 0), SimulationAbort);
  }

  TEST_CASE("retentive bank rejects access") {
    const TimingConfig t;
    MemoryBank b(1, 1024);
    SimTime now = 0;
    settle(b, PowerState::Retentive, now, t);
    CHECK(b.access(0, AccessKind::Read, 4, 0).status == BusStatus::SlaveError);
  }

  TEST_CASE("off then on reads zero") {
    const TimingConfig t;
    MemoryBank b(1, 1024);
    b.access(0, AccessKind::Write, 4, 0xCAFE);
    SimTime now = 0;
    settle(b, PowerState::Off, now, t);
    settle(b, PowerState::On, now, t);
    CHECK(b.access(0, AccessKind::Read, 4, 0).data == 0);
  }

  TEST_CASE("transition timing") {
    const TimingConfig t;
    MemoryBank b(1, 1024);
    b.write_word(0, 42);
    CHECK(b.begin_transition(PowerState::Retentive, 5, t) == 6);
    CHECK(b.power_state() == PowerState::On);
    b.complete_transition(6);
    CHECK(b.power_state() == PowerState::Retentive);
    CHECK(b.read_word(0) == 42);

    MemoryBank off(2, 1024);
    SimTime now = 0;
    settle(off, PowerState::Off, now, t);
    CHECK(off.begin_transition(PowerState::On, 20, t) == 30);

    MemoryBank same(3, 1024);
    CHECK(same.begin_transition(PowerState::On, 7, t) == 7);
  }

  TEST_CASE("compute mode hides the bank from the bus") {
    MemoryBank b(0, 1024);
    b.set_mode(BankMode::ComputeMode);
    CHECK(b.access(0, AccessKind::Read, 4, 0).status == BusStatus::SlaveError);
    b.set_mode(BankMode::MemoryMode);
    CHECK(b.access(0, AccessKind::Read, 4, 0).status == BusStatus::Ok);
  }

  TEST_CASE("state semantics over random sequences (property)") {
    const TimingConfig t;
    test::Gen g(31);
    const PowerState states[] = {PowerState::On, PowerState::ClockGated, PowerState::Retentive, PowerState::Off};
    for (int iter = 0; iter < 200; ++iter) {
      MemoryBank b(0, 512);
      std::vector<std::uint8_t> model(512, 0);
      SimTime now = 0;
      for (int step = 0; step < 50; ++step) {
        if (b.power_state() == PowerState::On && g.coin()) {
          const std::uint32_t off = static_cast<std::uint32_t>(g.below(128) * 4);
          const std::uint32_t v = static_cast<std::uint32_t>(g.bits());
          REQUIRE(b.access(off, AccessKind::Write, 4, v).status == BusStatus::Ok);
          for (int i = 0; i < 4; ++i) model[off + i] = static_cast<std::uint8_t>(v >> (8 * i));
          continue;
        }
        const PowerState target = states[g.below(4)];
        settle(b, target, now, t);
        if (target == PowerState::Off) std::fill(model.begin(), model.end(), 0);
        const std::uint32_t off = static_cast<std::uint32_t>(g.below(128) * 4);
        const AccessResult r = b.access(off, AccessKind::Read, 4, 0);
        if (target == PowerState::On) {
          CHECK(r.status == BusStatus::Ok);
          std::uint32_t expect = 0;
          for (int i = 0; i < 4; ++i) expect |= std::uint32_t(model[off + i]) << (8 * i);
          CHECK(r.data == expect);
        } else {
          CHECK(r.status == BusStatus::SlaveError);
        }
        CHECK(std::equal(model.begin(), model.end(), b.bytes().begin()));
      }
    }
  }

  TEST_CASE("residency accounts every cycle") {
    const TimingConfig t;
    MemoryBank b(0, 256);
    b.complete_transition(b.begin_transition(PowerState::Retentive, 10, t));
    const StateCycles r = b.residency(100);
    CHECK(r[std::size_t(PowerState::On)] == 11);
    CHECK(r[std::size_t(PowerState::Retentive)] == 89);
  }
}
