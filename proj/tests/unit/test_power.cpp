// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <doctest.h>

#include "../support/gen.hpp"
#include "xheep/error.hpp"

using namespace xheep;

namespace {

struct EventLog : TraceSink {
  void record(SimTime cycle, std::string_view component, std::string_view payload) override {
    lines.push_back({cycle, std::string(component) + " " + std::string(payload)});
  }
  std::optional<SimTime> first(std::string_view needle) const {
    for (const auto& [t, s] : lines)
      if (s.find(needle) != std::string::npos) return t;
    return std::nullopt;
  }
  std::vector<std::pair<SimTime, std::string>> lines;
};

}  // namespace

TEST_SUITE("power") {
  TEST_CASE("clock-gated core accrues no dynamic energy") {
    Platform p(default_config());
    const SimTime done = p.power().request_transition(DomainId::cpu(), PowerState::ClockGated);
    CHECK(done == 1);
    p.engine().run();
    CHECK(p.power().state(DomainId::cpu()) == PowerState::ClockGated);
    const Snapshot a = p.snapshot();
    p.engine().run_until(300);
    const Snapshot b = p.snapshot();
    CHECK(p.energy(a, b, DynamicCostTable{}, LeakageModel{}).dynamic_j() == 0.0);
  }

  TEST_CASE("always-on domains refuse to leave On") {
    Platform p(default_config());
    CHECK_THROWS_AS(p.power().request_transition(DomainId::ao(), PowerState::Off), IllegalTransition);
    CHECK_THROWS_AS(p.power().request_transition(DomainId::bus(), PowerState::ClockGated), IllegalTransition);
    CHECK_THROWS_AS(p.power().request_transition(DomainId::debug(), PowerState::Retentive), IllegalTransition);
    CHECK_THROWS_AS(p.power().request_transition(DomainId::bank(7), PowerState::Off), IllegalTransition);
    CHECK_NOTHROW(p.power().request_transition(DomainId::ao(), PowerState::On));
  }

  TEST_CASE("bank transitions follow the memory rule") {
    Platform p(default_config());
    p.load(0x8000, std::vector<std::uint8_t>{9, 8, 7, 6});
    CHECK(p.power().request_transition(DomainId::bank(1), PowerState::Retentive) == 1);
    p.engine().run();
    CHECK(p.power().state(DomainId::bank(1)) == PowerState::Retentive);
    CHECK(p.bank(1).power_state() == PowerState::Retentive);
    CHECK(p.dump(0x8000, 4) == std::vector<std::uint8_t>{9, 8, 7, 6});
  }

  TEST_CASE("non-gateable bank") {
    PlatformConfig c = default_config();
    c.bank_gateable = {false, true};
    Platform p(c);
    CHECK_FALSE(p.power().gateable(DomainId::bank(0)));
    CHECK_THROWS_AS(p.power().request_transition(DomainId::bank(0), PowerState::Retentive), IllegalTransition);
  }

  TEST_CASE("dma completion wakes a sleeping core one cycle later") {
    Platform p(default_config());
    EventLog log;
    p.engine().set_trace(&log);
    const InterruptLine dma0 = p.power().line(IrqSource::DmaChannel, 0);
    p.cpu().push(cpu_op::Call{[&] {
      DmaDescriptor d;
      d.dst_base = 0x8000;
      d.inner_count = 4;
      p.dma().configure_and_start(d);
    }});
    p.cpu().push(cpu_op::WaitForInterrupt{dma0.id});
    p.run();
    const auto done = log.first("DmaChannelDone");
    const auto resume = log.first("CpuResume");
    REQUIRE(done);
    REQUIRE(resume);
    CHECK(*resume == *done + 1);
    CHECK(p.power().resume_count() == 1);
  }

  TEST_CASE("interrupt while running only sets the flag") {
    Platform p(default_config());
    const InterruptLine timer = p.power().line(IrqSource::Timer);
    p.power().route_interrupt(timer);
    p.engine().run();
    CHECK(p.power().pending(timer.id));
    CHECK(p.power().resume_count() == 0);
  }

  TEST_CASE("two interrupts in one cycle give one resume") {
    Platform p(default_config());
    const InterruptLine timer = p.power().line(IrqSource::Timer);
    const InterruptLine ext = p.power().line(IrqSource::External);
    p.cpu().push(cpu_op::WaitForInterrupt{});
    p.engine().run_until(5);
    REQUIRE(p.power().cpu_sleeping());
    p.power().route_interrupt(timer);
    p.power().route_interrupt(ext);
    p.engine().run();
    CHECK(p.power().resume_count() == 1);
    CHECK(p.power().pending(timer.id) != p.power().pending(ext.id));
  }

  TEST_CASE("wait on an absent interrupt aborts the run") {
    Platform p(default_config());
    p.cpu().push(cpu_op::WaitForInterrupt{p.power().line(IrqSource::External).id});
    CHECK_THROWS_AS(p.run(), SimulationAbort);
  }

  TEST_CASE("static leakage anchors") {
    const PlatformConfig c = default_config();
    const LeakageFloor floor = deep_sleep_leakage(c);
    CHECK(floor.raw_uw == doctest::Approx(2.9).epsilon(1e-12));
    CHECK(floor.normalized_uw == doctest::Approx(2.9 / 1.03).epsilon(1e-12));
    CHECK(leakage_power_uw(c, {}) == doctest::Approx(29.0).epsilon(1e-12));

    std::map<DomainId, PowerState> retained;
    for (DomainId d : platform_domains(c)) {
      if (!domain_gateable(d, c)) continue;
      retained[d] = d.kind == DomainKind::Bank ? PowerState::Retentive : PowerState::Off;
    }
    CHECK(leakage_power_uw(c, retained, LeakageModel{}, ShareBasis::Raw) ==
          doctest::Approx(2.9 + 0.25 * 24.36).epsilon(1e-9));
  }

  TEST_CASE("retention round trip, zero fill and gated access (property)") {
    test::Gen g(51);
    for (int iter = 0; iter < 100; ++iter) {
      Platform p(default_config());
      const auto data = g.bytes(256);
      const std::uint32_t base = 0x8000 + static_cast<std::uint32_t>(g.below(100) * 256);
      p.load(base, data);
      p.power().request_transition(DomainId::bank(1), PowerState::Retentive);
      p.engine().run();
      p.cpu().push(cpu_op::Access{AccessKind::Read, base, 4, 0, false});
      p.run();
      CHECK(p.cpu().accesses().back().response.status == BusStatus::SlaveError);
      p.power().request_transition(DomainId::bank(1), PowerState::On);
      p.engine().run();
      CHECK(p.dump(base, 256) == data);
      p.power().request_transition(DomainId::bank(1), PowerState::Off);
      p.engine().run();
      p.cpu().push(cpu_op::Access{AccessKind::Read, base, 4, 0, false});
      p.run();
      CHECK(p.cpu().accesses().back().response.status == BusStatus::SlaveError);
      p.power().request_transition(DomainId::bank(1), PowerState::On);
      p.engine().run();
      CHECK(p.dump(base, 256) == std::vector<std::uint8_t>(256, 0));
    }
  }

  TEST_CASE("always-on domains never leave On under random commands (property)") {
    PlatformConfig c = default_config();
    c.bank_count = 4;
    c.bank_size_bytes = 8 * 1024;
    c.bank_gateable = {true, false, true, true};
    Platform p(c);
    std::vector<DomainId> domains;
    for (DomainId d : p.power().domains())
      if (d.kind != DomainKind::Cpu) domains.push_back(d);
    domains.push_back(DomainId::bank(9));
    const PowerState states[] = {PowerState::On, PowerState::ClockGated, PowerState::Retentive, PowerState::Off};
    test::Gen g(52);
    std::uint64_t illegal = 0;
    for (int cmd = 0; cmd < 10000; ++cmd) {
      const DomainId d = g.pick(domains);
      const PowerState s = states[g.below(4)];
      const bool may_fail = !p.power().exists(d) || (!p.power().gateable(d) && s != PowerState::On);
      if (may_fail) {
        CHECK_THROWS_AS(p.power().request_transition(d, s), IllegalTransition);
        ++illegal;
      } else {
        CHECK_NOTHROW(p.power().request_transition(d, s));
      }
      p.engine().run_until(p.engine().now() + g.below(4));
      for (DomainId a : p.power().domains()) {
        if (!p.power().gateable(a) && a.kind != DomainKind::Cpu) REQUIRE(p.power().state(a) == PowerState::On);
      }
    }
    CHECK(illegal > 0);
  }
}
