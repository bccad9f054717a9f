// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <doctest.h>

#include <sstream>

#include "../support/gen.hpp"
#include "xheep/error.hpp"
#include "xheep/sim.hpp"

using namespace xheep;

namespace {

struct Recorder : Component {
  explicit Recorder(std::string n, std::vector<std::pair<SimTime, std::string>>& log) : name_(std::move(n)), log_(log) {}
  std::string_view name() const override { return name_; }
  void handle(const Event& e) override {
    log_.push_back({e.time, name_ + ":" + std::to_string(e.tag)});
    if (on_event) on_event(e);
  }
  std::string name_;
  std::vector<std::pair<SimTime, std::string>>& log_;
  std::function<void(const Event&)> on_event;
};

}  // namespace

TEST_SUITE("sim-core") {
  TEST_CASE("delayed event is delivered at its time") {
    Engine engine;
    std::vector<std::pair<SimTime, std::string>> log;
    Recorder a("a", log);
    const ComponentId id = engine.add_component(a);
    engine.schedule(Event{3, id, EventKind::Custom, 0});
    a.on_event = [&](const Event& e) {
      if (e.tag == 0) engine.schedule_in(5, id, EventKind::Custom, 1);
    };
    engine.run();
    REQUIRE(log.size() == 2);
    CHECK(log[1].first == 8);
  }

  TEST_CASE("same-time events follow registration order") {
    Engine engine;
    std::vector<std::pair<SimTime, std::string>> log;
    Recorder a("a", log), b("b", log);
    const ComponentId ia = engine.add_component(a);
    const ComponentId ib = engine.add_component(b);
    engine.schedule(Event{4, ib, EventKind::Custom, 0});
    engine.schedule(Event{4, ia, EventKind::Custom, 0});
    engine.run();
    REQUIRE(log.size() == 2);
    CHECK(log[0].second == "a:0");
    CHECK(log[1].second == "b:0");
  }

  TEST_CASE("late phase runs after normal components") {
    Engine engine;
    std::vector<std::pair<SimTime, std::string>> log;
    Recorder late("late", log), a("a", log);
    const ComponentId il = engine.add_component(late, Phase::Late);
    const ComponentId ia = engine.add_component(a);
    engine.schedule(Event{1, il, EventKind::Custom, 0});
    engine.schedule(Event{1, ia, EventKind::Custom, 0});
    engine.run();
    CHECK(log[0].second == "a:0");
    CHECK(log[1].second == "late:0");
  }

  TEST_CASE("scheduling in the past aborts") {
    Engine engine;
    std::vector<std::pair<SimTime, std::string>> log;
    Recorder a("a", log);
    const ComponentId id = engine.add_component(a);
    engine.schedule(Event{10, id, EventKind::Custom, 0});
    engine.run();
    CHECK(engine.now() == 10);
    CHECK_THROWS_AS(engine.schedule(Event{9, id, EventKind::Custom, 0}), SimulationAbort);
  }

  TEST_CASE("run_until limits") {
    std::vector<std::pair<SimTime, std::string>> log;
    {
      Engine engine;
      const RunSummary s = engine.run_until(100);
      CHECK(s.final_time == 0);
      CHECK(s.events_processed == 0);
    }
    {
      Engine engine;
      Recorder a("a", log);
      engine.schedule(Event{10, engine.add_component(a), EventKind::Custom, 0});
      CHECK(engine.run_until(100).final_time == 10);
    }
    {
      Engine engine;
      Recorder a("a", log);
      engine.schedule(Event{200, engine.add_component(a), EventKind::Custom, 0});
      const RunSummary s = engine.run_until(100);
      CHECK(s.final_time == 100);
      CHECK(s.events_processed == 0);
      CHECK(engine.pending_events() == 1);
    }
  }

  TEST_CASE("delivery order is (time, component, insertion) (property)") {
    test::Gen g(5);
    for (int iter = 0; iter < 200; ++iter) {
      Engine engine;
      std::vector<std::pair<SimTime, std::string>> log;
      std::vector<std::unique_ptr<Recorder>> comps;
      const int n = static_cast<int>(g.range(1, 5));
      for (int i = 0; i < n; ++i) {
        comps.push_back(std::make_unique<Recorder>(std::string(1, char('a' + i)), log));
        engine.add_component(*comps.back());
      }
      struct Item {
        SimTime t;
        int comp;
        std::uint64_t seq;
      };
      std::vector<Item> items;
      const int events = static_cast<int>(g.range(1, 40));
      for (int k = 0; k < events; ++k) {
        const Item it{static_cast<SimTime>(g.below(10)), static_cast<int>(g.below(n)), std::uint64_t(k)};
        items.push_back(it);
        engine.schedule(Event{it.t, ComponentId(it.comp), EventKind::Custom, it.seq});
      }
      engine.run();
      std::stable_sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
        return std::tie(x.t, x.comp, x.seq) < std::tie(y.t, y.comp, y.seq);
      });
      REQUIRE(log.size() == items.size());
      for (std::size_t k = 0; k < items.size(); ++k) {
        CHECK(log[k].first == items[k].t);
        CHECK(log[k].second == std::string(1, char('a' + items[k].comp)) + ":" + std::to_string(items[k].seq));
      }
    }
  }

  TEST_CASE("csv trace line format") {
    std::ostringstream out;
    CsvTrace trace(out);
    Engine engine;
    engine.set_trace(&trace);
    std::vector<std::pair<SimTime, std::string>> log;
    Recorder a("unit", log);
    engine.schedule(Event{7, engine.add_component(a), EventKind::DmaChannelDone, 3});
    engine.run();
    CHECK(out.str() == "7,unit,DmaChannelDone(3)\n");
  }
}
