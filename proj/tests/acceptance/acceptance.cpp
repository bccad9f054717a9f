// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "../support/gen.hpp"
#include "xheep/cli.hpp"
#include "xheep/energy.hpp"
#include "xheep/json_util.hpp"
#include "xheep/power.hpp"
#include "xheep/scenario.hpp"
#include "xheep/workload.hpp"

using namespace xheep;
using test::ScriptedMaster;

namespace {

constexpr double kExact = 1e-12;
constexpr double kFloorTolerance = 0.10;
constexpr double kFloorTarget = 3.0;
constexpr double kRatioTolerance = 0.10;
constexpr int kRatioCount = 12;
constexpr int kDmaDescriptors = 1000;
constexpr int kPowerCommands = 10000;
constexpr int kExitSamples = 10000;
constexpr double kSigmas = 3.0;
constexpr double kEntropyTolerance = 1e-12;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_s;
  std::function<Outcome()> run;
};

bool near(double a, double b, double tol = kExact) { return std::abs(a - b) <= tol; }

nlohmann::json cli_json(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  if (run_cli(args, out, err) != kExitOk) throw std::runtime_error(err.str());
  return nlohmann::json::parse(out.str());
}

const nlohmann::json& component(const nlohmann::json& list, const std::string& name) {
  for (const auto& c : list)
    if (c["name"] == name) return c;
  throw std::out_of_range(name);
}

Outcome static_area() {
  const nlohmann::json r = cli_json({"report-static", test::fixture("configs/default.json").string()});
  const auto& comps = r["area"]["components"];
  const std::map<std::string, double> expect{{"memory", 0.44}, {"ao_subsystem", 0.21}, {"peripheral_subsystem", 0.11},
                                             {"cpu", 0.18},    {"bus", 0.04},          {"debug", 0.02}};
  Outcome o;
  const double total = r["area"]["total_mm2"].get<double>();
  o.pass = near(total, 0.15);
  for (const auto& [name, share] : expect) o.pass = o.pass && near(component(comps, name)["share"].get<double>(), share);
  for (const auto& bank : component(comps, "memory")["banks"]) o.pass = o.pass && near(bank["share"].get<double>(), 0.22);
  o.detail = fmt::format("total {:.4f} mm2, memory {:.2f} (banks {:.2f}/{:.2f})", total,
                         component(comps, "memory")["share"].get<double>(),
                         component(comps, "memory")["banks"][0]["share"].get<double>(),
                         component(comps, "memory")["banks"][1]["share"].get<double>());
  return o;
}

Outcome static_leakage() {
  const nlohmann::json r = cli_json({"report-static", test::fixture("configs/default.json").string()});
  const auto& leak = r["leakage"];
  const auto& bank = component(leak["components"], "memory")["banks"][0];
  Outcome o;
  const double total = leak["total_uw"].get<double>();
  const double norm_sum = leak["normalized_share_sum"].get<double>();
  o.pass = near(total, 29.0) && near(bank["raw_share"].get<double>(), 0.42) && near(norm_sum, 1.0) &&
           bank.contains("normalized_share") && near(bank["raw_uw"].get<double>(), 0.42 * 29.0);
  o.detail = fmt::format("total {:.3f} uW, bank raw {:.2f} / normalized {:.4f}, normalized sum {:.12f}", total,
                         bank["raw_share"].get<double>(), bank["normalized_share"].get<double>(), norm_sum);
  return o;
}

struct WakeTimer : Component {
  explicit WakeTimer(PowerManager& pm) : power(pm) {}
  std::string_view name() const override { return "wake-timer"; }
  void handle(const Event&) override { power.route_interrupt(power.line(IrqSource::Timer)); }
  PowerManager& power;
};

Outcome deep_sleep() {
  const PlatformConfig c = default_config();
  Platform p(c);
  for (DomainId d : p.power().domains())
    if (p.power().gateable(d)) p.power().request_transition(d, PowerState::Off);
  p.engine().run();
  const Snapshot a = p.snapshot();
  WakeTimer timer(p.power());
  p.engine().schedule(Event{a.time + c.clock_hz / 1000, p.engine().add_component(timer), EventKind::Custom, 0});
  p.engine().run_until(a.time + c.clock_hz / 1000);
  bool all_off = true;
  for (DomainId d : p.power().domains())
    all_off = all_off && (p.power().gateable(d) ? p.power().state(d) == PowerState::Off : always_on(d));
  const Snapshot b = p.snapshot();
  const EnergyLedger l = p.energy(a, b, DynamicCostTable{}, LeakageModel::for_config(c));
  const double simulated_uw = l.leakage_j() / l.duration_s * 1e6;
  const LeakageFloor floor = deep_sleep_leakage(c);
  Outcome o;
  o.pass = all_off && l.duration_s > 0 && near(floor.raw_uw, 2.9) && std::abs(floor.raw_uw / kFloorTarget - 1) <= kFloorTolerance &&
           std::abs(simulated_uw / kFloorTarget - 1) <= kFloorTolerance && near(simulated_uw, floor.normalized_uw, 1e-9);
  o.detail = fmt::format("raw {:.4f} uW, simulated 1 ms with gateable domains Off (normalized) {:.4f} uW, target 3 uW +/- 10%",
                         floor.raw_uw, simulated_uw);
  return o;
}

Outcome case_study() {
  struct Expect {
    std::string scenario;
    std::map<std::string, std::pair<double, double>> runs;
  };
  const std::vector<Expect> expect{
      {"transformer-ee", {{"cpu-ee", {1.6, 1.6}}, {"accel-noee", {3.4, 2.2}}, {"accel-ee", {5.4, 3.6}}}},
      {"cnn-ee", {{"cpu-ee", {2.1, 1.6}}, {"accel-noee", {3.4, 2.2}}, {"accel-ee", {7.3, 3.4}}}}};
  Outcome o;
  double worst = 0.0;
  int checked = 0;
  std::string worst_name;
  for (const Expect& e : expect) {
    const Scenario s = load_scenario(test::fixture("scenarios/" + e.scenario + ".json"));
    RunOptions opts;
    opts.baseline = "cpu-noee";
    const nlohmann::json report = run_scenario(s, opts);
    for (const auto& row : report["ratios"]["rows"]) {
      auto it = e.runs.find(row["run"].get<std::string>());
      if (it == e.runs.end()) continue;
      for (const auto& [key, target] : {std::pair{"speedup", it->second.first}, {"energy_gain", it->second.second}}) {
        const double dev = row[key].get<double>() / target - 1.0;
        if (std::abs(dev) > std::abs(worst)) {
          worst = dev;
          worst_name = fmt::format("{} {} {}", e.scenario, it->first, key);
        }
        o.pass = o.pass && std::abs(dev) <= kRatioTolerance;
        ++checked;
      }
    }
  }
  if (checked != kRatioCount) o.pass = false;
  o.detail = fmt::format("{} ratios, worst {} at {:+.2f}%", checked, worst_name, 100 * worst);
  return o;
}

Outcome dma_oracle() {
  const PlatformConfig c = default_config();
  test::Gen g(2026);
  std::uint64_t elements = 0;
  int two_d = 0, negative = 0;
  for (int k = 0; k < kDmaDescriptors; ++k) {
    Platform p(c);
    p.dma().set_recording(true);
    const auto src = g.bytes(c.bank_size_bytes);
    p.load(0, src);
    const std::uint32_t ch = static_cast<std::uint32_t>(g.below(c.dma_channel_count));
    const DmaDescriptor d = test::random_descriptor(g, c, ch, 0, 1);
    two_d += d.outer_count > 1;
    negative += d.src_inner_stride < 0 || d.src_outer_stride < 0 || d.dst_inner_stride < 0 || d.dst_outer_stride < 0;
    const auto oracle = test::brute_force_sequence(d);
    p.dma().configure_and_start(d);
    p.engine().run();
    if (p.dma().status(ch) != ChannelStatus::Done || p.dma().observed(ch) != oracle || address_sequence(d) != oracle)
      return {false, fmt::format("descriptor {} diverged", k)};
    for (const AddressPair& a : oracle) {
      const auto got = p.dump(a.dst, d.element_size_bytes);
      if (!std::equal(got.begin(), got.end(), src.begin() + a.src))
        return {false, fmt::format("descriptor {} contents differ at 0x{:08x}", k, a.dst)};
    }
    elements += oracle.size();
  }
  return {two_d > 0 && negative > 0,
          fmt::format("{} descriptors ({} 2D, {} with negative strides), {} elements", kDmaDescriptors, two_d, negative,
                      elements)};
}

PlatformConfig four_banks(BusTopology t) {
  PlatformConfig c = default_config();
  c.bus_topology = t;
  c.bank_count = 4;
  c.bank_size_bytes = 8 * 1024;
  return c;
}

std::vector<MasterId> masters() {
  return {MasterId::cpu_instr(), MasterId::cpu_data(),       MasterId::dma(0), MasterId::dma(1),
          MasterId::dma(2),      MasterId::accelerator(0), MasterId::debug()};
}

template <class T>
void shuffle(std::vector<T>& v, test::Gen& g) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[g.below(i)]);
}

Outcome bus_laws() {
  test::Gen g(7);
  int cases[3] = {0, 0, 0};
  for (int iter = 0; iter < 300; ++iter) {
    const PlatformConfig c = four_banks(BusTopology::FullCrossbar);
    Platform together(c);
    auto ms = masters();
    shuffle(ms, g);
    std::vector<std::size_t> slaves(together.map().size());
    for (std::size_t i = 0; i < slaves.size(); ++i) slaves[i] = i;
    shuffle(slaves, g);
    const std::size_t n = g.range(1, std::min(ms.size(), slaves.size()));
    std::vector<std::vector<ScriptedMaster::Step>> scripts(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::int64_t steps = g.range(1, 5);
      for (std::int64_t s = 0; s < steps; ++s)
        scripts[k].push_back({together.map()[slaves[k]].base + 4 * static_cast<std::uint32_t>(g.below(32)),
                              g.coin() ? AccessKind::Read : AccessKind::Write});
    }
    std::vector<std::unique_ptr<ScriptedMaster>> live;
    for (std::size_t k = 0; k < n; ++k) live.push_back(std::make_unique<ScriptedMaster>(together.bus(), ms[k], scripts[k]));
    for (auto& m : live) m->start();
    together.engine().run();
    for (std::size_t k = 0; k < n; ++k) {
      Platform alone(c);
      ScriptedMaster m(alone.bus(), ms[k], scripts[k]);
      m.start();
      alone.engine().run();
      for (std::size_t s = 0; s < scripts[k].size(); ++s) {
        if (m.responses[s].complete_cycle != live[k]->responses[s].complete_cycle ||
            *m.responses[s].txn.grant_cycle != *live[k]->responses[s].txn.grant_cycle)
          return {false, fmt::format("crossbar interference in case {}", iter)};
      }
    }
    ++cases[0];
  }
  for (int iter = 0; iter < 300; ++iter) {
    Platform p(four_banks(BusTopology::OneAtATime));
    auto ms = masters();
    shuffle(ms, g);
    const std::size_t n = g.range(1, ms.size());
    std::vector<std::unique_ptr<ScriptedMaster>> live;
    for (std::size_t k = 0; k < n; ++k)
      live.push_back(std::make_unique<ScriptedMaster>(
          p.bus(), ms[k], std::vector<ScriptedMaster::Step>{{p.map()[g.below(p.map().size())].base}}));
    for (auto& m : live) m->start();
    p.engine().run();
    std::set<SimTime> grants;
    for (auto& m : live) grants.insert(*m->responses.at(0).txn.grant_cycle);
    if (grants.size() != n || *grants.rbegin() != n - 1)
      return {false, fmt::format("one-at-a-time used {} grant cycles for {} masters", *grants.rbegin() + 1, n)};
    ++cases[1];
  }
  for (int iter = 0; iter < 300; ++iter) {
    Platform p(four_banks(g.coin() ? BusTopology::OneAtATime : BusTopology::FullCrossbar));
    auto ms = masters();
    shuffle(ms, g);
    const std::size_t k = g.range(2, ms.size());
    const std::size_t total = g.range(k, 300);
    const std::uint32_t base = p.map()[*p.map().index_of(RegionKind::MemoryBank, 2)].base;
    std::vector<std::unique_ptr<ScriptedMaster>> live;
    for (std::size_t m = 0; m < k; ++m)
      live.push_back(std::make_unique<ScriptedMaster>(
          p.bus(), ms[m], std::vector<ScriptedMaster::Step>(total, {base + 4 * static_cast<std::uint32_t>(m)})));
    std::map<std::uint32_t, std::size_t> counts;
    std::size_t seen = 0;
    p.bus().set_grant_observer([&](const BusTransaction& t, std::size_t) {
      if (seen++ < total) ++counts[t.master.key()];
    });
    for (auto& m : live) m->start();
    p.engine().run();
    for (const auto& [_, count] : counts)
      if (count < total / k || count > (total + k - 1) / k)
        return {false, fmt::format("unfair grant count {} of {} over {} masters", count, total, k)};
    if (counts.size() != k) return {false, "a master was starved"};
    ++cases[2];
  }
  return {true, fmt::format("non-interference {} / serialization {} / fairness {} randomized cases", cases[0], cases[1],
                            cases[2])};
}

Outcome power_semantics() {
  test::Gen g(99);
  for (int iter = 0; iter < 50; ++iter) {
    Platform p(default_config());
    const auto data = g.bytes(1024);
    p.load(0x8000, data);
    p.power().request_transition(DomainId::bank(1), PowerState::Retentive);
    p.engine().run();
    p.cpu().push(cpu_op::Access{AccessKind::Read, 0x8000 + 4 * static_cast<std::uint32_t>(g.below(256)), 4, 0, false});
    p.run();
    if (p.cpu().accesses().back().response.status != BusStatus::SlaveError) return {false, "retentive bank answered"};
    p.power().request_transition(DomainId::bank(1), PowerState::On);
    p.engine().run();
    if (p.dump(0x8000, 1024) != data) return {false, "retention lost contents"};
    p.power().request_transition(DomainId::bank(1), PowerState::Off);
    p.engine().run();
    p.cpu().push(cpu_op::Access{AccessKind::Read, 0x8000, 4, 0, false});
    p.run();
    if (p.cpu().accesses().back().response.status != BusStatus::SlaveError) return {false, "off bank answered"};
    p.power().request_transition(DomainId::bank(1), PowerState::On);
    p.engine().run();
    if (p.dump(0x8000, 1024) != std::vector<std::uint8_t>(1024, 0)) return {false, "off->on did not zero-fill"};
  }

  PlatformConfig c = default_config();
  c.bank_count = 4;
  c.bank_size_bytes = 8 * 1024;
  Platform p(c);
  std::vector<DomainId> domains;
  for (DomainId d : p.power().domains())
    if (d.kind != DomainKind::Cpu) domains.push_back(d);
  const PowerState states[] = {PowerState::On, PowerState::ClockGated, PowerState::Retentive, PowerState::Off};
  int rejected = 0;
  for (int cmd = 0; cmd < kPowerCommands; ++cmd) {
    const DomainId d = g.pick(domains);
    try {
      p.power().request_transition(d, states[g.below(4)]);
    } catch (const IllegalTransition&) {
      ++rejected;
    }
    p.engine().run_until(p.engine().now() + g.below(4));
    for (DomainId a : p.power().domains())
      if (always_on(a) && p.power().state(a) != PowerState::On)
        return {false, fmt::format("{} left On after command {}", a.to_string(), cmd)};
  }
  return {true, fmt::format("50 retention/zero-fill round trips, {} commands ({} rejected)", kPowerCommands, rejected)};
}

Outcome early_exit() {
  const ModelSpec tf = load_model(test::fixture("models/transformer-ee.json"));
  const PlatformConfig c = load_config(test::fixture("configs/case-study.json"));
  Outcome o;
  std::string rates;
  for (double p : {0.73, 0.82}) {
    Platform platform(c);
    BenchmarkOptions opt;
    opt.samples = kExitSamples;
    opt.seed = 1;
    const ExitOutcome r = run_benchmark(tf, policy::FixedRate{p}, opt, platform);
    const double bound = kSigmas * std::sqrt(p * (1 - p) / kExitSamples);
    o.pass = o.pass && std::abs(r.exit_rate - p) <= bound;
    rates += fmt::format("p={} -> {:.4f} (bound {:.4f}); ", p, r.exit_rate, bound);
  }
  o.pass = o.pass && normalized_entropy(std::vector<double>{1, 0, 0, 0}) == 0.0 &&
           normalized_entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == 1.0;
  test::Gen g(3);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto p = g.distribution(g.range(2, 32));
    long double h = 0.0L;
    for (double x : p)
      if (x > 0) h -= static_cast<long double>(x) * std::log(static_cast<long double>(x));
    const double oracle = static_cast<double>(h / std::log(static_cast<long double>(p.size())));
    worst = std::max(worst, std::abs(normalized_entropy(p) - oracle));
  }
  o.pass = o.pass && worst <= kEntropyTolerance;
  o.detail = rates + fmt::format("entropy anchors exact, oracle max error {:.1e}", worst);
  return o;
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path();
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(test::fixture("scenarios"))) {
    const std::string n = e.path().filename().string();
    if (e.path().extension() == ".json" && n[0] != '.') names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  for (const std::string& n : names) {
    std::string reports[2], traces[2];
    for (int k = 0; k < 2; ++k) {
      const auto rep = dir / fmt::format("xheep-acc-{}-{}.json", n, k);
      const auto tr = dir / fmt::format("xheep-acc-{}-{}.csv", n, k);
      std::ostringstream out, err;
      if (run_cli({"run", test::fixture("scenarios/" + n + ".json").string(), "--out", rep.string(), "--trace",
                   tr.string(), "--seed", "17"},
                  out, err) != kExitOk)
        return {false, n + ": " + err.str()};
      reports[k] = json_util::without_metadata(json_util::read_file(rep)).dump();
      std::ifstream f(tr, std::ios::binary);
      traces[k].assign(std::istreambuf_iterator<char>(f), {});
      std::filesystem::remove(rep);
      std::filesystem::remove(tr);
    }
    if (reports[0] != reports[1] || traces[0] != traces[1]) return {false, n + " differs between runs"};
  }
  return {true, fmt::format("{} scenarios, reports and traces byte-identical", names.size())};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "static area reproduction", 1.0, static_area},
      {2, "static leakage reproduction", 1.0, static_leakage},
      {3, "deep-sleep floor", 1.0, deep_sleep},
      {4, "case-study ratios", 30.0, case_study},
      {5, "DMA oracle equivalence", 60.0, dma_oracle},
      {6, "bus topology laws", 60.0, bus_laws},
      {7, "power-state semantics", 60.0, power_semantics},
      {8, "early-exit statistics", 30.0, early_exit},
      {9, "determinism", 30.0, determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    if (!in_time) o.detail += fmt::format("; over the {:.0f} s limit", c.limit_s);
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << fmt::format("{} [{}] {}: {} ({:.3f} s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail, secs);
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
