// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>

#include <fmt/format.h>

#include "xheep/error.hpp"
#include "xheep/json_util.hpp"
#include "xheep/platform.hpp"

namespace xheep {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

using json_util::ObjectReader;

bool in_memory(const AddressMap& map, std::uint32_t address, std::uint64_t length) {
  if (length == 0) return true;
  if (std::uint64_t(address) + length > 0x1'0000'0000ull) return false;
  for (std::uint64_t a = address; a < std::uint64_t(address) + length;) {
    auto where = map.find(static_cast<std::uint32_t>(a));
    if (!where || map[where->index].kind != RegionKind::MemoryBank) return false;
    a = map[where->index].end();
  }
  return true;
}

std::vector<std::string> line_names(const PlatformConfig& c) {
  std::vector<std::string> out;
  for (std::uint64_t k = 0; k < c.dma_channel_count; ++k) out.push_back(fmt::format("dma{}", k));
  for (std::uint64_t s = 0; s < c.accelerator_slots; ++s) out.push_back(fmt::format("accel{}", s));
  out.push_back("timer");
  out.push_back("external");
  return out;
}

std::string check_line(const PlatformConfig& c, const std::string& name, const std::string& field) {
  const auto names = line_names(c);
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw ConfigError(field, fmt::format("no interrupt line '{}'", name));
  return name;
}

InterruptLine resolve_line(const PowerManager& power, const std::string& name) {
  for (const InterruptLine& l : power.lines()) {
    if (l.to_string() == name) return l;
  }
  throw SimulationAbort(fmt::format("no interrupt line '{}'", name));
}

const AcceleratorConfig* attached(const PlatformConfig& c, std::uint32_t slot) {
  for (const auto& a : c.accelerators) {
    if (a.slot == slot) return &a;
  }
  return nullptr;
}

std::uint32_t narrow(std::uint64_t v, const std::string& field) {
  if (v > 0xFFFF'FFFFull) throw ConfigError(field, "value exceeds 32 bits");
  return static_cast<std::uint32_t>(v);
}

std::vector<std::uint8_t> parse_bytes(ObjectReader& r, const std::filesystem::path& dir) {
  std::vector<std::uint8_t> out;
  int forms = 0;
  if (r.has("file")) {
    ++forms;
    const std::filesystem::path path = dir / r.require_string("file");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(r.field("file"), fmt::format("cannot read {}", path.string()));
    out.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  if (r.has("bytes")) {
    ++forms;
    for (const auto& v : r.raw("bytes")) {
      if (!v.is_number_unsigned() || v.get<std::uint64_t>() > 0xFF) throw ConfigError(r.field("bytes"), "expected bytes");
      out.push_back(static_cast<std::uint8_t>(v.get<std::uint64_t>()));
    }
  }
  if (r.has("words")) {
    ++forms;
    for (const auto& v : r.raw("words")) {
      if (!v.is_number_unsigned() || v.get<std::uint64_t>() > 0xFFFF'FFFFull)
        throw ConfigError(r.field("words"), "expected 32-bit words");
      const auto w = static_cast<std::uint32_t>(v.get<std::uint64_t>());
      for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
    }
  }
  if (r.has("random")) {
    ++forms;
    ObjectReader rr(r.raw("random"), r.field("random"));
    const std::uint64_t n = rr.require_u64("length");
    const std::uint64_t seed = rr.u64("seed").value_or(0);
    rr.finish();
    if (n > (1u << 24)) throw ConfigError(r.field("random"), "length too large");
    SampleRng rng(seed);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(rng.bits()));
  }
  if (forms != 1) throw ConfigError(r.field("bytes"), "give exactly one of bytes, words, random, file");
  return out;
}

Directive parse_directive(const nlohmann::json& j, const std::string& where, const Scenario& s, const AddressMap& map,
                          std::set<std::string>& run_names) {
  ObjectReader r(j, where);
  const std::string op = r.require_string("op");
  const PlatformConfig& c = s.config;
  const std::filesystem::path dir = s.file.parent_path();
  Directive out;

  if (op == "load") {
    directive::Load d;
    d.address = r.require_address("address");
    d.bytes = parse_bytes(r, dir);
    if (!in_memory(map, d.address, d.bytes.size()))
      throw ConfigError(r.field("address"), "load range is not inside the memory banks");
    out = std::move(d);
  } else if (op == "dump") {
    directive::Dump d;
    d.name = r.require_string("name");
    d.address = r.require_address("address");
    d.length = narrow(r.require_u64("length"), r.field("length"));
    if (auto f = r.string("file")) d.file = dir / *f;
    if (!in_memory(map, d.address, d.length))
      throw ConfigError(r.field("address"), "dump range is not inside the memory banks");
    out = std::move(d);
  } else if (op == "read" || op == "write") {
    directive::Access d;
    d.kind = op == "read" ? AccessKind::Read : AccessKind::Write;
    d.address = r.require_address("address");
    if (auto w = r.u64("width")) {
      if (*w != 1 && *w != 2 && *w != 4) throw ConfigError(r.field("width"), "must be 1, 2 or 4");
      d.width = static_cast<std::uint8_t>(*w);
    }
    if (d.kind == AccessKind::Write) d.value = r.require_address("value");
    out = d;
  } else if (op == "power") {
    directive::Power d;
    const std::string name = r.require_string("domain");
    auto dom = parse_domain(name);
    const auto domains = platform_domains(c);
    if (!dom || std::find(domains.begin(), domains.end(), *dom) == domains.end())
      throw ConfigError(r.field("domain"), fmt::format("no power domain '{}'", name));
    if (dom->kind == DomainKind::Cpu)
      throw ConfigError(r.field("domain"), "the core is gated only through wait-for-interrupt");
    const std::string state = r.require_string("state");
    auto st = parse_power_state(state);
    if (!st) throw ConfigError(r.field("state"), fmt::format("unknown power state '{}'", state));
    d.domain = *dom;
    d.state = *st;
    out = d;
  } else if (op == "dma") {
    nlohmann::json desc = j;
    desc.erase("op");
    for (const auto& [key, _] : j.items()) r.raw(key);
    directive::Dma d{parse_descriptor(desc, where)};
    if (d.descriptor.channel >= c.dma_channel_count)
      throw ConfigError(r.field("channel"), fmt::format("no DMA channel {}", d.descriptor.channel));
    try {
      check_descriptor(d.descriptor, map);
    } catch (const ConfigError& e) {
      throw ConfigError(r.field(e.field()), e.what());
    }
    out = d;
  } else if (op == "offload") {
    directive::Offload d;
    d.slot = narrow(r.u64("slot").value_or(0), r.field("slot"));
    const AcceleratorConfig* a = attached(c, d.slot);
    if (!a) throw ConfigError(r.field("slot"), fmt::format("no accelerator attached to slot {}", d.slot));
    const std::string kernel = r.string("kernel").value_or("timed");
    if (kernel == "timed") {
      d.command.kernel_id = nmv::kKernelTimed;
    } else if (kernel == "scale-add") {
      d.command.kernel_id = nmv::kKernelScaleAdd;
    } else {
      throw ConfigError(r.field("kernel"), "must be timed or scale-add");
    }
    d.command.element_count = narrow(r.require_u64("element_count"), r.field("element_count"));
    d.command.cycles_per_element = rational_from_double(r.number("cycles_per_element").value_or(a->cycles_per_element));
    d.command.scale = narrow(r.u64("scale").value_or(1), r.field("scale"));
    d.command.add = narrow(r.u64("add").value_or(0), r.field("add"));
    d.command.intensity = r.number("intensity").value_or(1.0);
    if (!(d.command.intensity >= 0.0)) throw ConfigError(r.field("intensity"), "must be non-negative");
    out = d;
  } else if (op == "wait-for-interrupt") {
    directive::WaitForInterrupt d;
    if (auto l = r.string("line")) d.line = check_line(c, *l, r.field("line"));
    out = d;
  } else if (op == "compute") {
    directive::Compute d;
    d.cycles = r.require_u64("cycles");
    d.intensity = r.number("intensity").value_or(1.0);
    if (!(d.intensity >= 0.0)) throw ConfigError(r.field("intensity"), "must be non-negative");
    out = d;
  } else if (op == "idle") {
    out = directive::Idle{r.require_u64("cycles")};
  } else if (op == "raise-irq") {
    out = directive::RaiseIrq{check_line(c, r.require_string("line"), r.field("line"))};
  } else if (op == "run-benchmark") {
    directive::RunBenchmark d;
    d.name = r.require_string("name");
    if (!run_names.insert(d.name).second) throw ConfigError(r.field("name"), fmt::format("duplicate run '{}'", d.name));
    d.model_file = r.require_string("model");
    d.model = load_model(dir / d.model_file);
    d.policy = parse_policy(r.raw("policy"), r.field("policy"), dir);
    if (auto m = r.string("mapping")) {
      try {
        d.mapping = parse_mapping(*m);
      } catch (const ConfigError& e) {
        throw ConfigError(r.field("mapping"), e.what());
      }
    }
    if (d.mapping == Mapping::Accel && c.accelerators.empty())
      throw ConfigError(r.field("mapping"), "accel mapping needs an attached accelerator");
    if (auto n = r.u64("samples")) {
      if (*n == 0) throw ConfigError(r.field("samples"), "must be at least 1");
      d.samples = *n;
    }
    d.expected_value = r.boolean("expected_value").value_or(false);
    if (d.expected_value) {
      try {
        implied_exit_rate(d.policy);
      } catch (const ConfigError& e) {
        throw ConfigError(r.field("policy"), e.what());
      }
    }
    d.seed = r.u64("seed");
    out = std::move(d);
  } else {
    throw ConfigError(r.field("op"), fmt::format("unknown directive '{}'", op));
  }
  r.finish();
  return out;
}

std::string hex_bytes(std::span<const std::uint8_t> bytes) {
  std::string s;
  s.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) s += fmt::format("{:02x}", b);
  return s;
}

}  // namespace

Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& file) {
  ObjectReader r(doc, file.string());
  Scenario s;
  s.file = file;
  s.name = r.string("name").value_or(file.stem().string());
  const std::filesystem::path dir = file.parent_path();
  s.config_file = r.require_string("config");
  s.config = load_config(dir / s.config_file);
  const ValidationReport vr = validate(s.config);
  if (!vr.ok()) throw ConfigError(s.config_file + ":" + vr.errors.front().field, vr.to_string());
  s.seed = r.u64("seed").value_or(0);
  if (auto cal = r.string("calibration")) {
    s.calibration_file = *cal;
    s.calibration = load_calibration(dir / *cal);
  }
  if (r.has("outputs")) {
    ObjectReader o(r.raw("outputs"), r.field("outputs"));
    if (auto p = o.string("report")) s.report_path = dir / *p;
    if (auto p = o.string("trace")) s.trace_path = dir / *p;
    o.finish();
  }
  r.string("description");
  if (r.has("metadata")) r.raw("metadata");

  const AddressMap map = build_address_map(s.config);
  const auto& list = r.raw("directives");
  if (!list.is_array()) throw ConfigError(r.field("directives"), "must be an array");
  std::set<std::string> runs;
  for (std::size_t i = 0; i < list.size(); ++i) {
    s.directives.push_back(parse_directive(list[i], fmt::format("{}[{}]", r.field("directives"), i), s, map, runs));
  }
  r.finish();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(json_util::read_file(path), path); }

nlohmann::json run_scenario(const Scenario& s, const RunOptions& options) {
  const std::uint64_t seed = options.seed.value_or(s.seed);
  const Calibration cal = s.calibration.value_or(Calibration{});
  const LeakageModel leak = LeakageModel::for_config(s.config);

  std::optional<CsvTrace> trace;
  if (options.trace) {
    *options.trace << "cycle,component,payload\n";
    trace.emplace(*options.trace);
  }

  Platform platform(s.config);
  if (trace) platform.engine().set_trace(&*trace);
  const Snapshot start = platform.snapshot();

  nlohmann::json results = nlohmann::json::array();
  nlohmann::json runs = nlohmann::json::object();
  nlohmann::json run_order = nlohmann::json::array();
  CpuCore& cpu = platform.cpu();

  for (std::size_t i = 0; i < s.directives.size(); ++i) {
    std::visit(
        overloaded{
            [&](const directive::Load& d) {
              cpu.push(cpu_op::Call{[&platform, d] { platform.load(d.address, d.bytes); }});
            },
            [&](const directive::Dump& d) {
              cpu.push(cpu_op::Call{[&platform, &results, d, i] {
                const auto bytes = platform.dump(d.address, d.length);
                if (d.file) {
                  std::ofstream out(*d.file, std::ios::binary);
                  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
                  if (!out) throw Error(fmt::format("cannot write {}", d.file->string()));
                }
                results.push_back({{"directive", i},
                                   {"op", "dump"},
                                   {"name", d.name},
                                   {"cycle", platform.engine().now()},
                                   {"address", json_util::hex32(d.address)},
                                   {"hex", hex_bytes(bytes)}});
              }});
            },
            [&](const directive::Access& d) {
              cpu.push(cpu_op::Access{d.kind, d.address, d.width, d.value, false});
              cpu.push(cpu_op::Call{[&cpu, &results, i] {
                const BusResponse& r = cpu.accesses().back().response;
                nlohmann::json e{{"directive", i},
                                 {"op", r.txn.kind == AccessKind::Read ? "read" : "write"},
                                 {"address", json_util::hex32(r.txn.address)},
                                 {"status", to_string(r.status)},
                                 {"issue", r.txn.issue_cycle},
                                 {"complete", r.complete_cycle}};
                if (r.txn.kind == AccessKind::Read && r.status == BusStatus::Ok) e["data"] = json_util::hex32(r.data);
                results.push_back(std::move(e));
              }});
            },
            [&](const directive::Power& d) {
              cpu.push(cpu_op::Call{[&platform, d] { platform.power().request_transition(d.domain, d.state); }});
            },
            [&](const directive::Dma& d) {
              cpu.push(cpu_op::Call{[&platform, d] { platform.dma().configure_and_start(d.descriptor); }});
            },
            [&](const directive::Offload& d) { cpu.push(cpu_op::Offload{d.slot, d.command}); },
            [&](const directive::WaitForInterrupt& d) {
              std::optional<std::uint32_t> line;
              if (d.line) line = resolve_line(platform.power(), *d.line).id;
              cpu.push(cpu_op::WaitForInterrupt{line});
            },
            [&](const directive::Compute& d) { cpu.push(cpu_op::Compute{d.cycles, d.intensity}); },
            [&](const directive::Idle& d) { cpu.push(cpu_op::Idle{d.cycles}); },
            [&](const directive::RaiseIrq& d) {
              cpu.push(cpu_op::Call{[&platform, d] { platform.power().raise(resolve_line(platform.power(), d.line)); }});
            },
            [&](const directive::RunBenchmark& d) {
              platform.run();
              Platform bench(s.config);
              if (trace) {
                bench.engine().set_trace(&*trace);
                bench.engine().note("scenario", fmt::format("RunBenchmark({})", d.name));
              }
              BenchmarkOptions o;
              o.mapping = d.mapping;
              o.samples = d.samples;
              o.seed = d.seed.value_or(seed);
              o.expected_value = d.expected_value;
              o.slot = s.config.accelerators.empty() ? 0 : s.config.accelerators.front().slot;
              o.cycles_per_element = cal.cycles_per_element;
              o.intensity = cal.for_model(d.model.name);
              o.costs = cal.costs;
              o.leak = leak;
              nlohmann::json j = to_json(run_benchmark(d.model, d.policy, o, bench));
              j["model"] = d.model.name;
              j["mapping"] = to_string(d.mapping);
              j["policy"] = to_json(d.policy);
              j["seed"] = o.seed;
              j["ratio_scope"] = "kernel-level";
              runs[d.name] = std::move(j);
              run_order.push_back(d.name);
            },
        },
        s.directives[i]);
  }
  platform.run();

  const Snapshot end = platform.snapshot();
  nlohmann::json report;
  report["scenario"] = s.name;
  report["seed"] = seed;
  report["config"] = to_json(s.config);
  if (s.calibration) report["calibration"] = s.calibration_file;
  report["final_cycle"] = end.time;
  const ActivityCounters& a = end.activity;
  report["activity"] = {{"cpu_active_cycles", a.cpu_active_cycles},
                        {"accel_active_cycles", a.accel_active_cycles},
                        {"bus_grants", a.bus_grants},
                        {"mem_accesses", a.mem_accesses},
                        {"dma_elements", a.dma_elements},
                        {"peripheral_accesses", a.peripheral_accesses},
                        {"events", platform.engine().events_processed()}};
  report["energy"] = platform.energy(start, end, cal.costs, leak).to_json();
  nlohmann::json states = nlohmann::json::object();
  for (DomainId d : platform.power().domains()) states[d.to_string()] = to_string(platform.power().state(d));
  report["power_states"] = states;
  nlohmann::json channels = nlohmann::json::array();
  for (std::uint32_t k = 0; k < platform.dma().channel_count(); ++k) {
    channels.push_back({{"channel", k},
                        {"status", to_string(platform.dma().status(k))},
                        {"elements", platform.dma().elements_done(k)}});
  }
  report["dma"] = channels;
  report["interrupts"] = {{"routed", platform.power().routed_count()}, {"cpu_resumes", platform.power().resume_count()}};
  report["results"] = results;
  report["runs"] = runs;
  report["run_order"] = run_order;

  if (options.baseline) {
    auto rows = nlohmann::json::array();
    for (const RatioRow& row : ratio_table(report, *options.baseline, {})) {
      rows.push_back({{"run", row.run}, {"speedup", row.speedup}, {"energy_gain", row.energy_gain}});
    }
    report["ratios"] = {{"baseline", *options.baseline}, {"scope", "kernel-level"}, {"rows", rows}};
  }
  return report;
}

std::vector<RatioRow> ratio_table(const nlohmann::json& report, const std::string& baseline,
                                  const std::filesystem::path& base_dir) {
  nlohmann::json base_run;
  if (auto hash = baseline.find('#'); hash != std::string::npos) {
    const std::filesystem::path file = base_dir / baseline.substr(0, hash);
    const std::string name = baseline.substr(hash + 1);
    const nlohmann::json other = json_util::read_file(file);
    if (!other.contains("runs") || !other["runs"].contains(name))
      throw ConfigError("baseline", fmt::format("{} has no run named '{}'", file.string(), name));
    base_run = other["runs"][name];
  } else {
    if (!report.contains("runs") || !report["runs"].contains(baseline))
      throw ConfigError("baseline", fmt::format("no run named '{}' in this scenario", baseline));
    base_run = report["runs"][baseline];
  }
  const double cycles = base_run.at("mean_cycles").get<double>();
  const double energy = base_run.at("mean_energy_j").get<double>();
  std::vector<RatioRow> rows;
  for (const auto& name : report.at("run_order")) {
    const auto& run = report["runs"][name.get<std::string>()];
    rows.push_back({name.get<std::string>(), cycles / run.at("mean_cycles").get<double>(),
                    energy / run.at("mean_energy_j").get<double>()});
  }
  return rows;
}

}  // namespace xheep
