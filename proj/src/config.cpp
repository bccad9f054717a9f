// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/config.hpp"

#include <array>
#include <bit>
#include <optional>

#include <fmt/format.h>

#include "xheep/address_map.hpp"
#include "xheep/json_util.hpp"

namespace xheep {

namespace {

constexpr std::array kCoreNames = {"CV32E20", "CV32E40X", "CV32E40P", "CV32E40PX"};
constexpr std::array kTopologyNames = {"OneAtATime", "FullCrossbar"};
constexpr std::array kArbitrationNames = {"RoundRobin", "FixedPriority"};
constexpr std::array kMasterModeNames = {"Dedicated", "SharedDma"};
constexpr std::array kPeripheralNames = {"GPIO", "I2C", "I2S", "SPI", "Timer", "PLIC"};

template <typename Enum, std::size_t N>
Enum parse_enum(const std::string& text, const std::array<const char*, N>& names,
                const std::string& field) {
  for (std::size_t i = 0; i < N; ++i) {
    if (text == names[i]) return static_cast<Enum>(i);
  }
  std::string allowed;
  for (const char* n : names) allowed += std::string(allowed.empty() ? "" : ", ") + n;
  throw ConfigError(field, "unknown value '" + text + "' (expected one of: " + allowed + ")");
}

std::uint32_t narrow_u32(std::uint64_t v, const std::string& field) {
  if (v > 0xFFFF'FFFFull) throw ConfigError(field, "value exceeds 32 bits");
  return static_cast<std::uint32_t>(v);
}

TimingConfig parse_timing(const nlohmann::json& j, const std::string& path) {
  json_util::ObjectReader r(j, path);
  TimingConfig t;
  auto read = [&](std::string_view key, std::uint32_t& out) {
    if (auto v = r.u64(key)) out = narrow_u32(*v, r.field(key));
  };
  read("memory_latency", t.memory_latency);
  read("peripheral_latency", t.peripheral_latency);
  read("gate_latency", t.gate_latency);
  read("retentive_wake_latency", t.retentive_wake_latency);
  read("power_up_latency", t.power_up_latency);
  read("irq_latency", t.irq_latency);
  r.finish();
  return t;
}

AcceleratorConfig parse_accelerator(const nlohmann::json& j, const std::string& path) {
  json_util::ObjectReader r(j, path);
  AcceleratorConfig a;
  a.slot = narrow_u32(r.require_u64("slot"), r.field("slot"));
  if (auto v = r.string("model")) a.model = *v;
  if (auto v = r.u64("bank_index")) a.bank_index = narrow_u32(*v, r.field("bank_index"));
  if (auto v = r.number("cycles_per_element")) a.cycles_per_element = *v;
  r.finish();
  return a;
}

}  // namespace

std::string_view to_string(CoreType v) { return kCoreNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(BusTopology v) { return kTopologyNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(ArbitrationPolicy v) { return kArbitrationNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(XaifMasterMode v) { return kMasterModeNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Peripheral v) { return kPeripheralNames[static_cast<std::size_t>(v)]; }

PlatformConfig default_config() {
  PlatformConfig c;
  c.xif_available = core_has_xif(c.core_type);
  return c;
}

bool ValidationReport::has_error(std::string_view field) const {
  for (const auto& e : errors) {
    if (e.field == field || e.field.starts_with(std::string(field) + ".") ||
        e.field.starts_with(std::string(field) + "["))
      return true;
  }
  return false;
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto& e : errors) out += e.field + ": " + e.message + "\n";
  return out;
}

ValidationReport validate(const PlatformConfig& c) {
  ValidationReport report;
  auto fail = [&](std::string field, std::string message) {
    report.errors.push_back({std::move(field), std::move(message)});
  };

  if (c.bank_count < 1) fail("bank_count", "must be at least 1");
  if (!std::has_single_bit(c.bank_size_bytes)) {
    fail("bank_size_bytes", "bank_size_bytes not a power of two");
  } else if (c.bank_size_bytes < 256) {
    fail("bank_size_bytes", "must be at least 256 bytes");
  }
  if (c.bank_count >= 1 && c.bank_size_bytes >= 1 &&
      c.bank_count > kPeripheralBase / std::max<std::uint64_t>(c.bank_size_bytes, 1)) {
    fail("bank_count", fmt::format("total memory exceeds the {} bank window", json_util::hex32(kPeripheralBase)));
  }
  if (c.dma_channel_count < 1) fail("dma_channel_count", "must be at least 1");
  if (c.dma_channel_count > 0xFFFF) fail("dma_channel_count", "must be at most 65535");
  if (c.accelerator_slots > kMaxAcceleratorSlots)
    fail("accelerator_slots", fmt::format("at most {} slots fit the accelerator window", kMaxAcceleratorSlots));
  if (c.clock_hz == 0) fail("clock_hz", "must be positive");
  if (!(c.voltage_v > 0.0)) fail("voltage_v", "must be positive");
  if (c.xif_available != core_has_xif(c.core_type))
    fail("xif_available",
         fmt::format("must be {} for core {}", core_has_xif(c.core_type), to_string(c.core_type)));
  if (!(c.retention_fraction > 0.0 && c.retention_fraction < 1.0))
    fail("retention_fraction", "must lie strictly between 0 and 1");
  if (!c.bank_gateable.empty() && c.bank_gateable.size() != c.bank_count)
    fail("bank_gateable", fmt::format("expected {} entries, got {}", c.bank_count, c.bank_gateable.size()));
  for (const auto& [core, scale] : c.cpu_share_scale) {
    if (!(scale > 0.0)) fail(fmt::format("cpu_share_scale.{}", to_string(core)), "must be positive");
  }

  const TimingConfig& t = c.timing;
  if (t.memory_latency < 1) fail("timing.memory_latency", "must be at least 1 cycle");
  if (t.peripheral_latency < 1) fail("timing.peripheral_latency", "must be at least 1 cycle");
  if (t.gate_latency < 1) fail("timing.gate_latency", "must be at least 1 cycle");
  if (t.retentive_wake_latency < 1) fail("timing.retentive_wake_latency", "must be at least 1 cycle");
  if (t.power_up_latency < 1) fail("timing.power_up_latency", "must be at least 1 cycle");
  if (t.irq_latency < 1) fail("timing.irq_latency", "must be at least 1 cycle");

  std::set<std::uint32_t> slots;
  std::set<std::uint32_t> banks;
  for (std::size_t i = 0; i < c.accelerators.size(); ++i) {
    const auto& a = c.accelerators[i];
    const std::string f = fmt::format("accelerators[{}]", i);
    if (a.slot >= c.accelerator_slots)
      fail(f + ".slot", fmt::format("slot {} not below accelerator_slots ({})", a.slot, c.accelerator_slots));
    if (!slots.insert(a.slot).second) fail(f + ".slot", fmt::format("slot {} assigned twice", a.slot));
    if (a.bank_index >= c.bank_count)
      fail(f + ".bank_index", fmt::format("bank {} does not exist", a.bank_index));
    if (!banks.insert(a.bank_index).second)
      fail(f + ".bank_index", fmt::format("bank {} already hosts an accelerator", a.bank_index));
    if (a.model.empty()) fail(f + ".model", "must name an accelerator model");
    if (!(a.cycles_per_element > 0.0)) fail(f + ".cycles_per_element", "must be positive");
  }
  return report;
}

PlatformConfig parse_config(const nlohmann::json& doc) {
  json_util::ObjectReader r(doc, "");
  PlatformConfig c = default_config();
  bool xif_given = false;

  if (auto v = r.string("core_type")) c.core_type = parse_enum<CoreType>(*v, kCoreNames, "core_type");
  if (auto v = r.u64("bank_count")) c.bank_count = *v;
  if (auto v = r.u64("bank_size_bytes")) c.bank_size_bytes = *v;
  if (auto v = r.string("bus_topology"))
    c.bus_topology = parse_enum<BusTopology>(*v, kTopologyNames, "bus_topology");
  if (auto v = r.string("arbitration"))
    c.arbitration = parse_enum<ArbitrationPolicy>(*v, kArbitrationNames, "arbitration");
  if (auto v = r.u64("dma_channel_count")) c.dma_channel_count = *v;
  if (r.has("peripherals")) {
    const auto& list = r.raw("peripherals");
    if (!list.is_array()) throw ConfigError("peripherals", "expected an array of peripheral names");
    c.peripherals.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string f = fmt::format("peripherals[{}]", i);
      if (!list[i].is_string()) throw ConfigError(f, "expected a peripheral name");
      auto p = parse_enum<Peripheral>(list[i].get<std::string>(), kPeripheralNames, f);
      if (!c.peripherals.insert(p).second) throw ConfigError(f, "duplicate peripheral");
    }
  }
  if (auto v = r.u64("accelerator_slots")) c.accelerator_slots = *v;
  if (auto v = r.u64("clock_hz")) c.clock_hz = *v;
  if (auto v = r.number("voltage_v")) c.voltage_v = *v;
  if (auto v = r.boolean("xif_available")) {
    c.xif_available = *v;
    xif_given = true;
  }
  if (auto v = r.number("retention_fraction")) c.retention_fraction = *v;
  if (r.has("bank_gateable")) {
    const auto& list = r.raw("bank_gateable");
    if (!list.is_array()) throw ConfigError("bank_gateable", "expected an array of booleans");
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_boolean()) throw ConfigError(fmt::format("bank_gateable[{}]", i), "expected true or false");
      c.bank_gateable.push_back(list[i].get<bool>());
    }
  }
  if (r.has("cpu_share_scale")) {
    json_util::ObjectReader s(r.raw("cpu_share_scale"), "cpu_share_scale");
    for (std::size_t i = 0; i < kCoreNames.size(); ++i) {
      if (auto v = s.number(kCoreNames[i])) c.cpu_share_scale[static_cast<CoreType>(i)] = *v;
    }
    s.finish();
  }
  if (auto v = r.string("xaif_master_mode"))
    c.xaif_master_mode = parse_enum<XaifMasterMode>(*v, kMasterModeNames, "xaif_master_mode");
  if (r.has("timing")) c.timing = parse_timing(r.raw("timing"), "timing");
  if (r.has("accelerators")) {
    const auto& list = r.raw("accelerators");
    if (!list.is_array()) throw ConfigError("accelerators", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i)
      c.accelerators.push_back(parse_accelerator(list[i], fmt::format("accelerators[{}]", i)));
  }
  r.finish();

  if (!xif_given) c.xif_available = core_has_xif(c.core_type);
  return c;
}

PlatformConfig load_config(const std::filesystem::path& path) {
  return parse_config(json_util::read_file(path));
}

nlohmann::json to_json(const PlatformConfig& c) {
  nlohmann::json j;
  j["core_type"] = to_string(c.core_type);
  j["bank_count"] = c.bank_count;
  j["bank_size_bytes"] = c.bank_size_bytes;
  j["bus_topology"] = to_string(c.bus_topology);
  j["arbitration"] = to_string(c.arbitration);
  j["dma_channel_count"] = c.dma_channel_count;
  auto& periph = j["peripherals"] = nlohmann::json::array();
  for (Peripheral p : c.peripherals) periph.push_back(to_string(p));
  j["accelerator_slots"] = c.accelerator_slots;
  j["clock_hz"] = c.clock_hz;
  j["voltage_v"] = c.voltage_v;
  j["xif_available"] = c.xif_available;
  j["retention_fraction"] = c.retention_fraction;
  if (!c.bank_gateable.empty()) {
    auto& g = j["bank_gateable"] = nlohmann::json::array();
    for (bool b : c.bank_gateable) g.push_back(b);
  }
  if (!c.cpu_share_scale.empty()) {
    auto& s = j["cpu_share_scale"] = nlohmann::json::object();
    for (const auto& [core, scale] : c.cpu_share_scale) s[std::string(to_string(core))] = scale;
  }
  j["xaif_master_mode"] = to_string(c.xaif_master_mode);
  j["timing"] = {{"memory_latency", c.timing.memory_latency},
                 {"peripheral_latency", c.timing.peripheral_latency},
                 {"gate_latency", c.timing.gate_latency},
                 {"retentive_wake_latency", c.timing.retentive_wake_latency},
                 {"power_up_latency", c.timing.power_up_latency},
                 {"irq_latency", c.timing.irq_latency}};
  auto& accels = j["accelerators"] = nlohmann::json::array();
  for (const auto& a : c.accelerators) {
    accels.push_back({{"slot", a.slot},
                      {"model", a.model},
                      {"bank_index", a.bank_index},
                      {"cycles_per_element", a.cycles_per_element}});
  }
  return j;
}

}  // namespace xheep
