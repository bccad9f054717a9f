// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/sweep.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "xheep/error.hpp"
#include "xheep/json_util.hpp"
#include "xheep/platform.hpp"

namespace xheep {

namespace {

using json_util::ObjectReader;

Mapping mapping_field(ObjectReader& r, const PlatformConfig& config) {
  Mapping m = Mapping::Cpu;
  if (auto text = r.string("mapping")) {
    try {
      m = parse_mapping(*text);
    } catch (const ConfigError& e) {
      throw ConfigError(r.field("mapping"), e.what());
    }
  }
  if (m == Mapping::Accel && config.accelerators.empty())
    throw ConfigError(r.field("mapping"), "accel mapping needs an attached accelerator");
  return m;
}

ExitPolicy with_value(ExitPolicy policy, SweepParameter parameter, double value) {
  if (parameter == SweepParameter::Tau) {
    std::get<policy::Entropy>(policy).tau = value;
  } else {
    std::get<policy::FixedRate>(policy).p = value;
  }
  return policy;
}

ExitOutcome run_point(const SweepSpec& spec, Mapping mapping, const ExitPolicy& policy) {
  Platform platform(spec.config);
  BenchmarkOptions o;
  o.mapping = mapping;
  o.samples = spec.samples;
  o.seed = spec.seed;
  o.expected_value = spec.expected_value;
  o.slot = spec.config.accelerators.empty() ? 0 : spec.config.accelerators.front().slot;
  o.cycles_per_element = spec.calibration.cycles_per_element;
  o.intensity = spec.calibration.for_model(spec.model.name);
  o.costs = spec.calibration.costs;
  o.leak = LeakageModel::for_config(spec.config);
  return run_benchmark(spec.model, policy, o, platform);
}

}  // namespace

SweepSpec parse_sweep(const nlohmann::json& doc, const std::filesystem::path& file) {
  ObjectReader r(doc, file.string());
  const std::filesystem::path dir = file.parent_path();
  SweepSpec s;
  s.name = r.string("name").value_or(file.stem().string());
  r.string("description");
  s.config_file = r.require_string("config");
  s.config = load_config(dir / s.config_file);
  const ValidationReport vr = validate(s.config);
  if (!vr.ok()) throw ConfigError(s.config_file + ":" + vr.errors.front().field, vr.to_string());
  if (auto cal = r.string("calibration")) {
    s.calibration_file = *cal;
    s.calibration = load_calibration(dir / *cal);
  }
  s.model_file = r.require_string("model");
  s.model = load_model(dir / s.model_file);
  s.mapping = mapping_field(r, s.config);
  s.policy = parse_policy(r.raw("policy"), r.field("policy"), dir);

  const std::string param = r.require_string("parameter");
  if (param == "tau") {
    s.parameter = SweepParameter::Tau;
    if (!std::holds_alternative<policy::Entropy>(s.policy))
      throw ConfigError(r.field("parameter"), "tau sweeps need an entropy policy");
  } else if (param == "p") {
    s.parameter = SweepParameter::ExitRate;
    if (!std::holds_alternative<policy::FixedRate>(s.policy))
      throw ConfigError(r.field("parameter"), "p sweeps need a fixed-rate policy");
  } else {
    throw ConfigError(r.field("parameter"), "must be tau or p");
  }
  const auto& values = r.raw("values");
  if (!values.is_array() || values.empty()) throw ConfigError(r.field("values"), "must be a non-empty array");
  for (const auto& v : values) {
    if (!v.is_number()) throw ConfigError(r.field("values"), "must hold numbers");
    const double x = v.get<double>();
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(r.field("values"), "values lie in [0, 1]");
    s.values.push_back(x);
  }
  if (auto n = r.u64("samples")) {
    if (*n == 0) throw ConfigError(r.field("samples"), "must be at least 1");
    s.samples = *n;
  }
  s.seed = r.u64("seed").value_or(0);
  s.expected_value = r.boolean("expected_value").value_or(false);
  if (s.expected_value) {
    try {
      implied_exit_rate(s.policy);
    } catch (const ConfigError& e) {
      throw ConfigError(r.field("expected_value"), e.what());
    }
  }

  ObjectReader b(r.raw("baseline"), r.field("baseline"));
  s.baseline.name = b.require_string("name");
  s.baseline.mapping = mapping_field(b, s.config);
  s.baseline.policy = parse_policy(b.raw("policy"), b.field("policy"), dir);
  b.finish();
  r.finish();
  return s;
}

SweepSpec load_sweep(const std::filesystem::path& path) { return parse_sweep(json_util::read_file(path), path); }

SweepResult run_sweep(const SweepSpec& spec, unsigned jobs) {
  SweepResult result;
  result.baseline = run_point(spec, spec.baseline.mapping, spec.baseline.policy);
  std::vector<ExitOutcome> outcomes(spec.values.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < outcomes.size(); i = next++) {
      try {
        outcomes[i] = run_point(spec, spec.mapping, with_value(spec.policy, spec.parameter, spec.values[i]));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(outcomes.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const ExitOutcome& o = outcomes[i];
    result.points.push_back({spec.values[i], o.exit_rate, o.mean_cycles, o.mean_energy_j,
                             result.baseline.mean_cycles / o.mean_cycles,
                             result.baseline.mean_energy_j / o.mean_energy_j});
  }
  return result;
}

nlohmann::json to_json(const SweepResult& result, const SweepSpec& spec) {
  nlohmann::json points = nlohmann::json::array();
  for (const SweepPoint& p : result.points) {
    points.push_back({{"value", p.value},
                      {"exit_rate", p.exit_rate},
                      {"mean_cycles", p.mean_cycles},
                      {"mean_energy_j", p.mean_energy_j},
                      {"speedup", p.speedup},
                      {"energy_gain", p.energy_gain}});
  }
  return {{"sweep", spec.name},
          {"model", spec.model.name},
          {"mapping", to_string(spec.mapping)},
          {"parameter", spec.parameter == SweepParameter::Tau ? "tau" : "p"},
          {"samples", spec.samples},
          {"seed", spec.seed},
          {"expected_value", spec.expected_value},
          {"ratio_scope", "kernel-level"},
          {"baseline",
           {{"name", spec.baseline.name},
            {"mapping", to_string(spec.baseline.mapping)},
            {"policy", to_json(spec.baseline.policy)},
            {"mean_cycles", result.baseline.mean_cycles},
            {"mean_energy_j", result.baseline.mean_energy_j}}},
          {"points", points}};
}

std::string to_csv(const SweepResult& result) {
  std::string out = "value,exit_rate,mean_cycles,mean_energy_j,speedup,energy_gain\n";
  for (const SweepPoint& p : result.points) {
    out += fmt::format("{},{},{},{},{},{}\n", p.value, p.exit_rate, p.mean_cycles, p.mean_energy_j, p.speedup,
                       p.energy_gain);
  }
  return out;
}

}  // namespace xheep
