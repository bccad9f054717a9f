// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "xheep/error.hpp"
#include "xheep/json_util.hpp"
#include "xheep/platform.hpp"

namespace xheep {

namespace {

RatioSet parse_ratios(const nlohmann::json& j, const std::string& path) {
  json_util::ObjectReader r(j, path);
  RatioSet s;
  auto read = [&](std::string_view key, double& out) {
    out = r.require_number(key);
    if (!(out > 0.0)) throw ConfigError(r.field(key), "ratio must be positive");
  };
  read("cpu_ee", s.cpu_ee);
  read("accel_noee", s.accel_noee);
  read("accel_ee", s.accel_ee);
  r.finish();
  return s;
}

nlohmann::json ratios_json(const RatioSet& s) {
  return {{"cpu_ee", s.cpu_ee}, {"accel_noee", s.accel_noee}, {"accel_ee", s.accel_ee}};
}

RatioSet residual(const RatioSet& got, const RatioSet& want) {
  return {got.cpu_ee / want.cpu_ee - 1.0, got.accel_noee / want.accel_noee - 1.0, got.accel_ee / want.accel_ee - 1.0};
}

double max_abs(const RatioSet& s) { return std::max({std::abs(s.cpu_ee), std::abs(s.accel_noee), std::abs(s.accel_ee)}); }

std::uint32_t accelerator_slot(const PlatformConfig& config) {
  if (config.accelerators.empty())
    throw ConfigError("accelerators", "the case study needs a platform with an attached accelerator");
  return config.accelerators.front().slot;
}

ExitOutcome simulate(const PlatformConfig& config, const ModelSpec& model, Mapping mapping, double p,
                     const Calibration& cal) {
  Platform platform(config);
  BenchmarkOptions o;
  o.mapping = mapping;
  o.expected_value = true;
  o.slot = accelerator_slot(config);
  o.cycles_per_element = cal.cycles_per_element;
  o.intensity = cal.for_model(model.name);
  o.costs = cal.costs;
  o.leak = LeakageModel::for_config(config);
  return run_benchmark(model, policy::FixedRate{p}, o, platform);
}

/// Bisection for a monotone f with f(x) = target inside [lo, hi].
double solve(const std::function<double(double)>& f, double target, double lo, double hi, bool geometric,
             const std::string& what) {
  double flo = f(lo);
  const double fhi = f(hi);
  if ((flo - target) * (fhi - target) > 0.0) {
    throw CalibrationInfeasible(
        fmt::format("{}: target {} is outside [{}, {}] over the search range [{}, {}]", what, target,
                    std::min(flo, fhi), std::max(flo, fhi), lo, hi));
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = geometric ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm - target) * (flo - target) > 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

SegmentIntensity Calibration::for_model(const std::string& name) const {
  auto it = intensity.find(name);
  return it == intensity.end() ? SegmentIntensity{} : it->second;
}

nlohmann::json to_json(const Calibration& c) {
  auto models = nlohmann::json::object();
  for (const auto& [name, w] : c.intensity) {
    models[name] = {{"cpu_pre_exit", w.cpu_pre_exit},
                    {"cpu_post_exit", w.cpu_post_exit},
                    {"accel_pre_exit", w.accel_pre_exit},
                    {"accel_post_exit", w.accel_post_exit}};
  }
  return {{"costs", to_json(c.costs)},
          {"cycles_per_element", {{"q16", c.cycles_per_element.num}, {"value", c.cycles_per_element.value()}}},
          {"intensity", models}};
}

Calibration parse_calibration(const nlohmann::json& doc, const std::string& path) {
  json_util::ObjectReader r(doc, path);
  Calibration c;
  if (r.has("costs")) c.costs = parse_costs(r.raw("costs"), r.field("costs"));
  if (r.has("cycles_per_element")) {
    json_util::ObjectReader cr(r.raw("cycles_per_element"), r.field("cycles_per_element"));
    const std::uint64_t q16 = cr.require_u64("q16");
    if (q16 == 0 || q16 > 0xFFFF'FFFFull) throw ConfigError(cr.field("q16"), "must be a positive 32-bit value");
    c.cycles_per_element = {q16, 65536};
    cr.number("value");  // informational
    cr.finish();
  }
  if (r.has("intensity")) {
    const auto& models = r.raw("intensity");
    if (!models.is_object()) throw ConfigError(r.field("intensity"), "must be an object keyed by model name");
    for (const auto& [name, j] : models.items()) {
      json_util::ObjectReader mr(j, r.field("intensity") + "." + name);
      SegmentIntensity w;
      auto read = [&](std::string_view key, double& out) {
        if (auto v = mr.number(key)) {
          if (!(*v >= 0.0)) throw ConfigError(mr.field(key), "intensity must be non-negative");
          out = *v;
        }
      };
      read("cpu_pre_exit", w.cpu_pre_exit);
      read("cpu_post_exit", w.cpu_post_exit);
      read("accel_pre_exit", w.accel_pre_exit);
      read("accel_post_exit", w.accel_post_exit);
      mr.finish();
      c.intensity[name] = w;
    }
  }
  if (r.has("fit")) r.raw("fit");
  if (r.has("metadata")) r.raw("metadata");
  r.finish();
  return c;
}

Calibration load_calibration(const std::filesystem::path& path) {
  return parse_calibration(json_util::read_file(path), path.string());
}

CalibrationTargets load_targets(const std::filesystem::path& path) {
  const nlohmann::json doc = json_util::read_file(path);
  const std::filesystem::path dir = path.parent_path();
  json_util::ObjectReader r(doc, path.string());
  CalibrationTargets t;
  t.config_file = r.require_string("config");
  t.config = load_config(dir / t.config_file);
  if (auto v = r.number("tolerance")) {
    if (!(*v > 0.0 && *v < 1.0)) throw ConfigError(r.field("tolerance"), "must lie in (0, 1)");
    t.tolerance = *v;
  }
  if (auto v = r.number("cpu_active_cycle_pj")) {
    if (!(*v > 0.0)) throw ConfigError(r.field("cpu_active_cycle_pj"), "must be positive");
    t.cpu_active_cycle_pj = *v;
  }
  const auto& models = r.raw("models");
  if (!models.is_array() || models.empty()) throw ConfigError(r.field("models"), "must be a non-empty array");
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string where = fmt::format("{}[{}]", r.field("models"), i);
    json_util::ObjectReader mr(models[i], where);
    ModelTarget m;
    m.model_file = mr.require_string("model");
    m.model = load_model(dir / m.model_file);
    m.exit_rate = mr.require_number("exit_rate");
    if (!(m.exit_rate > 0.0 && m.exit_rate < 1.0)) throw ConfigError(mr.field("exit_rate"), "must lie in (0, 1)");
    m.speedup = parse_ratios(mr.raw("speedup"), mr.field("speedup"));
    m.energy_gain = parse_ratios(mr.raw("energy_gain"), mr.field("energy_gain"));
    mr.finish();
    t.models.push_back(std::move(m));
  }
  if (auto ref = r.string("reference_model")) {
    auto it = std::find_if(t.models.begin(), t.models.end(), [&](const ModelTarget& m) { return m.model.name == *ref; });
    if (it == t.models.end()) throw ConfigError(r.field("reference_model"), fmt::format("no model named '{}'", *ref));
    t.reference = static_cast<std::size_t>(it - t.models.begin());
  }
  if (r.has("metadata")) r.raw("metadata");
  r.finish();
  return t;
}

RatioSet CaseStudy::speedup() const {
  return {cpu_noee.mean_cycles / cpu_ee.mean_cycles, cpu_noee.mean_cycles / accel_noee.mean_cycles,
          cpu_noee.mean_cycles / accel_ee.mean_cycles};
}

RatioSet CaseStudy::energy_gain() const {
  return {cpu_noee.mean_energy_j / cpu_ee.mean_energy_j, cpu_noee.mean_energy_j / accel_noee.mean_energy_j,
          cpu_noee.mean_energy_j / accel_ee.mean_energy_j};
}

CaseStudy run_case_study(const PlatformConfig& config, const ModelSpec& model, double p, const Calibration& cal) {
  return {simulate(config, model, Mapping::Cpu, 0.0, cal), simulate(config, model, Mapping::Cpu, p, cal),
          simulate(config, model, Mapping::Accel, 0.0, cal), simulate(config, model, Mapping::Accel, p, cal)};
}

CalibrationResult calibrate(const CalibrationTargets& t) {
  CalibrationResult out;
  Calibration& cal = out.calibration;
  cal.costs.cpu_active_cycle = t.cpu_active_cycle_pj;
  std::uint64_t& sims = out.simulations;
  auto sim = [&](const ModelSpec& m, Mapping mapping, double p) {
    ++sims;
    return simulate(t.config, m, mapping, p, cal);
  };

  const ModelTarget& ref = t.models.at(t.reference);

  // cycles_per_element: integer search on the Q16 numerator.
  {
    const double base = sim(ref.model, Mapping::Cpu, 0.0).mean_cycles;
    auto speedup = [&](std::uint64_t num) {
      cal.cycles_per_element = {num, 65536};
      return base / sim(ref.model, Mapping::Accel, 0.0).mean_cycles;
    };
    std::uint64_t lo = 1, hi = 4 * 65536;
    if (speedup(lo) < ref.speedup.accel_noee || speedup(hi) > ref.speedup.accel_noee)
      throw CalibrationInfeasible("cycles_per_element: accelerator speedup target out of reach");
    while (hi - lo > 1) {
      const std::uint64_t mid = (lo + hi) / 2;
      (speedup(mid) > ref.speedup.accel_noee ? lo : hi) = mid;
    }
    const double dlo = std::abs(speedup(lo) - ref.speedup.accel_noee);
    const double dhi = std::abs(speedup(hi) - ref.speedup.accel_noee);
    cal.cycles_per_element = {dlo <= dhi ? lo : hi, 65536};
  }

  // Accelerator cost per active cycle at nominal intensity.
  {
    const double base = sim(ref.model, Mapping::Cpu, 0.0).mean_energy_j;
    cal.costs.accel_active_cycle = solve(
        [&](double pj) {
          cal.costs.accel_active_cycle = pj;
          return base / sim(ref.model, Mapping::Accel, 0.0).mean_energy_j;
        },
        ref.energy_gain.accel_noee, 1e-3, 1e4, true, "accel_active_cycle");
  }

  for (const ModelTarget& m : t.models) {
    SegmentIntensity& w = cal.intensity[m.model.name];
    w = SegmentIntensity{};
    const std::string tag = m.model.name;

    w.cpu_pre_exit = solve(
        [&](double r) {
          w.cpu_pre_exit = r;
          return sim(m.model, Mapping::Cpu, 0.0).mean_energy_j / sim(m.model, Mapping::Cpu, m.exit_rate).mean_energy_j;
        },
        m.energy_gain.cpu_ee, 1e-3, 1e3, true, tag + ": cpu_pre_exit");
    const double base = sim(m.model, Mapping::Cpu, 0.0).mean_energy_j;

    // Gauss-Seidel over the two offload gains: the early-exit gain pins the
    // pre-exit intensity, the full-run gain the post-exit one.
    for (int round = 0; round < 60; ++round) {
      const SegmentIntensity before = w;
      w.accel_pre_exit = solve(
          [&](double a) {
            w.accel_pre_exit = a;
            return base / sim(m.model, Mapping::Accel, m.exit_rate).mean_energy_j;
          },
          m.energy_gain.accel_ee, 1e-4, 1e4, true, tag + ": accel_pre_exit");
      w.accel_post_exit = solve(
          [&](double a) {
            w.accel_post_exit = a;
            return base / sim(m.model, Mapping::Accel, 0.0).mean_energy_j;
          },
          m.energy_gain.accel_noee, 1e-4, 1e4, true, tag + ": accel_post_exit");
      if (std::abs(w.accel_pre_exit - before.accel_pre_exit) < 1e-9 &&
          std::abs(w.accel_post_exit - before.accel_post_exit) < 1e-9)
        break;
    }
  }

  std::vector<std::string> failures;
  for (const ModelTarget& m : t.models) {
    const CaseStudy cs = run_case_study(t.config, m.model, m.exit_rate, cal);
    sims += 4;
    ModelFit fit;
    fit.name = m.model.name;
    fit.pre_exit_fraction = m.model.pre_exit_fraction();
    fit.fitted_exit_fraction = fit_exit_fraction(m.exit_rate, m.speedup.cpu_ee);
    fit.speedup = cs.speedup();
    fit.energy_gain = cs.energy_gain();
    fit.speedup_residual = residual(fit.speedup, m.speedup);
    fit.energy_residual = residual(fit.energy_gain, m.energy_gain);
    fit.power_ratio_noee = fit.speedup.accel_noee / fit.energy_gain.accel_noee;
    fit.power_ratio_ee = fit.speedup.accel_ee / fit.energy_gain.accel_ee;
    const double worst = std::max(max_abs(fit.speedup_residual), max_abs(fit.energy_residual));
    out.max_residual = std::max(out.max_residual, worst);
    if (worst > t.tolerance) failures.push_back(fmt::format("{} (worst residual {:.2f}%)", fit.name, 100.0 * worst));
    out.fits.push_back(fit);
  }
  if (!failures.empty()) {
    std::string msg = "residual above tolerance:";
    for (const auto& f : failures) msg += " " + f;
    throw CalibrationInfeasible(msg);
  }
  return out;
}

nlohmann::json to_json(const CalibrationResult& result, const CalibrationTargets& targets) {
  nlohmann::json j = to_json(result.calibration);
  auto fits = nlohmann::json::array();
  for (const ModelFit& f : result.fits) {
    fits.push_back({{"model", f.name},
                    {"pre_exit_fraction", f.pre_exit_fraction},
                    {"fitted_exit_fraction", f.fitted_exit_fraction},
                    {"speedup", ratios_json(f.speedup)},
                    {"energy_gain", ratios_json(f.energy_gain)},
                    {"speedup_residual", ratios_json(f.speedup_residual)},
                    {"energy_gain_residual", ratios_json(f.energy_residual)},
                    {"power_ratio", {{"accel_noee", f.power_ratio_noee}, {"accel_ee", f.power_ratio_ee}}}});
  }
  j["fit"] = {{"tolerance", targets.tolerance},
              {"max_abs_residual", result.max_residual},
              {"simulations", result.simulations},
              {"ratio_scope", "kernel-level"},
              {"models", fits}};
  return j;
}

}  // namespace xheep
