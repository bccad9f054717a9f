// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "xheep/error.hpp"
#include "xheep/json_util.hpp"

namespace xheep {

SimTime ModelSpec::total_cycles() const {
  SimTime t = exit_head_cycles;
  for (const auto& l : layers) t += l.cpu_cycles;
  return t;
}

SimTime ModelSpec::pre_exit_cycles() const {
  SimTime t = exit_head_cycles;
  for (std::size_t i = 0; i <= exit_after && i < layers.size(); ++i) t += layers[i].cpu_cycles;
  return t;
}

double ModelSpec::pre_exit_fraction() const {
  const SimTime total = total_cycles();
  return total == 0 ? 0.0 : static_cast<double>(pre_exit_cycles()) / static_cast<double>(total);
}

ModelSpec parse_model(const nlohmann::json& doc, const std::string& path) {
  json_util::ObjectReader r(doc, path);
  ModelSpec m;
  m.name = r.require_string("name");
  if (auto v = r.u64("exit_head_cycles")) m.exit_head_cycles = *v;
  m.exit_after = static_cast<std::size_t>(r.require_u64("exit_after"));
  const auto& layers = r.raw("layers");
  if (!layers.is_array() || layers.empty()) throw ConfigError(r.field("layers"), "must be a non-empty array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    json_util::ObjectReader lr(layers[i], fmt::format("{}.layers[{}]", path, i));
    LayerSpec l;
    l.label = lr.require_string("label");
    l.cpu_cycles = lr.require_u64("cpu_cycles");
    if (auto n = lr.u64("accel_element_count")) {
      if (*n > 0xFFFF'FFFFull) throw ConfigError(lr.field("accel_element_count"), "must fit in 32 bits");
      l.accel_element_count = *n;
    }
    lr.finish();
    m.layers.push_back(std::move(l));
  }
  if (m.exit_after >= m.layers.size())
    throw ConfigError(r.field("exit_after"), fmt::format("must be below the layer count {}", m.layers.size()));
  if (auto f = r.number("pre_exit_fraction")) {
    if (!(*f > 0.0 && *f < 1.0)) throw ConfigError(r.field("pre_exit_fraction"), "must lie in (0, 1)");
    if (std::abs(*f - m.pre_exit_fraction()) > 1e-3)
      throw ConfigError(r.field("pre_exit_fraction"),
                        fmt::format("declared {} but the layer cycles give {:.6f}", *f, m.pre_exit_fraction()));
  }
  if (r.has("metadata")) m.metadata = r.raw("metadata");
  r.finish();
  return m;
}

ModelSpec load_model(const std::filesystem::path& path) { return parse_model(json_util::read_file(path), path.string()); }

nlohmann::json to_json(const ModelSpec& m) {
  auto layers = nlohmann::json::array();
  for (const auto& l : m.layers) {
    nlohmann::json j{{"label", l.label}, {"cpu_cycles", l.cpu_cycles}};
    if (l.accel_element_count) j["accel_element_count"] = *l.accel_element_count;
    layers.push_back(std::move(j));
  }
  return {{"name", m.name},
          {"exit_after", m.exit_after},
          {"exit_head_cycles", m.exit_head_cycles},
          {"pre_exit_fraction", m.pre_exit_fraction()},
          {"layers", layers},
          {"metadata", m.metadata}};
}

std::string_view to_string(Mapping mapping) { return mapping == Mapping::Cpu ? "cpu" : "accel"; }

Mapping parse_mapping(std::string_view text) {
  if (text == "cpu") return Mapping::Cpu;
  if (text == "accel") return Mapping::Accel;
  throw ConfigError("mapping", fmt::format("'{}' is not one of cpu, accel", text));
}

double normalized_entropy(std::span<const double> probs) {
  if (probs.size() < 2) throw DomainError("entropy needs at least two classes");
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) throw DomainError(fmt::format("invalid probability {}", p));
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DomainError(fmt::format("probabilities sum to {}", sum));
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::clamp(h / std::log(static_cast<double>(probs.size())), 0.0, 1.0);
}

bool should_exit(std::span<const double> probs, double tau) { return normalized_entropy(probs) < tau; }

double SampleRng::uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

double SampleRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> ConfidenceSource::draw(SampleRng& rng) const {
  if (!fixed.empty()) return fixed;
  std::vector<double> logits(classes);
  for (double& l : logits) l = rng.normal() * logit_scale;
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& l : logits) z += (l = std::exp(l - top));
  for (double& l : logits) l /= z;
  return logits;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<bool> parse_decisions(const nlohmann::json& j, const std::string& where) {
  const nlohmann::json& arr = j.is_object() && j.contains("decisions") ? j.at("decisions") : j;
  if (!arr.is_array() || arr.empty()) throw ConfigError(where, "expected a non-empty array of booleans");
  std::vector<bool> out;
  for (const auto& v : arr) {
    if (!v.is_boolean()) throw ConfigError(where, "expected a non-empty array of booleans");
    out.push_back(v.get<bool>());
  }
  return out;
}

}  // namespace

ExitPolicy parse_policy(const nlohmann::json& doc, const std::string& path, const std::filesystem::path& base_dir) {
  json_util::ObjectReader r(doc, path);
  const std::string mode = r.require_string("mode");
  ExitPolicy out;
  if (mode == "fixed-rate") {
    const double p = r.require_number("p");
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(r.field("p"), "must lie in [0, 1]");
    out = policy::FixedRate{p};
  } else if (mode == "entropy") {
    policy::Entropy e;
    e.tau = r.require_number("tau");
    if (!(e.tau >= 0.0 && e.tau <= 1.0)) throw ConfigError(r.field("tau"), "must lie in [0, 1]");
    if (r.has("source")) {
      json_util::ObjectReader s(r.raw("source"), r.field("source"));
      if (s.has("fixed")) {
        const auto& f = s.raw("fixed");
        if (!f.is_array()) throw ConfigError(s.field("fixed"), "must be an array of probabilities");
        for (const auto& v : f) {
          if (!v.is_number()) throw ConfigError(s.field("fixed"), "must be an array of probabilities");
          e.source.fixed.push_back(v.get<double>());
        }
        try {
          normalized_entropy(e.source.fixed);
        } catch (const DomainError& err) {
          throw ConfigError(s.field("fixed"), err.what());
        }
        e.source.classes = static_cast<std::uint32_t>(e.source.fixed.size());
      }
      if (auto k = s.u64("classes")) {
        if (*k < 2 || *k > 4096) throw ConfigError(s.field("classes"), "must lie in [2, 4096]");
        e.source.classes = static_cast<std::uint32_t>(*k);
      }
      if (auto sc = s.number("logit_scale")) {
        if (!(*sc >= 0.0)) throw ConfigError(s.field("logit_scale"), "must be non-negative");
        e.source.logit_scale = *sc;
      }
      s.finish();
    }
    out = e;
  } else if (mode == "trace") {
    policy::Trace t;
    if (r.has("decisions")) {
      t.decisions = parse_decisions(r.raw("decisions"), r.field("decisions"));
      t.origin = "inline";
    } else {
      const std::filesystem::path file = base_dir / r.require_string("file");
      t.decisions = parse_decisions(json_util::read_file(file), file.string());
      t.origin = r.raw("file").get<std::string>();
    }
    out = t;
  } else {
    throw ConfigError(r.field("mode"), fmt::format("'{}' is not one of fixed-rate, entropy, trace", mode));
  }
  r.finish();
  return out;
}

nlohmann::json to_json(const ExitPolicy& p) {
  return std::visit(overloaded{
                        [](const policy::FixedRate& f) -> nlohmann::json { return {{"mode", "fixed-rate"}, {"p", f.p}}; },
                        [](const policy::Entropy& e) -> nlohmann::json {
                          nlohmann::json src{{"classes", e.source.classes}};
                          if (e.source.fixed.empty()) {
                            src["logit_scale"] = e.source.logit_scale;
                          } else {
                            src["fixed"] = e.source.fixed;
                          }
                          return {{"mode", "entropy"}, {"tau", e.tau}, {"source", src}};
                        },
                        [](const policy::Trace& t) -> nlohmann::json {
                          return {{"mode", "trace"}, {"origin", t.origin}, {"length", t.decisions.size()}};
                        },
                    },
                    p);
}

double implied_exit_rate(const ExitPolicy& p) {
  return std::visit(overloaded{
                        [](const policy::FixedRate& f) { return f.p; },
                        [](const policy::Entropy& e) {
                          if (e.source.fixed.empty())
                            throw ConfigError("policy.source",
                                              "expected-value mode needs a fixed confidence source or a fixed rate");
                          return should_exit(e.source.fixed, e.tau) ? 1.0 : 0.0;
                        },
                        [](const policy::Trace& t) {
                          const auto n = std::count(t.decisions.begin(), t.decisions.end(), true);
                          return static_cast<double>(n) / static_cast<double>(t.decisions.size());
                        },
                    },
                    p);
}

double fit_exit_fraction(double p, double speedup) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("exit rate must lie in (0, 1]");
  if (!(speedup >= 1.0) || !std::isfinite(speedup)) throw DomainError("speedup must be finite and at least 1");
  const double f = (1.0 / speedup - 1.0 + p) / p;
  if (!(f > 0.0 && f <= 1.0))
    throw DomainError(fmt::format("speedup {} is out of reach at exit rate {}", speedup, p));
  return f;
}

double expected_cost(const ModelSpec& model, double p, Mapping mapping, double s) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("exit rate must lie in [0, 1]");
  if (!(s > 0.0)) throw DomainError("accelerator speedup must be positive");
  auto cost = [&](const LayerSpec& l) {
    const double c = static_cast<double>(l.cpu_cycles);
    return mapping == Mapping::Accel && l.accel_element_count ? c / s : c;
  };
  double pre = static_cast<double>(model.exit_head_cycles);
  double post = 0.0;
  for (std::size_t i = 0; i < model.layers.size(); ++i) (i <= model.exit_after ? pre : post) += cost(model.layers[i]);
  return pre + (1.0 - p) * post;
}

namespace {

class SampleDriver {
 public:
  SampleDriver(const ModelSpec& model, const BenchmarkOptions& options, Platform& platform)
      : model_(model), options_(options), platform_(platform) {
    if (options_.mapping == Mapping::Accel) {
      XaifSocket* socket = platform_.xaif().socket(options_.slot);
      if (!socket) throw NoSuchSlot(fmt::format("no accelerator attached to slot {}", options_.slot));
      line_ = socket->irq_line().id;
    }
  }

  std::pair<SampleResult, EnergyLedger> run(const std::function<bool()>& decide) {
    const Snapshot start = platform_.snapshot();
    segment(0, model_.exit_after + 1, true);
    if (model_.exit_head_cycles > 0) {
      platform_.cpu().push(cpu_op::Compute{model_.exit_head_cycles, options_.intensity.cpu_pre_exit});
    }
    platform_.run();
    const bool exited = decide();
    if (!exited) {
      segment(model_.exit_after + 1, model_.layers.size(), false);
      platform_.run();
    }
    const Snapshot end = platform_.snapshot();
    EnergyLedger ledger = platform_.energy(start, end, options_.costs, options_.leak);
    return {{exited, end.time - start.time, ledger.total_j()}, std::move(ledger)};
  }

 private:
  void segment(std::size_t from, std::size_t to, bool pre) {
    const SegmentIntensity& w = options_.intensity;
    for (std::size_t i = from; i < to; ++i) {
      const LayerSpec& l = model_.layers[i];
      if (options_.mapping == Mapping::Accel && l.accel_element_count) {
        OffloadCommand cmd;
        cmd.kernel_id = nmv::kKernelTimed;
        cmd.element_count = static_cast<std::uint32_t>(*l.accel_element_count);
        cmd.cycles_per_element = options_.cycles_per_element;
        cmd.intensity = pre ? w.accel_pre_exit : w.accel_post_exit;
        platform_.cpu().push(cpu_op::Offload{options_.slot, cmd});
        platform_.cpu().push(cpu_op::WaitForInterrupt{line_});
      } else {
        platform_.cpu().push(cpu_op::Compute{l.cpu_cycles, pre ? w.cpu_pre_exit : w.cpu_post_exit});
      }
    }
  }

  const ModelSpec& model_;
  const BenchmarkOptions& options_;
  Platform& platform_;
  std::uint32_t line_ = 0;
};

}  // namespace

ExitOutcome run_benchmark(const ModelSpec& model, const ExitPolicy& policy, const BenchmarkOptions& options,
                          Platform& platform) {
  if (options.samples == 0) throw ConfigError("samples", "must be at least 1");
  SampleDriver driver(model, options, platform);
  ExitOutcome out;
  out.expected_value = options.expected_value;

  if (options.expected_value) {
    const double p = implied_exit_rate(policy);
    auto [early, early_ledger] = driver.run([] { return true; });
    auto [full, full_ledger] = driver.run([] { return false; });
    out.samples = 1;
    out.exit_rate = p;
    out.exited = p >= 0.5 ? 1 : 0;
    out.mean_cycles = p * static_cast<double>(early.cycles) + (1.0 - p) * static_cast<double>(full.cycles);
    out.ledger = early_ledger.scaled(p);
    out.ledger += full_ledger.scaled(1.0 - p);
    out.mean_energy_j = out.ledger.total_j();
    if (options.keep_samples) out.per_sample = {early, full};
    return out;
  }

  SampleRng rng(options.seed);
  std::uint64_t index = 0;
  auto decide = [&]() -> bool {
    return std::visit(overloaded{
                          [&](const policy::FixedRate& f) { return rng.uniform() < f.p; },
                          [&](const policy::Entropy& e) { return should_exit(e.source.draw(rng), e.tau); },
                          [&](const policy::Trace& t) { return static_cast<bool>(t.decisions[index % t.decisions.size()]); },
                      },
                      policy);
  };

  EnergyLedger total;
  double cycles = 0.0;
  for (index = 0; index < options.samples; ++index) {
    auto [s, ledger] = driver.run(decide);
    out.exited += s.exited ? 1 : 0;
    cycles += static_cast<double>(s.cycles);
    total += ledger;
    if (options.keep_samples) out.per_sample.push_back(s);
  }
  const double n = static_cast<double>(options.samples);
  out.samples = options.samples;
  out.exit_rate = static_cast<double>(out.exited) / n;
  out.mean_cycles = cycles / n;
  out.ledger = total.scaled(1.0 / n);
  out.mean_energy_j = out.ledger.total_j();
  return out;
}

nlohmann::json to_json(const ExitOutcome& o) {
  nlohmann::json j{{"mode", o.expected_value ? "expected-value" : "stochastic"},
                   {"samples", o.samples},
                   {"exit_rate", o.exit_rate},
                   {"mean_cycles", o.mean_cycles},
                   {"mean_energy_j", o.mean_energy_j},
                   {"energy", o.ledger.to_json()}};
  if (!o.expected_value) j["exited"] = o.exited;
  if (!o.per_sample.empty()) {
    auto arr = nlohmann::json::array();
    for (const auto& s : o.per_sample) arr.push_back({{"exited", s.exited}, {"cycles", s.cycles}, {"energy_j", s.energy_j}});
    j["per_sample"] = arr;
  }
  return j;
}

}  // namespace xheep
