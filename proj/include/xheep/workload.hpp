// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "xheep/energy.hpp"
#include "xheep/platform.hpp"
#include "xheep/xaif.hpp"

namespace xheep {

struct LayerSpec {
  std::string label;
  SimTime cpu_cycles = 0;
  /// Present when the layer can run on the near-memory accelerator.
  std::optional<std::uint64_t> accel_element_count;
};

/// Abstract early-exit network: a timed layer sequence with one exit head
/// after layer `exit_after`.
struct ModelSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  std::size_t exit_after = 0;
  SimTime exit_head_cycles = 0;
  /// Carried through untouched (accuracy figures, derivation notes).
  nlohmann::json metadata = nlohmann::json::object();

  SimTime total_cycles() const;
  /// Layers up to and including the exit head.
  SimTime pre_exit_cycles() const;
  SimTime post_exit_cycles() const { return total_cycles() - pre_exit_cycles(); }
  double pre_exit_fraction() const;
};

/// ConfigError naming the offending field.
ModelSpec parse_model(const nlohmann::json& doc, const std::string& path = "model");
ModelSpec load_model(const std::filesystem::path& path);
nlohmann::json to_json(const ModelSpec& model);

enum class Mapping : std::uint8_t { Cpu, Accel };
std::string_view to_string(Mapping mapping);
Mapping parse_mapping(std::string_view text);

/// H(p) / ln K with 0 ln 0 = 0. DomainError for K < 2, negative or
/// non-finite entries, or a sum more than 1e-9 away from 1.
double normalized_entropy(std::span<const double> probs);

/// Strict: exits iff normalized_entropy(probs) < tau.
bool should_exit(std::span<const double> probs, double tau);

/// Deterministic 64-bit stream with platform-independent real draws.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : gen_(seed) {}
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Box-Muller, no cached second value).
  double normal();
  std::uint64_t bits() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

/// Probability vectors for the entropy policy.
struct ConfidenceSource {
  /// Fixed distribution returned for every sample; empty selects random logits.
  std::vector<double> fixed;
  std::uint32_t classes = 10;
  /// Softmax of N(0, logit_scale^2) logits.
  double logit_scale = 3.0;

  std::vector<double> draw(SampleRng& rng) const;
};

namespace policy {
struct FixedRate {
  double p = 0.0;
};
struct Entropy {
  double tau = 0.5;
  ConfidenceSource source;
};
/// Recorded decisions, replayed cyclically.
struct Trace {
  std::vector<bool> decisions;
  std::string origin;
};
}  // namespace policy

using ExitPolicy = std::variant<policy::FixedRate, policy::Entropy, policy::Trace>;

/// `base_dir` resolves a trace file path.
ExitPolicy parse_policy(const nlohmann::json& doc, const std::string& path, const std::filesystem::path& base_dir);
nlohmann::json to_json(const ExitPolicy& policy);

/// Exit probability a policy implies for expected-value mode. ConfigError for
/// policies without one (entropy over random confidences).
double implied_exit_rate(const ExitPolicy& policy);

/// f = (1/S - 1 + p) / p: the pre-exit fraction that turns exit rate `p`
/// into CPU-only speedup `S`. DomainError unless the result lies in (0, 1].
double fit_exit_fraction(double p, double speedup);

/// Closed form: pre + (1 - p) * post, where accelerated layers count
/// cpu_cycles / s. Head cycles stay on the CPU.
double expected_cost(const ModelSpec& model, double p, Mapping mapping, double s);

/// Dynamic activity weights per segment (1.0 = nominal).
struct SegmentIntensity {
  double cpu_pre_exit = 1.0;
  double cpu_post_exit = 1.0;
  double accel_pre_exit = 1.0;
  double accel_post_exit = 1.0;

  bool operator==(const SegmentIntensity&) const = default;
};

struct BenchmarkOptions {
  Mapping mapping = Mapping::Cpu;
  std::uint64_t samples = 1;
  std::uint64_t seed = 0;
  /// Simulate one exiting and one full sample and weight them by p.
  bool expected_value = false;
  std::uint32_t slot = 0;
  Rational cycles_per_element{16384, 65536};
  SegmentIntensity intensity;
  DynamicCostTable costs;
  LeakageModel leak;
  /// Keep per-sample records (stochastic mode).
  bool keep_samples = false;
};

struct SampleResult {
  bool exited = false;
  SimTime cycles = 0;
  double energy_j = 0.0;
};

struct ExitOutcome {
  std::uint64_t samples = 0;
  std::uint64_t exited = 0;
  double exit_rate = 0.0;
  double mean_cycles = 0.0;
  double mean_energy_j = 0.0;
  bool expected_value = false;
  /// Mean per-sample energy breakdown.
  EnergyLedger ledger;
  std::vector<SampleResult> per_sample;
};

/// Drives `platform` through the model once per sample. Accelerated layers
/// are offloaded to `slot` and the core waits for its interrupt.
ExitOutcome run_benchmark(const ModelSpec& model, const ExitPolicy& policy, const BenchmarkOptions& options,
                          Platform& platform);

nlohmann::json to_json(const ExitOutcome& outcome);

}  // namespace xheep
