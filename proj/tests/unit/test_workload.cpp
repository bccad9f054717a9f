// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <doctest.h>

#include <cmath>

#include "../support/gen.hpp"
#include "xheep/calibration.hpp"
#include "xheep/error.hpp"
#include "xheep/workload.hpp"

using namespace xheep;

namespace {

double oracle_entropy(const std::vector<double>& p) {
  long double h = 0.0L;
  for (double x : p)
    if (x > 0.0) h -= static_cast<long double>(x) * std::log(static_cast<long double>(x));
  return static_cast<double>(h / std::log(static_cast<long double>(p.size())));
}

ModelSpec toy_model(test::Gen& g) {
  ModelSpec m;
  m.name = "toy";
  const int layers = static_cast<int>(g.range(2, 6));
  for (int i = 0; i < layers; ++i) {
    const SimTime cycles = g.range(100, 20000);
    m.layers.push_back({"l" + std::to_string(i), cycles, cycles});
  }
  m.exit_after = g.below(layers - 1);
  return m;
}

BenchmarkOptions expected_options(Mapping mapping, const Calibration& cal, const std::string& model) {
  BenchmarkOptions o;
  o.mapping = mapping;
  o.expected_value = true;
  o.cycles_per_element = cal.cycles_per_element;
  o.intensity = cal.for_model(model);
  o.costs = cal.costs;
  return o;
}

PlatformConfig case_config() { return load_config(test::fixture("configs/case-study.json")); }

}  // namespace

TEST_SUITE("workload") {
  TEST_CASE("entropy anchors") {
    CHECK(normalized_entropy(std::vector<double>{1, 0, 0, 0}) == 0.0);
    CHECK(normalized_entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == 1.0);
    const double e = normalized_entropy(std::vector<double>{0.7, 0.1, 0.1, 0.1});
    CHECK(e == doctest::Approx(0.678).epsilon(1e-3));
    CHECK(e == doctest::Approx(oracle_entropy({0.7, 0.1, 0.1, 0.1})).epsilon(1e-12));
  }

  TEST_CASE("entropy domain errors") {
    CHECK_THROWS_AS(normalized_entropy(std::vector<double>{1.0}), DomainError);
    CHECK_THROWS_AS(normalized_entropy(std::vector<double>{0.5, 0.6}), DomainError);
    CHECK_THROWS_AS(normalized_entropy(std::vector<double>{1.5, -0.5}), DomainError);
    CHECK_THROWS_AS(normalized_entropy(std::vector<double>{NAN, 0.5}), DomainError);
  }

  TEST_CASE("entropy matches the direct formula (property)") {
    test::Gen g(81);
    for (int i = 0; i < 10000; ++i) {
      const auto p = g.distribution(g.range(2, 64));
      const double e = normalized_entropy(p);
      CHECK(std::abs(e - oracle_entropy(p)) <= 1e-12);
      CHECK(e >= 0.0);
      CHECK(e <= 1.0);
    }
  }

  TEST_CASE("exit decisions") {
    CHECK(should_exit(std::vector<double>{1, 0, 0, 0}, 0.35));
    CHECK_FALSE(should_exit(std::vector<double>{0.25, 0.25, 0.25, 0.25}, 0.45));
    CHECK_FALSE(should_exit(std::vector<double>{0.7, 0.1, 0.1, 0.1}, 0.45));
    CHECK_FALSE(should_exit(std::vector<double>{0.5, 0.5}, 1.0));
  }

  TEST_CASE("exit fractions from speedups") {
    CHECK(fit_exit_fraction(0.73, 1.6) == doctest::Approx(0.486).epsilon(1e-3));
    CHECK(fit_exit_fraction(0.82, 2.1) == doctest::Approx(0.361).epsilon(1e-3));
    CHECK_THROWS_AS(fit_exit_fraction(0.1, 5.0), DomainError);
    const ModelSpec tf = load_model(test::fixture("models/transformer-ee.json"));
    const ModelSpec cnn = load_model(test::fixture("models/cnn-ee.json"));
    CHECK(tf.pre_exit_fraction() == doctest::Approx(fit_exit_fraction(0.73, 1.6)).epsilon(1e-5));
    CHECK(cnn.pre_exit_fraction() == doctest::Approx(fit_exit_fraction(0.82, 2.1)).epsilon(1e-5));
  }

  TEST_CASE("closed-form cost composition") {
    const ModelSpec tf = load_model(test::fixture("models/transformer-ee.json"));
    const double full = expected_cost(tf, 0.0, Mapping::Cpu, 1.0);
    CHECK(full == doctest::Approx(double(tf.total_cycles())));
    CHECK(full / expected_cost(tf, 0.73, Mapping::Cpu, 1.0) == doctest::Approx(1.6).epsilon(1e-5));
    CHECK(full / expected_cost(tf, 0.73, Mapping::Accel, 3.4) == doctest::Approx(5.44).epsilon(1e-3));
  }

  TEST_CASE("expected cost is monotone in p and s (property)") {
    test::Gen g(82);
    for (int i = 0; i < 2000; ++i) {
      const ModelSpec m = toy_model(g);
      const double p1 = g.unit(), p2 = g.unit();
      const double s1 = 0.5 + 8 * g.unit(), s2 = 0.5 + 8 * g.unit();
      const Mapping map = g.coin() ? Mapping::Cpu : Mapping::Accel;
      if (p1 <= p2) CHECK(expected_cost(m, p1, map, s1) >= expected_cost(m, p2, map, s1));
      if (s1 <= s2) CHECK(expected_cost(m, p1, map, s1) >= expected_cost(m, p1, map, s2));
    }
  }

  TEST_CASE("simulated cycles match the closed form plus a fixed offload handshake (property)") {
    test::Gen g(83);
    const Calibration cal;
    const double s = 1.0 / cal.cycles_per_element.value();
    ModelSpec one;
    one.name = "toy";
    one.layers.push_back({"l0", 1000, 1000});
    Platform probe(case_config());
    const double handshake =
        run_benchmark(one, policy::FixedRate{0.0}, expected_options(Mapping::Accel, cal, one.name), probe).mean_cycles -
        expected_cost(one, 0.0, Mapping::Accel, s);
    CHECK(handshake > 0.0);
    for (int i = 0; i < 100; ++i) {
      const ModelSpec m = toy_model(g);
      const double p = g.unit();
      const Mapping map = g.coin() ? Mapping::Cpu : Mapping::Accel;
      Platform platform(case_config());
      const ExitOutcome o = run_benchmark(m, policy::FixedRate{p}, expected_options(map, cal, m.name), platform);
      const double pre = static_cast<double>(m.exit_after + 1);
      const double post = static_cast<double>(m.layers.size()) - pre;
      const double offloads = map == Mapping::Accel ? pre + (1.0 - p) * post : 0.0;
      const double closed = expected_cost(m, p, map, s) + handshake * offloads;
      CHECK(std::abs(o.mean_cycles - closed) <= offloads + 1e-9);
      CHECK(o.exit_rate == p);
    }
  }

  TEST_CASE("fixture benchmarks") {
    const Calibration cal = load_calibration(test::fixture("calibration/fitted.json"));
    const ModelSpec tf = load_model(test::fixture("models/transformer-ee.json"));
    const ModelSpec cnn = load_model(test::fixture("models/cnn-ee.json"));
    auto run = [&](const ModelSpec& m, double p, Mapping map) {
      Platform platform(case_config());
      return run_benchmark(m, policy::FixedRate{p}, expected_options(map, cal, m.name), platform);
    };
    const ExitOutcome base = run(tf, 0.0, Mapping::Cpu);
    CHECK(base.mean_cycles / run(tf, 0.73, Mapping::Cpu).mean_cycles == doctest::Approx(1.6).epsilon(0.01));
    CHECK(base.mean_cycles / run(tf, 0.0, Mapping::Cpu).mean_cycles == 1.0);
    const double cnn_speedup = run(cnn, 0.0, Mapping::Cpu).mean_cycles / run(cnn, 0.82, Mapping::Accel).mean_cycles;
    CHECK(cnn_speedup >= 7.1);
    CHECK(cnn_speedup <= 7.3);
  }

  TEST_CASE("fixed-rate statistics stay within 3 sigma") {
    const ModelSpec tf = load_model(test::fixture("models/transformer-ee.json"));
    for (double p : {0.73, 0.82}) {
      Platform platform(case_config());
      BenchmarkOptions o;
      o.samples = 10000;
      o.seed = 2026;
      const ExitOutcome r = run_benchmark(tf, policy::FixedRate{p}, o, platform);
      CHECK(r.samples == 10000);
      CHECK(std::abs(r.exit_rate - p) <= 3.0 * std::sqrt(p * (1 - p) / 10000));
    }
  }

  TEST_CASE("entropy policy with a fixed distribution is a step") {
    const ModelSpec tf = load_model(test::fixture("models/transformer-ee.json"));
    for (double tau : {0.3, 0.7}) {
      Platform platform(case_config());
      BenchmarkOptions o;
      o.samples = 50;
      policy::Entropy e{tau, {{0.7, 0.1, 0.1, 0.1}, 4, 3.0}};
      const ExitOutcome r = run_benchmark(tf, e, o, platform);
      CHECK(r.exit_rate == (tau > 0.678 ? 1.0 : 0.0));
    }
  }

  TEST_CASE("trace policy replays decisions") {
    const ModelSpec tf = load_model(test::fixture("models/transformer-ee.json"));
    Platform platform(case_config());
    BenchmarkOptions o;
    o.samples = 9;
    o.keep_samples = true;
    const ExitOutcome r = run_benchmark(tf, policy::Trace{{true, false, false}, "inline"}, o, platform);
    CHECK(r.exited == 3);
    REQUIRE(r.per_sample.size() == 9);
    CHECK(r.per_sample[3].exited);
    CHECK_FALSE(r.per_sample[4].exited);
  }

  TEST_CASE("seeded runs are reproducible") {
    const ModelSpec tf = load_model(test::fixture("models/transformer-ee.json"));
    auto once = [&](std::uint64_t seed) {
      Platform platform(case_config());
      BenchmarkOptions o;
      o.samples = 200;
      o.seed = seed;
      o.mapping = Mapping::Accel;
      return to_json(run_benchmark(tf, policy::Entropy{0.4, {}}, o, platform)).dump();
    };
    CHECK(once(9) == once(9));
    CHECK(once(9) != once(10));
  }

  TEST_CASE("model and policy parsing") {
    CHECK_THROWS_AS(parse_model({{"name", "x"}, {"layers", nlohmann::json::array()}}), ConfigError);
    const ModelSpec tf = load_model(test::fixture("models/transformer-ee.json"));
    CHECK(parse_model(to_json(tf)).layers.size() == tf.layers.size());
    nlohmann::json bad = to_json(tf);
    bad["pre_exit_fraction"] = 0.9;
    CHECK_THROWS_AS(parse_model(bad), ConfigError);
    const ExitPolicy p = parse_policy({{"mode", "entropy"}, {"tau", 0.45}}, "policy", ".");
    CHECK(std::get<policy::Entropy>(p).tau == 0.45);
    CHECK_THROWS_AS(implied_exit_rate(p), ConfigError);
    CHECK(implied_exit_rate(parse_policy({{"mode", "fixed-rate"}, {"p", 0.3}}, "policy", ".")) == 0.3);
    CHECK_THROWS_AS(parse_policy({{"mode", "coin"}}, "policy", "."), ConfigError);
  }

  TEST_CASE("rng stream is stable") {
    SampleRng a(7), b(7);
    for (int i = 0; i < 100; ++i) {
      const double u = a.uniform();
      CHECK(u == b.uniform());
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
  }
}
