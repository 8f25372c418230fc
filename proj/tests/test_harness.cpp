/*
 * Copyright 2026 The driftsel Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "driftsel/harness.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "driftsel/config.hpp"
#include "test_support.hpp"

using namespace driftsel;

namespace {

DriftScenario small_scenario(std::uint64_t seed) {
  DriftScenario scenario;
  scenario.kind = DriftKind::none;
  scenario.period_count = 8;
  scenario.samples_per_period = 60;
  scenario.positive_rate = 0.3;
  scenario.dim = 3;
  scenario.seed = seed;
  return scenario;
}

ExperimentConfig small_config() {
  ExperimentConfig config;
  config.scenario = small_scenario(31);
  config.family = ModelFamily::lr;
  config.mechanisms = all_mechanisms();
  config.repeats = 2;
  config.master_seed = 7;
  config.registry.tune = false;
  config.jaccard_ks = {1, 3};
  config.workers = 1;
  return config;
}

std::string results_string(const ResultsTable& results) {
  std::ostringstream out;
  write_results_csv(results, out);
  return out.str();
}

std::filesystem::path temp_dir(const std::string& leaf) {
  const auto dir = std::filesystem::temp_directory_path() / "driftsel_harness_tests" / leaf;
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("row law: repeats x testing periods x mechanisms, in order") {
  const ExperimentConfig config = small_config();
  const ResultsTable results = run_experiment(config);
  // l = 8: testing periods 5..8.
  REQUIRE(results.rows.size() == 2u * 4u * 9u);
  CHECK(results.jaccard_ks == std::vector<int>{1, 3});

  std::size_t i = 0;
  for (int run = 1; run <= 2; ++run) {
    for (int period = 5; period <= 8; ++period) {
      for (const Mechanism mechanism : config.mechanisms) {
        const ResultRow& row = results.rows[i++];
        CHECK(row.run == run);
        CHECK(row.period == period);
        CHECK(row.mechanism == to_string(mechanism));
        // Registry at t holds t - 4 models; the ranking is a permutation.
        CHECK(row.ranking.size() == static_cast<std::size_t>(period - 4));
        CHECK(row.scores.size() == row.ranking.size());
        CHECK(row.top1_model_id == row.ranking.front());
      }
    }
  }
}

TEST_CASE("rank metrics are null where undefined") {
  const ResultsTable results = run_experiment(small_config());
  for (const ResultRow& row : results.rows) {
    REQUIRE(row.jaccard.size() == 2);  // ks {1, 3}
    if (row.period == 5) {
      // One model in the registry: rank agreement is vacuous.
      CHECK_FALSE(row.tau.has_value());
      CHECK_FALSE(row.jaccard[0].has_value());
      CHECK_FALSE(row.jaccard[1].has_value());
    } else {
      CHECK(row.tau.has_value());
      CHECK(row.jaccard[0].has_value());
      // k = 3 needs at least 3 models, so it stays null at period 6.
      CHECK(row.jaccard[1].has_value() == (row.period >= 7));
    }
    CHECK(row.top1_auc.has_value());
    if (row.mechanism == "oracle" && row.tau.has_value()) {
      CHECK(*row.tau == doctest::Approx(1.0));
      CHECK(*row.jaccard[0] == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("experiments are deterministic in the config and sensitive to the seed") {
  const ExperimentConfig config = small_config();
  const std::string first = results_string(run_experiment(config));
  const std::string second = results_string(run_experiment(config));
  CHECK(first == second);

  // nn training consumes the run seed, so a different master seed must move
  // at least one score.
  ExperimentConfig noisy = small_config();
  noisy.family = ModelFamily::nn;
  LearnerSpec thin = default_spec(ModelFamily::nn);
  thin.params["width"] = 4;
  thin.params["epochs"] = 50;
  noisy.registry.fixed_spec = thin;
  const std::string a = results_string(run_experiment(noisy));
  noisy.master_seed = 8;
  const std::string b = results_string(run_experiment(noisy));
  CHECK(a != b);
}

TEST_CASE("parallel execution reproduces the sequential table") {
  ExperimentConfig config = small_config();
  config.repeats = 3;
  const std::string sequential = results_string(run_experiment(config));
  config.workers = 3;
  const std::string parallel = results_string(run_experiment(config));
  CHECK(sequential == parallel);
}

TEST_CASE("top1_auc matches an external rebuild of the registry") {
  const ExperimentConfig config = small_config();
  const PeriodizedDataset dataset = load_dataset(config);
  const ResultsTable results = run_experiment(config, dataset);
  for (const ResultRow& row : results.rows) {
    if (row.run != 2 || row.period != 7) continue;
    const ModelRegistry registry = build_registry_for_period(
        dataset, config.family, 7, config.master_seed ^ 2ull, config.registry);
    const auto auc = evaluate_on_period(registry.record(row.top1_model_id), dataset, 7);
    REQUIRE(auc.has_value());
    CHECK(*row.top1_auc == doctest::Approx(*auc).epsilon(1e-12));
  }
}

TEST_CASE("oracle is the tau reference even when not listed") {
  ExperimentConfig config = small_config();
  config.mechanisms = {Mechanism::stationary};
  const ResultsTable results = run_experiment(config);
  REQUIRE(results.rows.size() == 2u * 4u);
  for (const ResultRow& row : results.rows) {
    CHECK(row.mechanism == "stationary");
    CHECK(row.tau.has_value() == (row.period > 5));
  }
}

TEST_CASE("single-class test periods are flagged and kept out of aggregates") {
  ExperimentConfig config = small_config();
  PeriodizedDataset dataset = load_dataset(config);
  dataset.periods[6].labels.setZero();  // period 7 becomes single-class
  const ResultsTable results = run_experiment(config, dataset);

  const Summary summary = aggregate(results);
  for (const ResultRow& row : results.rows) {
    if (row.period != 7) {
      CHECK_FALSE(row.has_flag("single_class_period"));
      continue;
    }
    CHECK(row.has_flag("single_class_period"));
    CHECK_FALSE(row.top1_auc.has_value());
    CHECK_FALSE(row.tau.has_value());
    if (row.mechanism == "oracle") {
      // Degrades to the periodic baseline rather than peeking at labels.
      CHECK(row.ranking == std::vector<int>{3, 2, 1});
    }
  }
  for (const SummaryRow& row : summary.rows) {
    if (row.period == 7) {
      // The grid keeps its slot, but nothing from the period contributes.
      CHECK(row.count == 0);
      CHECK_FALSE(row.mean_tau.has_value());
      CHECK_FALSE(row.kendall_w.has_value());
    }
    if (row.period == 0) CHECK(row.count == 2 * 3);  // three clean periods remain
  }
}

TEST_CASE("results csv round-trips through read_results_csv") {
  const ExperimentConfig config = small_config();
  const ResultsTable results = run_experiment(config);
  const auto dir = temp_dir("roundtrip");
  const std::string path = (dir / "results.csv").string();
  write_results_csv(results, path);

  const ResultsTable loaded = read_results_csv(path);
  CHECK(loaded.jaccard_ks == results.jaccard_ks);
  REQUIRE(loaded.rows.size() == results.rows.size());
  for (std::size_t i = 0; i < loaded.rows.size(); ++i) {
    const ResultRow& a = results.rows[i];
    const ResultRow& b = loaded.rows[i];
    CHECK(b.run == a.run);
    CHECK(b.period == a.period);
    CHECK(b.mechanism == a.mechanism);
    CHECK(b.top1_model_id == a.top1_model_id);
    CHECK(b.ranking == a.ranking);
    CHECK(b.flags == a.flags);
    REQUIRE(b.tau.has_value() == a.tau.has_value());
    if (a.tau) CHECK(*b.tau == *a.tau);  // full-precision serialization
    REQUIRE(b.top1_auc.has_value() == a.top1_auc.has_value());
    if (a.top1_auc) CHECK(*b.top1_auc == *a.top1_auc);
  }

  // A report rebuilt from the CSV must match the original aggregation
  // byte for byte.
  std::ostringstream original, rebuilt;
  write_summary_csv(aggregate(results), original);
  write_summary_csv(aggregate(loaded), rebuilt);
  CHECK(original.str() == rebuilt.str());

  std::ofstream bad((dir / "bad.csv").string());
  bad << "run,period,mechanism\n1,5,oracle\n";
  bad.close();
  CHECK_THROWS_AS(read_results_csv((dir / "bad.csv").string()), std::runtime_error);
}

TEST_CASE("summary covers periods plus a pooled block with scott-knott groups") {
  const ExperimentConfig config = small_config();
  const Summary summary = aggregate(run_experiment(config));
  int pooled = 0, period_rows = 0;
  for (const SummaryRow& row : summary.rows) {
    if (row.period == 0) {
      ++pooled;
      CHECK(row.sk_group.has_value());
      CHECK(row.count == 2 * 4);
    } else {
      ++period_rows;
      CHECK_FALSE(row.sk_group.has_value());
      CHECK(row.count == 2);
      CHECK(row.mean_auc == doctest::Approx(row.mean_auc));  // finite
      // Two runs of two models or more: W is defined from period 6 on.
      CHECK(row.kendall_w.has_value() == (row.period > 5));
    }
  }
  CHECK(pooled == 9);
  CHECK(period_rows == 9 * 4);
}

TEST_CASE("config files parse into a validated experiment") {
  const auto dir = temp_dir("config");
  {
    std::ofstream scenario((dir / "scenario.cfg").string());
    scenario << "kind = none\nperiods = 8\nsamples_per_period = 60\n"
             << "positive_rate = 0.3\ndim = 3\nseed = 31\n";
  }
  KeyValueConfig kv = KeyValueConfig::parse_string(
      "scenario = " + (dir / "scenario.cfg").string() +
          "\nfamily = cart\nmechanisms = oracle, tbm, rtbm\nrepeats = 3\nseed = 99\n"
          "jaccard_k = 1, 2\ntune = false\nspec.max_depth = 3\nworkers = 2\n",
      "test");
  const ExperimentConfig config = experiment_config_from(kv);
  CHECK(config.scenario->period_count == 8);
  CHECK(config.family == ModelFamily::cart);
  CHECK(config.mechanisms ==
        std::vector<Mechanism>{Mechanism::oracle, Mechanism::tbm, Mechanism::rtbm});
  CHECK(config.repeats == 3);
  CHECK(config.master_seed == 99);
  CHECK(config.jaccard_ks == std::vector<int>{1, 2});
  CHECK(config.workers == 2);
  CHECK_FALSE(config.registry.tune);
  REQUIRE(config.registry.fixed_spec.has_value());
  CHECK(config.registry.fixed_spec->at_int("max_depth", 0) == 3);
  CHECK(config.registry.fixed_spec->family == ModelFamily::cart);

  KeyValueConfig typo = KeyValueConfig::parse_string("scenario = x\nrepeat = 2\n", "test");
  CHECK_THROWS_AS(experiment_config_from(typo), std::invalid_argument);
}

TEST_CASE("config validation rejects inconsistent experiments") {
  ExperimentConfig config = small_config();
  config.repeats = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);

  config = small_config();
  config.mechanisms = {Mechanism::tbm, Mechanism::tbm};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);

  config = small_config();
  config.mechanisms.clear();
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);

  config = small_config();
  config.csv_path = "also.csv";  // two sources
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);

  config = small_config();
  config.scenario.reset();  // no source
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);

  config = small_config();
  config.jaccard_ks = {0};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("emit_report writes tables and trend plots") {
  const ExperimentConfig config = small_config();
  const ResultsTable results = run_experiment(config);
  const Summary summary = aggregate(results);
  const auto dir = temp_dir("report");
  emit_report(summary, results, dir.string());
  for (const char* name :
       {"results.csv", "summary.csv", "rankings.csv", "auc_trend.svg", "tau_trend.svg",
        "jaccard_trend.svg", "w_trend.svg"}) {
    CHECK_MESSAGE(std::filesystem::exists(dir / name), name);
  }
  // rankings.csv carries one line per (row, rank) plus the header.
  std::ifstream rankings((dir / "rankings.csv").string());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(rankings, line)) ++lines;
  std::size_t expected = 1;
  for (const ResultRow& row : results.rows) expected += row.ranking.size();
  CHECK(lines == expected);
}
