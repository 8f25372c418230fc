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
#include "driftsel/registry.hpp"

#include <sstream>

#include "doctest.h"
#include "driftsel/data.hpp"
#include "driftsel/metrics.hpp"
#include "driftsel/stream_gen.hpp"

using namespace driftsel;

namespace {

PeriodizedDataset small_stream(double positive_rate = 0.3, std::uint64_t seed = 3) {
  DriftScenario scenario;
  scenario.kind = DriftKind::none;
  scenario.period_count = 8;
  scenario.samples_per_period = 60;
  scenario.positive_rate = positive_rate;
  scenario.dim = 3;
  scenario.seed = seed;
  return generate_drift_stream(scenario);
}

RegistryOptions no_tune() {
  RegistryOptions options;
  options.tune = false;
  return options;
}

Matrix gather(const PeriodizedDataset& dataset, int start, int end) {
  Eigen::Index rows = 0;
  for (int p = start; p <= end; ++p) rows += dataset.period(p).size();
  Matrix out(rows, dataset.dim());
  Eigen::Index at = 0;
  for (int p = start; p <= end; ++p) {
    out.middleRows(at, dataset.period(p).size()) = dataset.period(p).features;
    at += dataset.period(p).size();
  }
  return out;
}

}  // namespace

TEST_CASE("registry layout follows the sliding window") {
  const PeriodizedDataset dataset = small_stream();

  const ModelRegistry first = build_registry_for_period(dataset, ModelFamily::lr, 5, 1, no_tune());
  REQUIRE(first.size() == 1);
  CHECK(first.window_length() == 4);
  CHECK(first.record(1).window.start == 1);
  CHECK(first.record(1).window.end == 4);

  const ModelRegistry last = build_registry_for_period(dataset, ModelFamily::lr, 8, 1, no_tune());
  REQUIRE(last.size() == 4);
  for (int j = 1; j <= 4; ++j) {
    CHECK(last.record(j).model_id == j);
    CHECK(last.record(j).window.start == j);
    CHECK(last.record(j).window.end == j + 3);
    CHECK(last.record(j).window.length() == 4);
  }
  CHECK(last.newest().model_id == 4);
  CHECK(last.newest().window.end == 7);
  CHECK(&last.dataset() == &dataset);

  CHECK_THROWS_AS(build_registry_for_period(dataset, ModelFamily::lr, 4, 1, no_tune()),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_registry_for_period(dataset, ModelFamily::lr, 9, 1, no_tune()),
                  std::invalid_argument);
  CHECK_THROWS_AS(last.record(0), std::out_of_range);
  CHECK_THROWS_AS(last.record(5), std::out_of_range);
}

TEST_CASE("prefix shares the fitted models and matches an earlier build") {
  const PeriodizedDataset dataset = small_stream();
  const ModelRegistry full = build_registry_for_period(dataset, ModelFamily::rf, 8, 7, no_tune());
  const ModelRegistry direct =
      build_registry_for_period(dataset, ModelFamily::rf, 6, 7, no_tune());
  const ModelRegistry view = full.prefix(2);

  REQUIRE(view.size() == 2);
  REQUIRE(direct.size() == 2);
  for (int j = 1; j <= 2; ++j) {
    CHECK(view.record(j).model.get() == full.record(j).model.get());  // shared, not refit
    CHECK(view.record(j).seed == direct.record(j).seed);
    CHECK(view.record(j).spec.params == direct.record(j).spec.params);
    const Matrix probe = dataset.period(8).features;
    CHECK(view.record(j).scores_on(probe) == direct.record(j).scores_on(probe));
  }
  CHECK_THROWS_AS(full.prefix(0), std::out_of_range);
  CHECK_THROWS_AS(full.prefix(5), std::out_of_range);
}

TEST_CASE("builds are deterministic in the run seed") {
  const PeriodizedDataset dataset = small_stream();
  const Matrix probe = dataset.period(8).features;
  const ModelRegistry a = build_registry_for_period(dataset, ModelFamily::rf, 8, 5, no_tune());
  const ModelRegistry b = build_registry_for_period(dataset, ModelFamily::rf, 8, 5, no_tune());
  const ModelRegistry c = build_registry_for_period(dataset, ModelFamily::rf, 8, 6, no_tune());
  bool any_differs = false;
  for (int j = 1; j <= a.size(); ++j) {
    CHECK(a.record(j).scores_on(probe) == b.record(j).scores_on(probe));
    any_differs = any_differs || a.record(j).scores_on(probe) != c.record(j).scores_on(probe);
  }
  CHECK(any_differs);
}

TEST_CASE("the minority-rate gate controls downsampling") {
  // 30% positives is at or above the default 25% floor: no rebalancing, so
  // the record's scaler matches one fitted on the raw window.
  const PeriodizedDataset dataset = small_stream(0.3);
  const ModelRegistry registry =
      build_registry_for_period(dataset, ModelFamily::lr, 5, 1, no_tune());
  const RobustScaler raw = fit_scaler(gather(dataset, 1, 4));
  CHECK(registry.record(1).scaler.median == raw.median);
  CHECK(registry.record(1).scaler.range == raw.range);

  // 10% positives triggers it; with ratio 1 the negatives shrink to the
  // positive count and the scaler sees a different sample.
  const PeriodizedDataset skewed = small_stream(0.1);
  RegistryOptions options = no_tune();
  options.downsample_ratio = 1.0;
  const ModelRegistry balanced =
      build_registry_for_period(skewed, ModelFamily::lr, 5, 1, options);
  const RobustScaler raw_skewed = fit_scaler(gather(skewed, 1, 4));
  CHECK(balanced.record(1).scaler.median != raw_skewed.median);
}

TEST_CASE("tune-once shares the first window's spec across records") {
  const PeriodizedDataset dataset = small_stream();
  RegistryOptions options;
  options.tune = true;
  options.tune_budget = 4;
  options.tune_folds = 2;
  const ModelRegistry registry =
      build_registry_for_period(dataset, ModelFamily::cart, 8, 21, options);
  for (int j = 2; j <= registry.size(); ++j) {
    CHECK(registry.record(j).spec.params == registry.record(1).spec.params);
  }

  options.tune = false;
  const ModelRegistry plain = build_registry_for_period(dataset, ModelFamily::cart, 8, 21, options);
  CHECK(plain.record(1).spec.params == default_spec(ModelFamily::cart).params);
}

TEST_CASE("a fixed spec bypasses tuning and must match the family") {
  const PeriodizedDataset dataset = small_stream();
  RegistryOptions options;
  options.fixed_spec = default_spec(ModelFamily::cart);
  options.fixed_spec->params["max_depth"] = 3;
  const ModelRegistry registry =
      build_registry_for_period(dataset, ModelFamily::cart, 8, 2, options);
  for (int j = 1; j <= registry.size(); ++j) {
    CHECK(registry.record(j).spec.at_int("max_depth", 0) == 3);
  }
  CHECK_THROWS_AS(build_registry_for_period(dataset, ModelFamily::lr, 8, 2, options),
                  std::invalid_argument);
}

TEST_CASE("evaluate_on_period matches a by-hand auc and skips single-class periods") {
  const PeriodizedDataset dataset = small_stream();
  const ModelRegistry registry =
      build_registry_for_period(dataset, ModelFamily::lr, 8, 9, no_tune());
  const ModelRecord& record = registry.record(2);

  const std::optional<double> result = evaluate_on_period(record, dataset, 8);
  REQUIRE(result.has_value());
  const PeriodData& period = dataset.period(8);
  CHECK(*result == doctest::Approx(auc(record.scores_on(period.features), period.labels)));

  PeriodizedDataset degenerate = dataset;
  degenerate.periods[7].labels.setZero();
  CHECK_FALSE(evaluate_on_period(record, degenerate, 8).has_value());
}

TEST_CASE("manifest lists one line per record") {
  const PeriodizedDataset dataset = small_stream();
  const ModelRegistry registry =
      build_registry_for_period(dataset, ModelFamily::cart, 7, 4, no_tune());
  std::stringstream out;
  write_manifest_csv(registry, out);
  std::string line;
  std::getline(out, line);
  CHECK(line == "model_id,window_start,window_end,family,spec,seed");
  int lines = 0;
  while (std::getline(out, line)) {
    ++lines;
    CHECK(line.find("cart") != std::string::npos);
  }
  CHECK(lines == registry.size());
}
