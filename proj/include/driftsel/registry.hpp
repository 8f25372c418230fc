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
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "driftsel/data.hpp"
#include "driftsel/learners.hpp"
#include "driftsel/types.hpp"

namespace driftsel {

/// Inclusive 1-based period range a model was trained on.
struct TrainingWindow {
  int start = 0;
  int end = 0;

  int length() const { return end - start + 1; }
  bool contains(int period) const { return start <= period && period <= end; }
};

/// One vintage: the fitted model plus everything needed to score new data
/// exactly as it was scored at training time.
struct ModelRecord {
  int model_id = 0;  // 1 = oldest vintage
  ModelPtr model;
  RobustScaler scaler;
  TrainingWindow window;
  LearnerSpec spec;
  std::uint64_t seed = 0;

  /// Scales with the record's own scaler, then scores.
  Vector scores_on(const MatrixRef& features) const;
};

struct RegistryOptions {
  double downsample_ratio = 10.0;       // majority:minority after rebalancing
  double downsample_min_rate = 0.25;    // skip rebalancing at/above this minority rate
  bool tune = true;                     // random-search the first window's spec
  bool tune_per_window = false;         // re-tune every window instead
  int tune_budget = 20;
  int tune_folds = 3;
  std::optional<LearnerSpec> fixed_spec;  // overrides tuning entirely
};

/// Ordered collection of vintages over a periodized stream. Window length is
/// half the stream, so at testing period t the registry holds t - l/2
/// records; record j covers periods [j, j + l/2 - 1].
class ModelRegistry {
 public:
  ModelRegistry(const PeriodizedDataset* dataset, std::vector<ModelRecord> records);

  const PeriodizedDataset& dataset() const { return *dataset_; }
  const std::vector<ModelRecord>& records() const { return records_; }
  int size() const { return static_cast<int>(records_.size()); }
  const ModelRecord& record(int model_id) const;  // 1-based
  const ModelRecord& newest() const;
  int window_length() const;

  /// View of the first `count` records; models are shared, not refitted.
  ModelRegistry prefix(int count) const;

 private:
  const PeriodizedDataset* dataset_;
  std::vector<ModelRecord> records_;
};

/// Builds every record available at `testing_period` (window length l/2, so
/// that is testing_period - l/2 records). Later records never perturb earlier
/// ones: record j's randomness depends only on (seed, j). The dataset must
/// outlive the registry.
ModelRegistry build_registry_for_period(const PeriodizedDataset& dataset, ModelFamily family,
                                        int testing_period, std::uint64_t seed,
                                        const RegistryOptions& options = {});

/// True AUC of a record on a labeled period; empty when the period has a
/// single class (AUC undefined).
std::optional<double> evaluate_on_period(const ModelRecord& record,
                                         const PeriodizedDataset& dataset, int period);

void write_manifest_csv(const ModelRegistry& registry, std::ostream& out);
void write_manifest_csv(const ModelRegistry& registry, const std::string& path);

}  // namespace driftsel
