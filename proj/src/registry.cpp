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

#include <fstream>
#include <stdexcept>

#include "driftsel/metrics.hpp"

namespace driftsel {

Vector ModelRecord::scores_on(const MatrixRef& features) const {
  return model->predict_proba(scaler.apply(features));
}

ModelRegistry::ModelRegistry(const PeriodizedDataset* dataset, std::vector<ModelRecord> records)
    : dataset_(dataset), records_(std::move(records)) {
  if (dataset_ == nullptr) throw std::invalid_argument("registry: null dataset");
  if (records_.empty()) throw std::invalid_argument("registry: no records");
  for (int i = 0; i < static_cast<int>(records_.size()); ++i) {
    if (records_[i].model_id != i + 1) {
      throw std::invalid_argument("registry: records must be numbered 1..n in order");
    }
  }
}

const ModelRecord& ModelRegistry::record(int model_id) const {
  if (model_id < 1 || model_id > size()) {
    throw std::out_of_range("registry: no record " + std::to_string(model_id));
  }
  return records_[model_id - 1];
}

const ModelRecord& ModelRegistry::newest() const { return records_.back(); }

int ModelRegistry::window_length() const { return records_.front().window.length(); }

ModelRegistry ModelRegistry::prefix(int count) const {
  if (count < 1 || count > size()) throw std::out_of_range("registry: bad prefix length");
  return ModelRegistry(dataset_,
                       std::vector<ModelRecord>(records_.begin(), records_.begin() + count));
}

namespace {

struct WindowSample {
  Matrix features;
  IntVector labels;
};

WindowSample gather_window(const PeriodizedDataset& dataset, const TrainingWindow& window) {
  Eigen::Index rows = 0;
  for (int p = window.start; p <= window.end; ++p) rows += dataset.period(p).size();
  WindowSample sample;
  sample.features.resize(rows, dataset.dim());
  sample.labels.resize(rows);
  Eigen::Index cursor = 0;
  for (int p = window.start; p <= window.end; ++p) {
    const PeriodData& data = dataset.period(p);
    sample.features.middleRows(cursor, data.size()) = data.features;
    sample.labels.segment(cursor, data.size()) = data.labels;
    cursor += data.size();
  }
  return sample;
}

}  // namespace

ModelRegistry build_registry_for_period(const PeriodizedDataset& dataset, ModelFamily family,
                                        int testing_period, std::uint64_t seed,
                                        const RegistryOptions& options) {
  const int l = dataset.period_count();
  if (l % 2 != 0) {
    throw std::invalid_argument("registry: need an even period count to halve into windows");
  }
  const int half = l / 2;
  if (testing_period <= half || testing_period > l) {
    throw std::invalid_argument("registry: testing period must lie in (" + std::to_string(half) +
                                ", " + std::to_string(l) + "]");
  }
  if (!(options.downsample_ratio > 0.0)) {
    throw std::invalid_argument("registry: downsample_ratio must be positive");
  }
  if (options.fixed_spec && options.fixed_spec->family != family) {
    throw std::invalid_argument("registry: fixed_spec family disagrees with requested family");
  }

  std::vector<ModelRecord> records;
  const int count = testing_period - half;
  records.reserve(count);
  std::optional<LearnerSpec> shared_spec = options.fixed_spec;

  for (int j = 1; j <= count; ++j) {
    ModelRecord record;
    record.model_id = j;
    record.window = {j, j + half - 1};
    record.seed = mix_seed(seed, static_cast<std::uint64_t>(j));

    WindowSample sample = gather_window(dataset, record.window);
    const Eigen::Index pos = sample.labels.sum();
    const Eigen::Index neg = sample.labels.size() - pos;
    if (pos == 0 || neg == 0) {
      throw std::runtime_error("registry: window " + std::to_string(j) +
                               " is single-class, cannot train");
    }
    const double minority_rate = static_cast<double>(std::min(pos, neg)) /
                                 static_cast<double>(sample.labels.size());
    if (minority_rate < options.downsample_min_rate) {
      PeriodData balanced = downsample_majority(sample.features, sample.labels,
                                                options.downsample_ratio, mix_seed(record.seed, 1));
      sample.features = std::move(balanced.features);
      sample.labels = std::move(balanced.labels);
    }

    record.scaler = fit_scaler(sample.features);
    const Matrix scaled = record.scaler.apply(sample.features);

    if (!shared_spec && !options.tune) shared_spec = default_spec(family);
    if (options.tune && !options.fixed_spec && (options.tune_per_window || !shared_spec)) {
      record.spec = random_search(family, scaled, sample.labels, options.tune_budget,
                                  options.tune_folds, mix_seed(record.seed, 2));
      if (!options.tune_per_window) shared_spec = record.spec;
    } else {
      record.spec = *shared_spec;
    }
    record.model = train(record.spec, scaled, sample.labels, mix_seed(record.seed, 3));
    records.push_back(std::move(record));
  }
  return ModelRegistry(&dataset, std::move(records));
}

std::optional<double> evaluate_on_period(const ModelRecord& record,
                                         const PeriodizedDataset& dataset, int period) {
  const PeriodData& data = dataset.period(period);
  return try_auc(record.scores_on(data.features), data.labels);
}

void write_manifest_csv(const ModelRegistry& registry, std::ostream& out) {
  out << "model_id,window_start,window_end,family,spec,seed\n";
  for (const ModelRecord& record : registry.records()) {
    out << record.model_id << ',' << record.window.start << ',' << record.window.end << ','
        << to_string(record.spec.family) << ',' << '"' << record.spec.describe() << '"' << ','
        << record.seed << '\n';
  }
}

void write_manifest_csv(const ModelRegistry& registry, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_manifest_csv: cannot open " + path);
  write_manifest_csv(registry, out);
}

}  // namespace driftsel
