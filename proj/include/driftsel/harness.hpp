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

#include "driftsel/config.hpp"
#include "driftsel/registry.hpp"
#include "driftsel/selection.hpp"
#include "driftsel/stream_gen.hpp"

namespace driftsel {

/// Everything one experiment needs. The dataset comes either from a CSV file
/// or from a synthetic scenario (exactly one of the two).
struct ExperimentConfig {
  std::string csv_path;
  std::optional<DriftScenario> scenario;
  ModelFamily family = ModelFamily::lr;
  std::vector<Mechanism> mechanisms;  // evaluation + report order
  int repeats = 20;
  std::uint64_t master_seed = 1;
  RegistryOptions registry;
  SbmOptions sbm;
  std::vector<int> jaccard_ks = {3};
  std::string outdir = "out";
  int workers = 0;  // 0: take DRIFTSEL_WORKERS, else 1

  void validate() const;
};

ExperimentConfig experiment_config_from(const KeyValueConfig& config);
ExperimentConfig load_experiment_config(const std::string& path);

PeriodizedDataset load_dataset(const ExperimentConfig& config);

/// One (run, period, mechanism) outcome. `top1_auc` is empty when the test
/// period is single-class (row carries the single_class_period flag and is
/// excluded from aggregation). `tau`/`jaccard` compare against the oracle
/// ranking and are empty for the first testing period, where the registry
/// holds one model and rankings are trivial; a jaccard entry is also empty
/// when its k exceeds the model count at that period.
struct ResultRow {
  int run = 0;
  int period = 0;
  std::string mechanism;
  int top1_model_id = 0;
  std::optional<double> top1_auc;
  std::optional<double> tau;
  std::vector<std::optional<double>> jaccard;  // aligned with jaccard_ks
  std::vector<int> ranking;                    // best first
  std::vector<double> scores;                  // aligned with ranking
  std::vector<std::string> flags;

  bool has_flag(const std::string& flag) const;
};

struct ResultsTable {
  std::vector<int> jaccard_ks;
  std::vector<ResultRow> rows;
};

/// The full protocol: for each run r (seed = master ^ r) and testing period
/// t in l/2+1..l, build the registry available at t, rank with every
/// configured mechanism, and score the rank-1 model on period t. The oracle
/// is always computed as the rank-metric reference, listed or not.
/// Deterministic in the config; rows ordered by (run, period, mechanism).
ResultsTable run_experiment(const ExperimentConfig& config, const PeriodizedDataset& dataset);
ResultsTable run_experiment(const ExperimentConfig& config);

/// Per-period and pooled aggregates. Periods carry mean/sd AUC, mean tau,
/// mean jaccard, and Kendall's W across runs (R >= 2 and >= 2 models).
/// Pooled rows (period 0, serialized as "all") add the Scott-Knott group of
/// each mechanism over AUC observations pooled across runs and periods.
struct SummaryRow {
  int period = 0;  // 0 = pooled
  std::string mechanism;
  int count = 0;
  double mean_auc = 0.0;
  double sd_auc = 0.0;
  std::optional<double> mean_tau;
  std::vector<std::optional<double>> mean_jaccard;
  std::optional<double> kendall_w;  // pooled row: mean over periods
  std::optional<int> sk_group;      // pooled rows only
};

struct Summary {
  std::vector<int> jaccard_ks;
  std::vector<SummaryRow> rows;
};

Summary aggregate(const ResultsTable& results);

void write_results_csv(const ResultsTable& results, std::ostream& out);
void write_results_csv(const ResultsTable& results, const std::string& path);
ResultsTable read_results_csv(const std::string& path);

void write_summary_csv(const Summary& summary, std::ostream& out);
void write_rankings_csv(const ResultsTable& results, std::ostream& out);

/// Writes results.csv, summary.csv, rankings.csv and the per-period trend
/// plots (auc_trend.svg, tau_trend.svg, jaccard_trend.svg, w_trend.svg; the
/// W plot is skipped when no W was computable, e.g. R = 1) into `outdir`.
void emit_report(const Summary& summary, const ResultsTable& results, const std::string& outdir);

}  // namespace driftsel
