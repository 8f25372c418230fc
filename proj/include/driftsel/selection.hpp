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
#include <string>
#include <vector>

#include "driftsel/registry.hpp"
#include "driftsel/types.hpp"

namespace driftsel {

/// Unlabeled samples of the period under test. Labels never travel with the
/// context; only the oracle receives them, through its own argument.
struct TestContext {
  int period_id = 0;
  Matrix features;
};

TestContext make_test_context(const PeriodizedDataset& dataset, int period);

/// Labeled periods 1..last_period. Accessing anything newer throws, which
/// keeps every mechanism blind to the test period's labels by construction.
class HistoryView {
 public:
  HistoryView(const PeriodizedDataset& dataset, int last_period);

  int last_period() const { return last_period_; }
  const PeriodData& period(int id) const;

 private:
  const PeriodizedDataset* dataset_;
  int last_period_;
};

/// Full ordering of the registry's model ids, best first. Scores are
/// monotone non-increasing along the order; equal scores break toward the
/// newer model. Some mechanisms use synthetic score scales (documented at
/// each ranking function); scores are comparable within one ranking only.
struct Ranking {
  std::vector<int> model_ids;
  std::vector<double> scores;
  std::string mechanism;
  std::vector<std::string> flags;
  int reference_period = 0;  // sbm/rsbm: the chosen p*, 0 elsewhere

  int top1() const;
  bool has_flag(const std::string& flag) const;
};

inline constexpr const char* kFlagLafFallback = "laf_fallback";
inline constexpr const char* kFlagVoteTie = "vote_tie";
inline constexpr const char* kFlagSingleClassReference = "single_class_reference";
inline constexpr const char* kFlagPromoted = "promoted_newest";

enum class Mechanism { stationary, periodic, oracle, tbm, rtbm, sbm, rsbm, crc, laf };

Mechanism mechanism_from_string(const std::string& name);
std::string to_string(Mechanism mechanism);
const std::vector<Mechanism>& all_mechanisms();

struct SbmOptions {
  int hausdorff_cap = 2000;
  std::uint64_t seed = 0;  // only used when a set exceeds the cap
};

/// Oldest model first: ids ascending. Scores are descending synthetic ranks.
Ranking rank_stationary(const ModelRegistry& registry);

/// Newest model first: ids descending. Scores are the ids themselves.
Ranking rank_periodic(const ModelRegistry& registry);

/// True-AUC ordering on the test period. The only label-consuming mechanism.
Ranking rank_oracle(const ModelRegistry& registry, const TestContext& context,
                    const IntVectorRef& test_labels);

/// AUC on the last labeled period t-1 for every record whose window excludes
/// it; records overlapping t-1 go to the tail in recency order with negative
/// sentinel scores. Single-class t-1 degrades to flagged recency order.
Ranking rank_tbm(const ModelRegistry& registry, const HistoryView& history);

/// rank_tbm, then: when the leader's window ends at t-2, the newest record
/// (window ending t-1) is promoted to rank 1 and inherits the leader's score.
Ranking rank_rtbm(const ModelRegistry& registry, const HistoryView& history);

/// Symmetric Hausdorff distance (Euclidean) between two point sets of equal
/// dimension. Sets larger than `cap` are first reduced by a seeded uniform
/// subsample.
double hausdorff_distance(const MatrixRef& set_a, const MatrixRef& set_b, int cap = 2000,
                          std::uint64_t seed = 0);

/// Reference period p* = candidate in [window_length, t-1] closest to the
/// test context under Hausdorff distance (both sides scaled with the newest
/// record's scaler; ties go to the most recent period). Records are scored
/// by AUC on p*; leak-free records (window not containing p*) rank above all
/// leaky ones, so leak-free scores carry a +1 offset.
Ranking rank_sbm(const ModelRegistry& registry, const HistoryView& history,
                 const TestContext& context, const SbmOptions& options = {});

/// Same reference period as rank_sbm but one flat descending-AUC order,
/// leakage ignored.
Ranking rank_rsbm(const ModelRegistry& registry, const HistoryView& history,
                  const TestContext& context, const SbmOptions& options = {});

/// Mean prediction confidence max(p, 1-p) over the test context, descending.
Ranking rank_crc(const ModelRegistry& registry, const TestContext& context);

/// Majority vote over binarized predictions (threshold 0.5). Ties vote 1 and
/// set `tie` on the result. A sample is discriminative when the models
/// disagree on it.
struct VoteResult {
  IntVector pseudo_labels;
  std::vector<bool> discriminative;
  bool tie = false;
};

VoteResult majority_pseudo_labels(const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>& votes);

/// One-coin EM over a binary vote matrix (models x samples): theta_j is
/// model j's accuracy against the latent label, label prior fixed at 1/2.
/// theta stays clamped to [1e-6, 1-1e-6]. `loglik` holds the observed-data
/// log-likelihood at initialization and after every iteration.
struct EmResult {
  Vector theta;
  std::vector<double> loglik;
  int iterations = 0;
};

EmResult em_one_coin(const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>& votes,
                     const VectorRef& theta_init, double tol = 1e-6, int max_iterations = 100);

/// Ranks by EM-estimated accuracy on the discriminative samples; recency
/// order with the laf_fallback flag when every sample is unanimous.
Ranking rank_laf(const ModelRegistry& registry, const TestContext& context);

/// Dispatch by mechanism tag; `test_labels` feeds the oracle only.
Ranking rank_mechanism(Mechanism mechanism, const ModelRegistry& registry,
                       const HistoryView& history, const TestContext& context,
                       const IntVectorRef& test_labels, const SbmOptions& options = {});

}  // namespace driftsel
