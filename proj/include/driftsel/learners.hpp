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
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "driftsel/types.hpp"

namespace driftsel {

enum class ModelFamily { lr, cart, rf, nn };

ModelFamily family_from_string(const std::string& name);
std::string to_string(ModelFamily family);

/// A model family plus its hyperparameters. Integer-valued parameters are
/// stored as doubles and rounded at use. Families and their keys:
///   lr:   learning_rate, epochs, l2
///   cart: max_depth, min_leaf
///   rf:   trees, max_depth, min_leaf, feature_fraction, bootstrap (0/1)
///   nn:   width, learning_rate, epochs
struct LearnerSpec {
  ModelFamily family = ModelFamily::lr;
  std::map<std::string, double> params;

  double at(const std::string& name, double fallback) const;
  int at_int(const std::string& name, int fallback) const;
  std::string describe() const;  // "lr(epochs=200,l2=0.001,...)"
};

LearnerSpec default_spec(ModelFamily family);

/// Immutable fitted scorer. Implementations are deterministic: the same
/// inputs always produce the same probabilities.
class TrainedModel {
 public:
  virtual ~TrainedModel() = default;
  virtual ModelFamily family() const = 0;
  virtual Eigen::Index feature_dim() const = 0;
  /// P(y = 1) per row, each in [0, 1].
  virtual Vector predict_proba(const MatrixRef& features) const = 0;
};

using ModelPtr = std::shared_ptr<const TrainedModel>;

double predict_proba_one(const TrainedModel& model, const VectorRef& features);

/// Fits a model. Requires n >= 2, d >= 1, and both classes present.
/// `seed` drives any internal randomness (rf, nn); lr and cart ignore it.
ModelPtr train(const LearnerSpec& spec, const MatrixRef& features, const IntVectorRef& labels,
               std::uint64_t seed);

/// The hyperparameter draw sequence used by random_search, exposed so the
/// winner can be re-derived externally. Deterministic in (family, seed).
std::vector<LearnerSpec> sample_specs(ModelFamily family, int budget, std::uint64_t seed);

/// Stratified fold assignment: fold id per row, each class spread evenly.
/// Every fold keeps at least one sample of each class (folds must not exceed
/// the minority count).
std::vector<int> stratified_folds(const IntVectorRef& labels, int folds, std::uint64_t seed);

/// Mean validation AUC over the folds of `fold_of`; folds whose validation
/// split is single-class are skipped (error if all are).
double cv_auc(const LearnerSpec& spec, const MatrixRef& features, const IntVectorRef& labels,
              const std::vector<int>& fold_of, std::uint64_t train_seed);

/// Random hyperparameter search: `budget` draws scored by k-fold CV AUC on a
/// shared fold split; ties keep the earliest draw.
LearnerSpec random_search(ModelFamily family, const MatrixRef& features,
                          const IntVectorRef& labels, int budget, int folds, std::uint64_t seed);

}  // namespace driftsel
