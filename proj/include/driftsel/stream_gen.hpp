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

#include "driftsel/types.hpp"

namespace driftsel {

enum class DriftKind { none, abrupt, gradual, cyclic };

DriftKind drift_kind_from_string(const std::string& name);
std::string to_string(DriftKind kind);

/// Two spherical Gaussian class clouds.
struct GaussianRegime {
  Matrix class_means;  // 2 x d, row 0 for label 0, row 1 for label 1
  Vector class_sigmas;  // per-class standard deviation, > 0

  Eigen::Index dim() const { return class_means.cols(); }
};

/// Synthetic periodized two-class stream with a drift schedule.
///
/// Regimes may be given explicitly; when `regimes` is empty a default pair is
/// built from (separation, shift, noise_sigma). The default geometry differs
/// by kind on purpose:
///  - abrupt moves the support (axes 2..d shift by `shift`) while the class
///    boundary stays put, so old models degrade gracefully;
///  - gradual interpolates toward a shifted regime whose class means are also
///    swapped, so stale models decay and recent ones stay competitive;
///  - cyclic alternates between the base regime and a shifted, swapped regime,
///    so each model ends up specialised to the regimes it saw and similarity
///    search has a displaced support to find.
struct DriftScenario {
  DriftKind kind = DriftKind::none;
  int period_count = 12;
  int samples_per_period = 500;
  double positive_rate = 0.3;
  int dim = 8;
  int cycle_length = 2;  // cyclic only: regime sequence repeats after this many periods
  std::uint64_t seed = 1;
  double separation = 2.0;   // class mean offset along axis 1
  double shift = 6.0;        // support displacement per axis for the second regime
  double noise_sigma = 1.0;  // class cloud standard deviation
  std::vector<GaussianRegime> regimes;

  void validate() const;
};

/// Default regime list for a kind (see DriftScenario for the geometry).
std::vector<GaussianRegime> default_regimes(const DriftScenario& scenario);

/// Regime in force at 1-based `period` (interpolated for gradual).
GaussianRegime regime_at(const DriftScenario& scenario, int period);

/// Draws the full stream. Deterministic in scenario.seed; each period's
/// sample depends only on (seed, period). Every period contains both classes.
PeriodizedDataset generate_drift_stream(const DriftScenario& scenario);

/// Reads a scenario from a flat key=value file (see docs/config reference).
DriftScenario load_scenario(const std::string& path);
DriftScenario scenario_from_config(const class KeyValueConfig& config);

}  // namespace driftsel
