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
#include <string>
#include <vector>

#include "driftsel/types.hpp"

namespace driftsel {

/// Per-feature robust standardization: (x - median) / (q75 - q25).
/// A zero quantile range falls back to a divisor of 1.0 so constant
/// features stay finite. Quartiles use linear interpolation between
/// closest ranks (h = p * (n - 1)).
struct RobustScaler {
  Vector median;
  Vector range;  // q75 - q25, >= 0

  Eigen::Index dim() const { return median.size(); }
  Matrix apply(const MatrixRef& features) const;
  Vector apply_row(const VectorRef& features) const;
};

/// Fits medians and interquartile ranges column-wise. Needs >= 2 rows.
RobustScaler fit_scaler(const MatrixRef& features);

/// Interpolated quantile of a column, p in [0, 1].
double quantile(const VectorRef& values, double p);

/// Groups flat records into ordered periods. `period_ids[i]` assigns row i of
/// `features`/`labels`; ids must cover a contiguous integer range with at
/// least two distinct values. Periods are renumbered 1..l.
PeriodizedDataset segment_by_period(const MatrixRef& features, const IntVectorRef& labels,
                                    const std::vector<int>& period_ids,
                                    std::vector<std::string> feature_names = {});

/// Rebalances by subsampling the majority class down to
/// ceil(ratio * minority count), keeping every minority sample. Selection is
/// uniform without replacement and deterministic per seed; surviving rows
/// keep their original order. Both classes must be present.
PeriodData downsample_majority(const MatrixRef& features, const IntVectorRef& labels, double ratio,
                               std::uint64_t seed);

/// Reads the periodized stream schema: header `period,label,f1..fd`,
/// period 1-based contiguous, label in {0,1}.
PeriodizedDataset read_periodized_csv(const std::string& path);
PeriodizedDataset read_periodized_csv(std::istream& in, const std::string& context);

void write_periodized_csv(const PeriodizedDataset& dataset, const std::string& path);
void write_periodized_csv(const PeriodizedDataset& dataset, std::ostream& out);

}  // namespace driftsel
