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

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace driftsel {

using Scalar = double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using IntVector = Eigen::Matrix<int, Eigen::Dynamic, 1>;

using MatrixRef = Eigen::Ref<const Matrix>;
using VectorRef = Eigen::Ref<const Vector>;
using IntVectorRef = Eigen::Ref<const IntVector>;

/// One time period of the stream. Rows of `features` are samples;
/// `labels` holds {0,1} (1 = failure / positive class).
struct PeriodData {
  Matrix features;
  IntVector labels;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

/// An ordered sequence of labeled time periods sharing one feature space.
/// Period ids are 1-based everywhere in the library.
struct PeriodizedDataset {
  std::vector<PeriodData> periods;
  std::vector<std::string> feature_names;

  int period_count() const { return static_cast<int>(periods.size()); }
  Eigen::Index dim() const { return periods.empty() ? 0 : periods.front().dim(); }
  const PeriodData& period(int id) const { return periods.at(static_cast<std::size_t>(id - 1)); }
};

/// splitmix64 finalizer; used to derive independent seed streams from
/// (master seed, index...) tuples so adding work never perturbs earlier draws.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) { return mix_seed(mix_seed(a) ^ b); }

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(a, b) ^ c);
}

}  // namespace driftsel
