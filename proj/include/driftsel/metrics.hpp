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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "driftsel/types.hpp"

namespace driftsel {

/// Area under the ROC curve, Mann-Whitney formulation:
/// (#correctly ordered pos/neg pairs + 0.5 * #tied pairs) / (#pos * #neg).
/// Labels must contain both classes; throws std::invalid_argument otherwise.
double auc(const VectorRef& scores, const IntVectorRef& labels);

/// As auc(), but returns nullopt instead of throwing when only one class
/// is present (the "AUC undefined" condition).
std::optional<double> try_auc(const VectorRef& scores, const IntVectorRef& labels);

/// Kendall rank correlation (tau-b) between two orderings of the same id
/// set, each given best-first. Strict orderings have no ties, so tau-a and
/// tau-b coincide. Throws on id-set mismatch or fewer than 2 ids.
double kendall_tau(const std::vector<int>& order1, const std::vector<int>& order2);

enum class TauBand { Weak, Moderate, Strong };

struct TauInterpretation {
  TauBand band;
  bool clamped;  // true when tau < 0 was clamped to Weak for interpretation
};

/// Weak if tau <= 0.3, Moderate if 0.3 < tau <= 0.6, Strong if 0.6 < tau <= 1.
/// Negative tau is reported raw elsewhere; here it maps to Weak with a flag.
TauInterpretation interpret_tau(double tau);

std::string to_string(TauBand band);

/// Jaccard similarity of the two top-k id sets: |intersection| / |union|.
/// Requires 1 <= k <= id count ("k exceeds model count" otherwise).
double jaccard_topk(const std::vector<int>& order1, const std::vector<int>& order2, int k);

/// Kendall's coefficient of concordance among j >= 2 strict orderings of the
/// same n >= 2 ids: W = 12 S / (j^2 (n^3 - n)) with S the sum of squared
/// deviations of per-id rank sums.
double kendall_w(const std::vector<std::vector<int>>& orderings);

/// Tie-aware variant; `ranks` is judges x items, entries are (possibly
/// tied, mid-rank) rank values. W = 12 S / (j^2 (n^3 - n) - j * sum T_j).
double kendall_w_from_ranks(const MatrixRef& ranks);

/// Scott-Knott clustering of treatments into statistically distinct groups.
struct SkResult {
  /// 1-based group per treatment; group 1 has the highest mean.
  std::map<std::string, int> group_of;
  /// Treatments per group, groups ordered by descending mean.
  std::vector<std::vector<std::string>> groups;

  int group_count() const { return static_cast<int>(groups.size()); }
};

/// Hierarchical mean clustering (Scott & Knott 1974). Treatments are sorted
/// by mean; the split maximizing the between-group sum of squares B0 is
/// accepted when the likelihood-ratio statistic
///   lambda = pi / (2 (pi - 2)) * B0 / sigma0^2
/// exceeds the chi-square 0.95 quantile at nu0 = g / (pi - 2) degrees of
/// freedom, and both halves are clustered recursively; otherwise the range
/// becomes one group. sigma0^2 = (sum_i (m_i - m)^2 + nu * s_y^2) / (g + nu)
/// with s_y^2 = MSE * mean(1/r_i) pooled over all treatments and
/// nu = sum(r_i - 1). Requires >= 2 observations per treatment.
SkResult scott_knott(const std::map<std::string, std::vector<double>>& treatments,
                     double alpha = 0.05);

namespace detail {

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Survival function of the chi-square distribution with (possibly
/// non-integer) dof degrees of freedom.
double chi_square_sf(double x, double dof);

}  // namespace detail

}  // namespace driftsel
