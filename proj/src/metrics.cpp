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
#include "driftsel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace driftsel {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_binary_labels(const IntVectorRef& labels) {
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw std::invalid_argument("auc: labels must be 0 or 1");
    }
  }
}

// Positions (1-based rank) of each id in an ordering, with duplicate checks.
std::unordered_map<int, int> rank_positions(const std::vector<int>& order) {
  std::unordered_map<int, int> pos;
  pos.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!pos.emplace(order[i], static_cast<int>(i + 1)).second) {
      throw std::invalid_argument("ordering contains duplicate id");
    }
  }
  return pos;
}

void check_same_ids(const std::unordered_map<int, int>& a, const std::unordered_map<int, int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("id-set mismatch between rankings");
  for (const auto& [id, _] : a) {
    if (!b.count(id)) throw std::invalid_argument("id-set mismatch between rankings");
  }
}

}  // namespace

std::optional<double> try_auc(const VectorRef& scores, const IntVectorRef& labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("auc: scores and labels differ in length");
  }
  if (scores.size() == 0) throw std::invalid_argument("auc: empty input");
  check_binary_labels(labels);

  const Eigen::Index n = scores.size();
  const Eigen::Index pos_count = labels.sum();
  const Eigen::Index neg_count = n - pos_count;
  if (pos_count == 0 || neg_count == 0) return std::nullopt;

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::sort(idx.begin(), idx.end(),
            [&](Eigen::Index a, Eigen::Index b) { return scores[a] < scores[b]; });

  // Mid-ranks over tie groups, then the rank-sum form of Mann-Whitney U.
  double pos_rank_sum = 0.0;
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) {
      if (labels[idx[k]] == 1) pos_rank_sum += mid_rank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(pos_count);
  const double u = pos_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg_count));
}

double auc(const VectorRef& scores, const IntVectorRef& labels) {
  auto value = try_auc(scores, labels);
  if (!value) throw std::invalid_argument("auc: undefined for single-class labels");
  return *value;
}

double kendall_tau(const std::vector<int>& order1, const std::vector<int>& order2) {
  const auto pos1 = rank_positions(order1);
  const auto pos2 = rank_positions(order2);
  check_same_ids(pos1, pos2);
  const int n = static_cast<int>(order1.size());
  if (n < 2) throw std::invalid_argument("kendall_tau: need at least 2 ids");

  long long concordant = 0, discordant = 0, ties1 = 0, ties2 = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int a1 = pos1.at(order1[i]) - pos1.at(order1[j]);
      const int a2 = pos2.at(order1[i]) - pos2.at(order1[j]);
      if (a1 == 0 && a2 == 0) continue;
      if (a1 == 0) {
        ++ties1;
      } else if (a2 == 0) {
        ++ties2;
      } else if ((a1 > 0) == (a2 > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double d1 = static_cast<double>(concordant + discordant + ties1);
  const double d2 = static_cast<double>(concordant + discordant + ties2);
  return static_cast<double>(concordant - discordant) / std::sqrt(d1 * d2);
}

TauInterpretation interpret_tau(double tau) {
  if (tau > 1.0 + 1e-12) throw std::invalid_argument("interpret_tau: tau above 1");
  bool clamped = false;
  if (tau < 0.0) {
    tau = 0.0;
    clamped = true;
  }
  TauBand band = TauBand::Weak;
  if (tau > 0.6) {
    band = TauBand::Strong;
  } else if (tau > 0.3) {
    band = TauBand::Moderate;
  }
  return {band, clamped};
}

std::string to_string(TauBand band) {
  switch (band) {
    case TauBand::Weak: return "Weak";
    case TauBand::Moderate: return "Moderate";
    case TauBand::Strong: return "Strong";
  }
  return "Weak";
}

double jaccard_topk(const std::vector<int>& order1, const std::vector<int>& order2, int k) {
  const auto pos1 = rank_positions(order1);
  const auto pos2 = rank_positions(order2);
  check_same_ids(pos1, pos2);
  if (k < 1 || k > static_cast<int>(order1.size())) {
    throw std::invalid_argument("jaccard_topk: k exceeds model count");
  }
  std::unordered_set<int> top1(order1.begin(), order1.begin() + k);
  std::unordered_set<int> all(top1);
  int intersection = 0;
  for (int i = 0; i < k; ++i) {
    if (top1.count(order2[static_cast<std::size_t>(i)])) ++intersection;
    all.insert(order2[static_cast<std::size_t>(i)]);
  }
  return static_cast<double>(intersection) / static_cast<double>(all.size());
}

double kendall_w(const std::vector<std::vector<int>>& orderings) {
  if (orderings.size() < 2) throw std::invalid_argument("kendall_w: need at least 2 rankings");
  const std::size_t n = orderings.front().size();
  if (n < 2) throw std::invalid_argument("kendall_w: need at least 2 ids");

  Matrix ranks(static_cast<Eigen::Index>(orderings.size()), static_cast<Eigen::Index>(n));
  const auto ref = rank_positions(orderings.front());
  // Column c of `ranks` is the id at position c of the first ordering.
  std::vector<int> ids(orderings.front());
  for (std::size_t j = 0; j < orderings.size(); ++j) {
    const auto pos = rank_positions(orderings[j]);
    check_same_ids(ref, pos);
    for (std::size_t c = 0; c < n; ++c) {
      ranks(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) =
          static_cast<double>(pos.at(ids[c]));
    }
  }
  return kendall_w_from_ranks(ranks);
}

double kendall_w_from_ranks(const MatrixRef& ranks) {
  const Eigen::Index j = ranks.rows();
  const Eigen::Index n = ranks.cols();
  if (j < 2 || n < 2) throw std::invalid_argument("kendall_w: need >= 2 judges and >= 2 items");

  const Vector rank_sums = ranks.colwise().sum();
  const double mean_sum = rank_sums.mean();
  const double s = (rank_sums.array() - mean_sum).square().sum();

  // Tie correction: T_j = sum over tie groups of (t^3 - t) within judge j.
  double tie_total = 0.0;
  for (Eigen::Index r = 0; r < j; ++r) {
    std::vector<double> row(ranks.row(r).begin(), ranks.row(r).end());
    std::sort(row.begin(), row.end());
    std::size_t i = 0;
    while (i < row.size()) {
      std::size_t g = i;
      while (g + 1 < row.size() && row[g + 1] == row[i]) ++g;
      const double t = static_cast<double>(g - i + 1);
      tie_total += t * t * t - t;
      i = g + 1;
    }
  }

  const double nn = static_cast<double>(n);
  const double jj = static_cast<double>(j);
  const double denom = jj * jj * (nn * nn * nn - nn) - jj * tie_total;
  if (denom <= 0.0) return 1.0;  // every judge ties everything
  return 12.0 * s / denom;
}

namespace detail {

double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) {
    // Series representation.
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  return 1.0 - gamma_q(a, x);
}

double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p(a, x);
  // Continued fraction, modified Lentz.
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double chi_square_sf(double x, double dof) { return gamma_q(dof / 2.0, x / 2.0); }

}  // namespace detail

namespace {

struct SkContext {
  std::vector<std::string> names;  // sorted by mean descending
  std::vector<double> means;
  double s_y2 = 0.0;  // pooled variance of a treatment mean
  double nu = 0.0;    // error degrees of freedom
  double alpha = 0.05;
};

// Best two-way contiguous split of [lo, hi) by between-group sum of squares.
double best_split(const SkContext& ctx, int lo, int hi, int* split_at) {
  const int g = hi - lo;
  double total = 0.0;
  for (int i = lo; i < hi; ++i) total += ctx.means[static_cast<std::size_t>(i)];
  double best = -1.0;
  double left = 0.0;
  for (int s = lo + 1; s < hi; ++s) {
    left += ctx.means[static_cast<std::size_t>(s - 1)];
    const double right = total - left;
    const int g1 = s - lo;
    const int g2 = hi - s;
    const double b0 = left * left / g1 + right * right / g2 - total * total / g;
    if (b0 > best) {
      best = b0;
      *split_at = s;
    }
  }
  return best;
}

void cluster(const SkContext& ctx, int lo, int hi, std::vector<std::vector<std::string>>* groups) {
  const int g = hi - lo;
  if (g < 2) {
    groups->push_back({ctx.names.begin() + lo, ctx.names.begin() + hi});
    return;
  }
  int split_at = lo + 1;
  const double b0 = best_split(ctx, lo, hi, &split_at);

  double mean = 0.0;
  for (int i = lo; i < hi; ++i) mean += ctx.means[static_cast<std::size_t>(i)];
  mean /= g;
  double within = 0.0;
  for (int i = lo; i < hi; ++i) {
    const double d = ctx.means[static_cast<std::size_t>(i)] - mean;
    within += d * d;
  }
  const double sigma0_sq = (within + ctx.nu * ctx.s_y2) / (static_cast<double>(g) + ctx.nu);

  bool significant = false;
  if (b0 > 0.0 && sigma0_sq > 0.0) {
    const double lambda = kPi / (2.0 * (kPi - 2.0)) * b0 / sigma0_sq;
    const double nu0 = static_cast<double>(g) / (kPi - 2.0);
    significant = detail::chi_square_sf(lambda, nu0) < ctx.alpha;
  }
  if (significant) {
    cluster(ctx, lo, split_at, groups);
    cluster(ctx, split_at, hi, groups);
  } else {
    groups->push_back({ctx.names.begin() + lo, ctx.names.begin() + hi});
  }
}

}  // namespace

SkResult scott_knott(const std::map<std::string, std::vector<double>>& treatments, double alpha) {
  if (treatments.empty()) throw std::invalid_argument("scott_knott: no treatments");

  SkContext ctx;
  ctx.alpha = alpha;
  double sse = 0.0;
  double inv_r = 0.0;
  for (const auto& [name, obs] : treatments) {
    if (obs.size() < 2) {
      throw std::invalid_argument("scott_knott: treatment '" + name +
                                  "' needs at least 2 observations");
    }
    const double r = static_cast<double>(obs.size());
    const double mean = std::accumulate(obs.begin(), obs.end(), 0.0) / r;
    for (double x : obs) sse += (x - mean) * (x - mean);
    ctx.nu += r - 1.0;
    inv_r += 1.0 / r;
    ctx.names.push_back(name);
    ctx.means.push_back(mean);
  }
  const double mse = ctx.nu > 0.0 ? sse / ctx.nu : 0.0;
  ctx.s_y2 = mse * inv_r / static_cast<double>(treatments.size());

  std::vector<std::size_t> idx(ctx.names.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (ctx.means[a] != ctx.means[b]) return ctx.means[a] > ctx.means[b];
    return ctx.names[a] < ctx.names[b];
  });
  SkContext sorted;
  sorted.alpha = ctx.alpha;
  sorted.s_y2 = ctx.s_y2;
  sorted.nu = ctx.nu;
  for (std::size_t i : idx) {
    sorted.names.push_back(ctx.names[i]);
    sorted.means.push_back(ctx.means[i]);
  }

  SkResult result;
  cluster(sorted, 0, static_cast<int>(sorted.names.size()), &result.groups);
  for (std::size_t g = 0; g < result.groups.size(); ++g) {
    for (const auto& name : result.groups[g]) {
      result.group_of[name] = static_cast<int>(g + 1);
    }
  }
  return result;
}

}  // namespace driftsel
