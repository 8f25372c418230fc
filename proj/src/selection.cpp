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
#include "driftsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "driftsel/metrics.hpp"

namespace driftsel {

TestContext make_test_context(const PeriodizedDataset& dataset, int period) {
  TestContext context;
  context.period_id = period;
  context.features = dataset.period(period).features;
  return context;
}

HistoryView::HistoryView(const PeriodizedDataset& dataset, int last_period)
    : dataset_(&dataset), last_period_(last_period) {
  if (last_period < 1 || last_period > dataset.period_count()) {
    throw std::invalid_argument("history: last period out of range");
  }
}

const PeriodData& HistoryView::period(int id) const {
  if (id < 1 || id > last_period_) {
    throw std::out_of_range("history: period " + std::to_string(id) +
                            " is beyond the labeled horizon");
  }
  return dataset_->period(id);
}

int Ranking::top1() const {
  if (model_ids.empty()) throw std::logic_error("ranking: empty");
  return model_ids.front();
}

bool Ranking::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

Mechanism mechanism_from_string(const std::string& name) {
  for (Mechanism mechanism : all_mechanisms()) {
    if (to_string(mechanism) == name) return mechanism;
  }
  throw std::invalid_argument("unknown mechanism '" + name + "'");
}

std::string to_string(Mechanism mechanism) {
  switch (mechanism) {
    case Mechanism::stationary:
      return "stationary";
    case Mechanism::periodic:
      return "periodic";
    case Mechanism::oracle:
      return "oracle";
    case Mechanism::tbm:
      return "tbm";
    case Mechanism::rtbm:
      return "rtbm";
    case Mechanism::sbm:
      return "sbm";
    case Mechanism::rsbm:
      return "rsbm";
    case Mechanism::crc:
      return "crc";
    case Mechanism::laf:
      return "laf";
  }
  throw std::logic_error("unreachable mechanism");
}

const std::vector<Mechanism>& all_mechanisms() {
  static const std::vector<Mechanism> mechanisms = {
      Mechanism::stationary, Mechanism::periodic, Mechanism::oracle,
      Mechanism::tbm,        Mechanism::rtbm,     Mechanism::sbm,
      Mechanism::rsbm,       Mechanism::crc,      Mechanism::laf};
  return mechanisms;
}

namespace {

/// Orders ids by (score descending, id descending): equal scores go to the
/// newer model.
Ranking make_ranking(const Vector& score_per_id, std::string mechanism,
                     std::vector<std::string> flags = {}) {
  const int n = static_cast<int>(score_per_id.size());
  Ranking ranking;
  ranking.mechanism = std::move(mechanism);
  ranking.flags = std::move(flags);
  ranking.model_ids.resize(n);
  std::iota(ranking.model_ids.begin(), ranking.model_ids.end(), 1);
  std::sort(ranking.model_ids.begin(), ranking.model_ids.end(), [&](int a, int b) {
    const double sa = score_per_id[a - 1];
    const double sb = score_per_id[b - 1];
    return sa > sb || (sa == sb && a > b);
  });
  ranking.scores.resize(n);
  for (int i = 0; i < n; ++i) ranking.scores[i] = score_per_id[ranking.model_ids[i] - 1];
  return ranking;
}

Ranking recency_ranking(int n, std::string mechanism, std::vector<std::string> flags = {}) {
  Vector scores(n);
  for (int id = 1; id <= n; ++id) scores[id - 1] = id;
  return make_ranking(scores, std::move(mechanism), std::move(flags));
}

bool single_class(const IntVectorRef& labels) {
  return (labels.array() == 1).all() || (labels.array() == 0).all();
}

void check_context(const TestContext& context) {
  if (context.features.rows() < 1) throw std::invalid_argument("selection: empty test context");
}

Matrix subsample_rows(const MatrixRef& points, int cap, std::uint64_t seed) {
  if (points.rows() <= cap) return points;
  std::vector<Eigen::Index> rows(points.rows());
  std::iota(rows.begin(), rows.end(), 0);
  std::mt19937_64 rng(seed);
  for (int k = 0; k < cap; ++k) {
    std::uniform_int_distribution<Eigen::Index> pick(k, points.rows() - 1);
    std::swap(rows[k], rows[pick(rng)]);
  }
  rows.resize(cap);
  std::sort(rows.begin(), rows.end());
  return points(rows, Eigen::all);
}

}  // namespace

Ranking rank_stationary(const ModelRegistry& registry) {
  const int n = registry.size();
  Vector scores(n);
  for (int id = 1; id <= n; ++id) scores[id - 1] = n - id + 1;
  return make_ranking(scores, "stationary");
}

Ranking rank_periodic(const ModelRegistry& registry) {
  return recency_ranking(registry.size(), "periodic");
}

Ranking rank_oracle(const ModelRegistry& registry, const TestContext& context,
                    const IntVectorRef& test_labels) {
  check_context(context);
  if (context.features.rows() != test_labels.size()) {
    throw std::invalid_argument("oracle: labels must align with the test context");
  }
  if (single_class(test_labels)) {
    throw std::invalid_argument("oracle: AUC undefined on a single-class test period");
  }
  Vector scores(registry.size());
  for (const ModelRecord& record : registry.records()) {
    scores[record.model_id - 1] = auc(record.scores_on(context.features), test_labels);
  }
  return make_ranking(scores, "oracle");
}

Ranking rank_tbm(const ModelRegistry& registry, const HistoryView& history) {
  const int q = history.last_period();
  const PeriodData& reference = history.period(q);
  if (single_class(reference.labels)) {
    return recency_ranking(registry.size(), "tbm", {kFlagSingleClassReference});
  }
  Vector scores(registry.size());
  int tail_rank = 0;
  // Leaky records (window overlapping t-1) collect negative sentinels that
  // preserve recency order below every real AUC.
  for (int id = registry.size(); id >= 1; --id) {
    const ModelRecord& record = registry.record(id);
    if (record.window.contains(q)) {
      scores[id - 1] = static_cast<double>(--tail_rank);
    } else {
      scores[id - 1] = auc(record.scores_on(reference.features), reference.labels);
    }
  }
  return make_ranking(scores, "tbm");
}

Ranking rank_rtbm(const ModelRegistry& registry, const HistoryView& history) {
  Ranking ranking = rank_tbm(registry, history);
  ranking.mechanism = "rtbm";
  if (ranking.has_flag(kFlagSingleClassReference)) return ranking;

  const int q = history.last_period();
  const int leader = ranking.model_ids.front();
  if (registry.record(leader).window.end != q - 1) return ranking;

  int newest = 0;
  for (const ModelRecord& record : registry.records()) {
    if (record.window.end == q && record.model_id > newest) newest = record.model_id;
  }
  if (newest == 0 || newest == leader) return ranking;

  const auto it = std::find(ranking.model_ids.begin(), ranking.model_ids.end(), newest);
  const auto pos = std::distance(ranking.model_ids.begin(), it);
  ranking.model_ids.erase(it);
  ranking.scores.erase(ranking.scores.begin() + pos);
  ranking.model_ids.insert(ranking.model_ids.begin(), newest);
  ranking.scores.insert(ranking.scores.begin(), ranking.scores.front());
  ranking.flags.push_back(kFlagPromoted);
  return ranking;
}

double hausdorff_distance(const MatrixRef& set_a, const MatrixRef& set_b, int cap,
                          std::uint64_t seed) {
  if (set_a.rows() == 0 || set_b.rows() == 0) {
    throw std::invalid_argument("hausdorff: empty point set");
  }
  if (set_a.cols() != set_b.cols()) {
    throw std::invalid_argument("hausdorff: dimension mismatch");
  }
  if (cap < 1) throw std::invalid_argument("hausdorff: cap must be >= 1");

  const Matrix a = subsample_rows(set_a, cap, mix_seed(seed, 1));
  const Matrix b = subsample_rows(set_b, cap, mix_seed(seed, 2));
  Matrix squared = -2.0 * (a * b.transpose());
  squared.colwise() += a.rowwise().squaredNorm();
  squared.rowwise() += b.rowwise().squaredNorm().transpose();
  squared = squared.cwiseMax(0.0);
  const double a_to_b = squared.rowwise().minCoeff().maxCoeff();
  const double b_to_a = squared.colwise().minCoeff().maxCoeff();
  return std::sqrt(std::max(a_to_b, b_to_a));
}

namespace {

struct SbmEvaluation {
  int p_star = 0;
  bool single_class_reference = false;
  Vector record_auc;        // by record index
  std::vector<bool> leaky;  // window contains p*
};

SbmEvaluation evaluate_against_reference(const ModelRegistry& registry,
                                         const HistoryView& history, const TestContext& context,
                                         const SbmOptions& options) {
  check_context(context);
  const int first_candidate = registry.window_length();
  const int q = history.last_period();
  if (first_candidate > q) {
    throw std::invalid_argument("sbm: no candidate reference period before the test period");
  }

  const RobustScaler& scaler = registry.newest().scaler;
  const Matrix test_scaled = scaler.apply(context.features);
  SbmEvaluation eval;
  double best = std::numeric_limits<double>::infinity();
  for (int p = first_candidate; p <= q; ++p) {
    const Matrix candidate = scaler.apply(history.period(p).features);
    const double distance = hausdorff_distance(test_scaled, candidate, options.hausdorff_cap,
                                               mix_seed(options.seed, p));
    if (distance <= best) {  // ties resolve to the most recent period
      best = distance;
      eval.p_star = p;
    }
  }

  const PeriodData& reference = history.period(eval.p_star);
  if (single_class(reference.labels)) {
    eval.single_class_reference = true;
    return eval;
  }
  eval.record_auc.resize(registry.size());
  eval.leaky.resize(registry.size());
  for (const ModelRecord& record : registry.records()) {
    eval.record_auc[record.model_id - 1] =
        auc(record.scores_on(reference.features), reference.labels);
    eval.leaky[record.model_id - 1] = record.window.contains(eval.p_star);
  }
  return eval;
}

std::string ref_flag(int p_star) { return "ref=" + std::to_string(p_star); }

}  // namespace

Ranking rank_sbm(const ModelRegistry& registry, const HistoryView& history,
                 const TestContext& context, const SbmOptions& options) {
  const SbmEvaluation eval = evaluate_against_reference(registry, history, context, options);
  Ranking ranking;
  if (eval.single_class_reference) {
    ranking = recency_ranking(registry.size(), "sbm",
                              {kFlagSingleClassReference, ref_flag(eval.p_star)});
  } else {
    // Leak-free records outrank every leaky one: +1 offset on AUC in [0, 1].
    Vector scores = eval.record_auc;
    for (int i = 0; i < registry.size(); ++i) {
      if (!eval.leaky[i]) scores[i] += 1.0;
    }
    ranking = make_ranking(scores, "sbm", {ref_flag(eval.p_star)});
  }
  ranking.reference_period = eval.p_star;
  return ranking;
}

Ranking rank_rsbm(const ModelRegistry& registry, const HistoryView& history,
                  const TestContext& context, const SbmOptions& options) {
  const SbmEvaluation eval = evaluate_against_reference(registry, history, context, options);
  Ranking ranking;
  if (eval.single_class_reference) {
    ranking = recency_ranking(registry.size(), "rsbm",
                              {kFlagSingleClassReference, ref_flag(eval.p_star)});
  } else {
    ranking = make_ranking(eval.record_auc, "rsbm", {ref_flag(eval.p_star)});
  }
  ranking.reference_period = eval.p_star;
  return ranking;
}

Ranking rank_crc(const ModelRegistry& registry, const TestContext& context) {
  check_context(context);
  Vector scores(registry.size());
  for (const ModelRecord& record : registry.records()) {
    const Vector probs = record.scores_on(context.features);
    scores[record.model_id - 1] = ((probs.array() - 0.5).abs() + 0.5).mean();
  }
  return make_ranking(scores, "crc");
}

VoteResult majority_pseudo_labels(
    const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>& votes) {
  if (votes.rows() < 1 || votes.cols() < 1) {
    throw std::invalid_argument("majority_pseudo_labels: empty vote matrix");
  }
  if (((votes.array() != 0) && (votes.array() != 1)).any()) {
    throw std::invalid_argument("majority_pseudo_labels: votes must be 0 or 1");
  }
  const Eigen::Index models = votes.rows();
  const Eigen::Index samples = votes.cols();
  VoteResult result;
  result.pseudo_labels.resize(samples);
  result.discriminative.resize(samples);
  for (Eigen::Index i = 0; i < samples; ++i) {
    const int ones = votes.col(i).sum();
    if (2 * ones == models) {
      result.pseudo_labels[i] = 1;
      result.tie = true;
    } else {
      result.pseudo_labels[i] = 2 * ones > models ? 1 : 0;
    }
    result.discriminative[i] = ones != 0 && ones != models;
  }
  return result;
}

EmResult em_one_coin(const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>& votes,
                     const VectorRef& theta_init, double tol, int max_iterations) {
  const Eigen::Index models = votes.rows();
  const Eigen::Index samples = votes.cols();
  if (models < 1 || samples < 1) throw std::invalid_argument("em_one_coin: empty vote matrix");
  if (theta_init.size() != models) {
    throw std::invalid_argument("em_one_coin: theta_init must have one entry per model");
  }
  if (((votes.array() != 0) && (votes.array() != 1)).any()) {
    throw std::invalid_argument("em_one_coin: votes must be 0 or 1");
  }

  static constexpr double kThetaFloor = 1e-6;
  const auto clamp_theta = [](Vector theta) {
    return theta.cwiseMax(kThetaFloor).cwiseMin(1.0 - kThetaFloor);
  };

  // Posterior P(label=1 | votes) per sample and the observed-data
  // log-likelihood, both under the label prior 1/2.
  const auto e_step = [&](const Vector& theta, Vector& posterior) {
    double loglik = 0.0;
    for (Eigen::Index i = 0; i < samples; ++i) {
      double lp1 = 0.0;
      double lp0 = 0.0;
      for (Eigen::Index j = 0; j < models; ++j) {
        const double log_acc = std::log(theta[j]);
        const double log_err = std::log1p(-theta[j]);
        if (votes(j, i) == 1) {
          lp1 += log_acc;
          lp0 += log_err;
        } else {
          lp1 += log_err;
          lp0 += log_acc;
        }
      }
      const double hi = std::max(lp1, lp0);
      loglik += hi + std::log(0.5 * std::exp(lp1 - hi) + 0.5 * std::exp(lp0 - hi));
      posterior[i] = 1.0 / (1.0 + std::exp(lp0 - lp1));
    }
    return loglik;
  };

  EmResult result;
  result.theta = clamp_theta(theta_init);
  Vector posterior(samples);
  result.loglik.push_back(e_step(result.theta, posterior));

  const double inv_samples = 1.0 / static_cast<double>(samples);
  while (result.iterations < max_iterations) {
    ++result.iterations;
    Vector updated(models);
    for (Eigen::Index j = 0; j < models; ++j) {
      double agree = 0.0;
      for (Eigen::Index i = 0; i < samples; ++i) {
        agree += votes(j, i) == 1 ? posterior[i] : 1.0 - posterior[i];
      }
      updated[j] = agree * inv_samples;
    }
    updated = clamp_theta(std::move(updated));
    const double delta = (updated - result.theta).cwiseAbs().maxCoeff();
    result.theta = std::move(updated);
    result.loglik.push_back(e_step(result.theta, posterior));
    if (delta < tol) break;
  }
  return result;
}

Ranking rank_laf(const ModelRegistry& registry, const TestContext& context) {
  check_context(context);
  const int n = registry.size();
  const auto samples = context.features.rows();
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> votes(n, samples);
  for (const ModelRecord& record : registry.records()) {
    const Vector probs = record.scores_on(context.features);
    for (Eigen::Index i = 0; i < samples; ++i) {
      votes(record.model_id - 1, i) = probs[i] >= 0.5 ? 1 : 0;
    }
  }

  const VoteResult vote = majority_pseudo_labels(votes);
  std::vector<Eigen::Index> disputed;
  for (Eigen::Index i = 0; i < samples; ++i) {
    if (vote.discriminative[i]) disputed.push_back(i);
  }
  if (disputed.empty()) {
    return recency_ranking(n, "laf", {kFlagLafFallback});
  }

  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> votes_d(n, disputed.size());
  for (std::size_t k = 0; k < disputed.size(); ++k) votes_d.col(k) = votes.col(disputed[k]);

  Vector theta_init(n);
  for (int j = 0; j < n; ++j) {
    double agree = 0.0;
    for (std::size_t k = 0; k < disputed.size(); ++k) {
      agree += votes_d(j, k) == vote.pseudo_labels[disputed[k]] ? 1.0 : 0.0;
    }
    theta_init[j] = agree / static_cast<double>(disputed.size());
  }

  const EmResult em = em_one_coin(votes_d, theta_init);
  std::vector<std::string> flags;
  if (vote.tie) flags.push_back(kFlagVoteTie);
  return make_ranking(em.theta, "laf", std::move(flags));
}

Ranking rank_mechanism(Mechanism mechanism, const ModelRegistry& registry,
                       const HistoryView& history, const TestContext& context,
                       const IntVectorRef& test_labels, const SbmOptions& options) {
  switch (mechanism) {
    case Mechanism::stationary:
      return rank_stationary(registry);
    case Mechanism::periodic:
      return rank_periodic(registry);
    case Mechanism::oracle:
      return rank_oracle(registry, context, test_labels);
    case Mechanism::tbm:
      return rank_tbm(registry, history);
    case Mechanism::rtbm:
      return rank_rtbm(registry, history);
    case Mechanism::sbm:
      return rank_sbm(registry, history, context, options);
    case Mechanism::rsbm:
      return rank_rsbm(registry, history, context, options);
    case Mechanism::crc:
      return rank_crc(registry, context);
    case Mechanism::laf:
      return rank_laf(registry, context);
  }
  throw std::logic_error("unreachable mechanism");
}

}  // namespace driftsel
