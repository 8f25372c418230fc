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
#include "driftsel/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "driftsel/metrics.hpp"

namespace driftsel {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Vector sigmoid_vec(const Eigen::ArrayXd& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); }).matrix();
}

void check_training_input(const MatrixRef& features, const IntVectorRef& labels) {
  if (features.rows() != labels.size()) {
    throw std::invalid_argument("train: rows and labels must align");
  }
  if (features.rows() < 2) throw std::invalid_argument("train: need at least 2 samples");
  if (features.cols() < 1) throw std::invalid_argument("train: need at least 1 feature");
  int pos = 0;
  int neg = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++pos;
    } else if (labels[i] == 0) {
      ++neg;
    } else {
      throw std::invalid_argument("train: label must be 0 or 1");
    }
  }
  if (pos == 0 || neg == 0) throw std::invalid_argument("train: single-class input");
}

void check_predict_input(const TrainedModel& model, const MatrixRef& features) {
  if (features.cols() != model.feature_dim()) {
    throw std::invalid_argument("predict_proba: feature dimension mismatch");
  }
}

// ---------------------------------------------------------------------------
// Logistic regression: full-batch gradient descent from zero weights.

class LogisticModel final : public TrainedModel {
 public:
  LogisticModel(Vector weights, double bias)
      : weights_(std::move(weights)), bias_(bias) {}

  ModelFamily family() const override { return ModelFamily::lr; }
  Eigen::Index feature_dim() const override { return weights_.size(); }

  Vector predict_proba(const MatrixRef& features) const override {
    check_predict_input(*this, features);
    return sigmoid_vec((features * weights_).array() + bias_);
  }

 private:
  Vector weights_;
  double bias_;
};

ModelPtr train_lr(const LearnerSpec& spec, const MatrixRef& features, const IntVectorRef& labels) {
  const double learning_rate = spec.at("learning_rate", 0.1);
  const int epochs = spec.at_int("epochs", 200);
  const double l2 = spec.at("l2", 1e-3);
  if (!(learning_rate > 0.0)) throw std::invalid_argument("lr: learning_rate must be positive");
  if (epochs < 1) throw std::invalid_argument("lr: epochs must be >= 1");
  if (l2 < 0.0) throw std::invalid_argument("lr: l2 must be >= 0");

  const auto n = static_cast<double>(features.rows());
  const Vector y = labels.cast<double>();
  Vector w = Vector::Zero(features.cols());
  double b = 0.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const Vector p = sigmoid_vec((features * w).array() + b);
    const Vector residual = p - y;
    const Vector grad = features.transpose() * residual / n + l2 * w;
    w -= learning_rate * grad;
    b -= learning_rate * residual.mean();
  }
  return std::make_shared<LogisticModel>(std::move(w), b);
}

// ---------------------------------------------------------------------------
// CART: greedy Gini splits, midpoint thresholds, deterministic tie-breaks.

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double prob = 0.0;
};

struct TreeParams {
  int max_depth = 6;
  int min_leaf = 5;
  double feature_fraction = 1.0;  // < 1 draws a random subset per split
};

double gini(double pos, double total) {
  const double p = pos / total;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

class TreeBuilder {
 public:
  TreeBuilder(const MatrixRef& features, const IntVectorRef& labels, const TreeParams& params,
              std::mt19937_64* rng)
      : features_(features), labels_(labels), params_(params), rng_(rng) {}

  std::vector<TreeNode> build(std::vector<Eigen::Index> rows) {
    nodes_.clear();
    grow(std::move(rows), 0);
    return std::move(nodes_);
  }

 private:
  int grow(std::vector<Eigen::Index> rows, int depth) {
    const auto n = static_cast<double>(rows.size());
    double pos = 0.0;
    for (Eigen::Index row : rows) pos += labels_[row];

    const int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[node_id].prob = pos / n;

    const bool pure = pos == 0.0 || pos == n;
    if (pure || depth >= params_.max_depth ||
        rows.size() < 2 * static_cast<std::size_t>(params_.min_leaf)) {
      return node_id;
    }

    const double parent_impurity = n * gini(pos, n);
    double best_impurity = parent_impurity - 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    for (Eigen::Index c : split_features()) {
      std::sort(rows.begin(), rows.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double va = features_(a, c);
        const double vb = features_(b, c);
        return va < vb || (va == vb && a < b);
      });
      double left_pos = 0.0;
      for (std::size_t k = 1; k < rows.size(); ++k) {
        left_pos += labels_[rows[k - 1]];
        if (k < static_cast<std::size_t>(params_.min_leaf) ||
            rows.size() - k < static_cast<std::size_t>(params_.min_leaf)) {
          continue;
        }
        const double lo = features_(rows[k - 1], c);
        const double hi = features_(rows[k], c);
        if (lo == hi) continue;
        const auto left_n = static_cast<double>(k);
        const double right_n = n - left_n;
        const double impurity =
            left_n * gini(left_pos, left_n) + right_n * gini(pos - left_pos, right_n);
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best_feature = static_cast<int>(c);
          best_threshold = lo + 0.5 * (hi - lo);
        }
      }
    }

    if (best_feature < 0) return node_id;

    std::vector<Eigen::Index> left_rows;
    std::vector<Eigen::Index> right_rows;
    for (Eigen::Index row : rows) {
      (features_(row, best_feature) < best_threshold ? left_rows : right_rows).push_back(row);
    }
    nodes_[node_id].feature = best_feature;
    nodes_[node_id].threshold = best_threshold;
    const int left = grow(std::move(left_rows), depth + 1);
    nodes_[node_id].left = left;
    const int right = grow(std::move(right_rows), depth + 1);
    nodes_[node_id].right = right;
    return node_id;
  }

  std::vector<Eigen::Index> split_features() {
    const Eigen::Index d = features_.cols();
    std::vector<Eigen::Index> all(d);
    std::iota(all.begin(), all.end(), 0);
    if (params_.feature_fraction >= 1.0 || rng_ == nullptr) return all;
    const auto take = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::llround(params_.feature_fraction * d)));
    for (Eigen::Index k = 0; k < take; ++k) {
      std::uniform_int_distribution<Eigen::Index> pick(k, d - 1);
      std::swap(all[k], all[pick(*rng_)]);
    }
    all.resize(take);
    std::sort(all.begin(), all.end());
    return all;
  }

  const MatrixRef& features_;
  const IntVectorRef& labels_;
  const TreeParams& params_;
  std::mt19937_64* rng_;
  std::vector<TreeNode> nodes_;
};

double tree_predict(const std::vector<TreeNode>& nodes, const MatrixRef& features,
                    Eigen::Index row) {
  int node = 0;
  while (nodes[node].feature >= 0) {
    node = features(row, nodes[node].feature) < nodes[node].threshold ? nodes[node].left
                                                                      : nodes[node].right;
  }
  return nodes[node].prob;
}

class CartModel final : public TrainedModel {
 public:
  CartModel(std::vector<TreeNode> nodes, Eigen::Index dim)
      : nodes_(std::move(nodes)), dim_(dim) {}

  ModelFamily family() const override { return ModelFamily::cart; }
  Eigen::Index feature_dim() const override { return dim_; }

  Vector predict_proba(const MatrixRef& features) const override {
    check_predict_input(*this, features);
    Vector out(features.rows());
    for (Eigen::Index i = 0; i < features.rows(); ++i) out[i] = tree_predict(nodes_, features, i);
    return out;
  }

 private:
  std::vector<TreeNode> nodes_;
  Eigen::Index dim_;
};

TreeParams tree_params_from(const LearnerSpec& spec) {
  TreeParams params;
  params.max_depth = spec.at_int("max_depth", params.max_depth);
  params.min_leaf = spec.at_int("min_leaf", params.min_leaf);
  params.feature_fraction = spec.at("feature_fraction", 1.0);
  if (params.max_depth < 1) throw std::invalid_argument("tree: max_depth must be >= 1");
  if (params.min_leaf < 1) throw std::invalid_argument("tree: min_leaf must be >= 1");
  if (!(params.feature_fraction > 0.0) || params.feature_fraction > 1.0) {
    throw std::invalid_argument("tree: feature_fraction must lie in (0, 1]");
  }
  return params;
}

ModelPtr train_cart(const LearnerSpec& spec, const MatrixRef& features,
                    const IntVectorRef& labels) {
  TreeParams params = tree_params_from(spec);
  params.feature_fraction = 1.0;  // cart always sees every feature
  std::vector<Eigen::Index> rows(features.rows());
  std::iota(rows.begin(), rows.end(), 0);
  TreeBuilder builder(features, labels, params, nullptr);
  return std::make_shared<CartModel>(builder.build(std::move(rows)), features.cols());
}

// ---------------------------------------------------------------------------
// Random forest: bagged trees with per-split feature subsampling.

class ForestModel final : public TrainedModel {
 public:
  ForestModel(std::vector<std::vector<TreeNode>> trees, Eigen::Index dim)
      : trees_(std::move(trees)), dim_(dim) {}

  ModelFamily family() const override { return ModelFamily::rf; }
  Eigen::Index feature_dim() const override { return dim_; }

  Vector predict_proba(const MatrixRef& features) const override {
    check_predict_input(*this, features);
    Vector out = Vector::Zero(features.rows());
    for (const auto& tree : trees_) {
      for (Eigen::Index i = 0; i < features.rows(); ++i) {
        out[i] += tree_predict(tree, features, i);
      }
    }
    return out / static_cast<double>(trees_.size());
  }

 private:
  std::vector<std::vector<TreeNode>> trees_;
  Eigen::Index dim_;
};

ModelPtr train_rf(const LearnerSpec& spec, const MatrixRef& features, const IntVectorRef& labels,
                  std::uint64_t seed) {
  const TreeParams params = tree_params_from(spec);
  const int tree_count = spec.at_int("trees", 64);
  const bool bootstrap = spec.at_int("bootstrap", 1) != 0;
  if (tree_count < 1) throw std::invalid_argument("rf: trees must be >= 1");

  const Eigen::Index n = features.rows();
  std::vector<std::vector<TreeNode>> trees;
  trees.reserve(tree_count);
  for (int t = 0; t < tree_count; ++t) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<Eigen::Index> rows(n);
    if (bootstrap) {
      std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
      for (Eigen::Index i = 0; i < n; ++i) rows[i] = pick(rng);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeBuilder builder(features, labels, params, &rng);
    trees.push_back(builder.build(std::move(rows)));
  }
  return std::make_shared<ForestModel>(std::move(trees), features.cols());
}

// ---------------------------------------------------------------------------
// One-hidden-layer network, logistic activations, full-batch backprop.

class NnModel final : public TrainedModel {
 public:
  NnModel(Matrix w1, Vector b1, Vector w2, double b2)
      : w1_(std::move(w1)), b1_(std::move(b1)), w2_(std::move(w2)), b2_(b2) {}

  ModelFamily family() const override { return ModelFamily::nn; }
  Eigen::Index feature_dim() const override { return w1_.rows(); }

  Vector predict_proba(const MatrixRef& features) const override {
    check_predict_input(*this, features);
    const Matrix hidden =
        ((features * w1_).rowwise() + b1_.transpose()).unaryExpr([](double v) { return sigmoid(v); });
    return sigmoid_vec((hidden * w2_).array() + b2_);
  }

 private:
  Matrix w1_;  // d x h
  Vector b1_;  // h
  Vector w2_;  // h
  double b2_;
};

ModelPtr train_nn(const LearnerSpec& spec, const MatrixRef& features, const IntVectorRef& labels,
                  std::uint64_t seed) {
  const int width = spec.at_int("width", 16);
  const double learning_rate = spec.at("learning_rate", 0.05);
  const int epochs = spec.at_int("epochs", 200);
  if (width < 1) throw std::invalid_argument("nn: width must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("nn: learning_rate must be positive");
  if (epochs < 1) throw std::invalid_argument("nn: epochs must be >= 1");

  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  std::mt19937_64 rng(seed);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(width));
  std::uniform_real_distribution<double> u1(-s1, s1);
  std::uniform_real_distribution<double> u2(-s2, s2);

  Matrix w1(d, width);
  for (Eigen::Index c = 0; c < width; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) w1(r, c) = u1(rng);
  }
  Vector b1 = Vector::Zero(width);
  Vector w2(width);
  for (Eigen::Index r = 0; r < width; ++r) w2[r] = u2(rng);
  double b2 = 0.0;

  const Vector y = labels.cast<double>();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const Matrix hidden = ((features * w1).rowwise() + b1.transpose())
                              .unaryExpr([](double v) { return sigmoid(v); });
    const Vector out = sigmoid_vec((hidden * w2).array() + b2);

    const Vector dz2 = (out - y) * inv_n;                       // n
    const Vector grad_w2 = hidden.transpose() * dz2;            // h
    const double grad_b2 = dz2.sum();
    const Matrix dz1 = (dz2 * w2.transpose()).cwiseProduct(     // n x h
        hidden.cwiseProduct((1.0 - hidden.array()).matrix()));
    const Matrix grad_w1 = features.transpose() * dz1;          // d x h
    const Vector grad_b1 = dz1.colwise().sum().transpose();

    w1 -= learning_rate * grad_w1;
    b1 -= learning_rate * grad_b1;
    w2 -= learning_rate * grad_w2;
    b2 -= learning_rate * grad_b2;
  }
  return std::make_shared<NnModel>(std::move(w1), std::move(b1), std::move(w2), b2);
}

}  // namespace

ModelFamily family_from_string(const std::string& name) {
  if (name == "lr") return ModelFamily::lr;
  if (name == "cart") return ModelFamily::cart;
  if (name == "rf") return ModelFamily::rf;
  if (name == "nn") return ModelFamily::nn;
  throw std::invalid_argument("unknown model family '" + name + "'");
}

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::lr:
      return "lr";
    case ModelFamily::cart:
      return "cart";
    case ModelFamily::rf:
      return "rf";
    case ModelFamily::nn:
      return "nn";
  }
  throw std::logic_error("unreachable model family");
}

double LearnerSpec::at(const std::string& name, double fallback) const {
  const auto it = params.find(name);
  return it == params.end() ? fallback : it->second;
}

int LearnerSpec::at_int(const std::string& name, int fallback) const {
  const auto it = params.find(name);
  return it == params.end() ? fallback : static_cast<int>(std::llround(it->second));
}

std::string LearnerSpec::describe() const {
  std::ostringstream out;
  out << to_string(family) << '(';
  bool first = true;
  for (const auto& [name, value] : params) {
    if (!first) out << ',';
    first = false;
    out << name << '=' << value;
  }
  out << ')';
  return out.str();
}

LearnerSpec default_spec(ModelFamily family) {
  LearnerSpec spec;
  spec.family = family;
  switch (family) {
    case ModelFamily::lr:
      spec.params = {{"learning_rate", 0.1}, {"epochs", 200}, {"l2", 1e-3}};
      break;
    case ModelFamily::cart:
      spec.params = {{"max_depth", 6}, {"min_leaf", 5}};
      break;
    case ModelFamily::rf:
      spec.params = {{"trees", 64},        {"max_depth", 8},  {"min_leaf", 5},
                     {"feature_fraction", 0.7}, {"bootstrap", 1}};
      break;
    case ModelFamily::nn:
      spec.params = {{"width", 16}, {"learning_rate", 0.05}, {"epochs", 200}};
      break;
  }
  return spec;
}

double predict_proba_one(const TrainedModel& model, const VectorRef& features) {
  Matrix row(1, features.size());
  row.row(0) = features.transpose();
  return model.predict_proba(row)[0];
}

ModelPtr train(const LearnerSpec& spec, const MatrixRef& features, const IntVectorRef& labels,
               std::uint64_t seed) {
  check_training_input(features, labels);
  switch (spec.family) {
    case ModelFamily::lr:
      return train_lr(spec, features, labels);
    case ModelFamily::cart:
      return train_cart(spec, features, labels);
    case ModelFamily::rf:
      return train_rf(spec, features, labels, seed);
    case ModelFamily::nn:
      return train_nn(spec, features, labels, seed);
  }
  throw std::logic_error("unreachable model family");
}

std::vector<LearnerSpec> sample_specs(ModelFamily family, int budget, std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("sample_specs: budget must be >= 1");
  std::mt19937_64 rng(seed);
  const auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const auto log_uniform = [&](double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  };
  const auto uniform_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  std::vector<LearnerSpec> specs;
  specs.reserve(budget);
  for (int i = 0; i < budget; ++i) {
    LearnerSpec spec;
    spec.family = family;
    switch (family) {
      case ModelFamily::lr:
        spec.params["learning_rate"] = log_uniform(1e-3, 1.0);
        spec.params["epochs"] = uniform_int(50, 500);
        spec.params["l2"] = log_uniform(1e-6, 0.1);
        break;
      case ModelFamily::cart:
        spec.params["max_depth"] = uniform_int(2, 12);
        spec.params["min_leaf"] = uniform_int(1, 20);
        break;
      case ModelFamily::rf:
        spec.params["trees"] = uniform_int(16, 96);
        spec.params["max_depth"] = uniform_int(3, 12);
        spec.params["min_leaf"] = uniform_int(1, 10);
        spec.params["feature_fraction"] = 0.3 + 0.1 * uniform_int(0, 7);
        spec.params["bootstrap"] = 1;
        break;
      case ModelFamily::nn:
        spec.params["width"] = uniform_int(4, 48);
        spec.params["learning_rate"] = log_uniform(1e-3, 0.3);
        spec.params["epochs"] = uniform_int(50, 300);
        break;
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

std::vector<int> stratified_folds(const IntVectorRef& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("stratified_folds: need at least 2 folds");
  std::vector<Eigen::Index> pos;
  std::vector<Eigen::Index> neg;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    (labels[i] == 1 ? pos : neg).push_back(i);
  }
  if (static_cast<int>(pos.size()) < folds || static_cast<int>(neg.size()) < folds) {
    throw std::invalid_argument("stratified_folds: folds exceed a class count");
  }
  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(labels.size(), 0);
  for (auto* group : {&pos, &neg}) {
    std::shuffle(group->begin(), group->end(), rng);
    for (std::size_t i = 0; i < group->size(); ++i) {
      fold_of[(*group)[i]] = static_cast<int>(i % folds);
    }
  }
  return fold_of;
}

double cv_auc(const LearnerSpec& spec, const MatrixRef& features, const IntVectorRef& labels,
              const std::vector<int>& fold_of, std::uint64_t train_seed) {
  if (static_cast<Eigen::Index>(fold_of.size()) != features.rows()) {
    throw std::invalid_argument("cv_auc: fold assignment must align with rows");
  }
  const int folds = *std::max_element(fold_of.begin(), fold_of.end()) + 1;
  double total = 0.0;
  int used = 0;
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train_rows;
    std::vector<Eigen::Index> val_rows;
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      (fold_of[i] == f ? val_rows : train_rows).push_back(i);
    }
    Matrix x_train = features(train_rows, Eigen::all);
    IntVector y_train = labels(train_rows);
    Matrix x_val = features(val_rows, Eigen::all);
    IntVector y_val = labels(val_rows);
    if ((y_val.array() == 1).all() || (y_val.array() == 0).all()) continue;
    const ModelPtr model = train(spec, x_train, y_train, mix_seed(train_seed, f));
    total += auc(model->predict_proba(x_val), y_val);
    ++used;
  }
  if (used == 0) throw std::runtime_error("cv_auc: every validation split was single-class");
  return total / used;
}

LearnerSpec random_search(ModelFamily family, const MatrixRef& features,
                          const IntVectorRef& labels, int budget, int folds, std::uint64_t seed) {
  const std::vector<LearnerSpec> specs = sample_specs(family, budget, mix_seed(seed, 0));
  const std::vector<int> fold_of = stratified_folds(labels, folds, mix_seed(seed, 1));
  int best = 0;
  double best_score = -1.0;
  for (int i = 0; i < budget; ++i) {
    const double score = cv_auc(specs[i], features, labels, fold_of, mix_seed(seed, 2, i));
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return specs[best];
}

}  // namespace driftsel
