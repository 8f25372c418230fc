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
#include "driftsel/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace driftsel {

namespace {

constexpr double kMinRange = 1e-12;

void check_labels_binary(const IntVectorRef& labels, const std::string& context) {
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw std::invalid_argument(context + ": label must be 0 or 1, got " +
                                  std::to_string(labels[i]));
    }
  }
}

}  // namespace

double quantile(const VectorRef& values, double p) {
  if (values.size() == 0) throw std::invalid_argument("quantile: empty input");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile: p outside [0, 1]");
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

RobustScaler fit_scaler(const MatrixRef& features) {
  if (features.rows() < 2) throw std::invalid_argument("fit_scaler: need at least 2 rows");
  if (features.cols() < 1) throw std::invalid_argument("fit_scaler: need at least 1 feature");
  RobustScaler scaler;
  scaler.median.resize(features.cols());
  scaler.range.resize(features.cols());
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    const Vector column = features.col(c);
    scaler.median[c] = quantile(column, 0.5);
    const double iqr = quantile(column, 0.75) - quantile(column, 0.25);
    scaler.range[c] = iqr > kMinRange ? iqr : 1.0;
  }
  return scaler;
}

Matrix RobustScaler::apply(const MatrixRef& features) const {
  if (features.cols() != dim()) {
    throw std::invalid_argument("RobustScaler::apply: feature dimension mismatch");
  }
  return (features.rowwise() - median.transpose()).array().rowwise() /
         range.transpose().array();
}

Vector RobustScaler::apply_row(const VectorRef& features) const {
  if (features.size() != dim()) {
    throw std::invalid_argument("RobustScaler::apply_row: feature dimension mismatch");
  }
  return (features - median).array() / range.array();
}

PeriodizedDataset segment_by_period(const MatrixRef& features, const IntVectorRef& labels,
                                    const std::vector<int>& period_ids,
                                    std::vector<std::string> feature_names) {
  const Eigen::Index n = features.rows();
  if (labels.size() != n || static_cast<Eigen::Index>(period_ids.size()) != n) {
    throw std::invalid_argument("segment_by_period: rows, labels and period ids must align");
  }
  if (n == 0) throw std::invalid_argument("segment_by_period: empty input");
  check_labels_binary(labels, "segment_by_period");

  const auto [lo_it, hi_it] = std::minmax_element(period_ids.begin(), period_ids.end());
  const int lo = *lo_it;
  const int hi = *hi_it;
  const int period_count = hi - lo + 1;
  if (period_count < 2) {
    throw std::invalid_argument("segment_by_period: need at least 2 periods");
  }

  std::vector<Eigen::Index> counts(period_count, 0);
  for (int id : period_ids) ++counts[id - lo];
  for (int p = 0; p < period_count; ++p) {
    if (counts[p] == 0) {
      throw std::invalid_argument("segment_by_period: gap in period ids at " +
                                  std::to_string(lo + p));
    }
  }

  PeriodizedDataset dataset;
  dataset.periods.resize(period_count);
  for (int p = 0; p < period_count; ++p) {
    dataset.periods[p].features.resize(counts[p], features.cols());
    dataset.periods[p].labels.resize(counts[p]);
  }
  std::vector<Eigen::Index> cursor(period_count, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int p = period_ids[i] - lo;
    dataset.periods[p].features.row(cursor[p]) = features.row(i);
    dataset.periods[p].labels[cursor[p]] = labels[i];
    ++cursor[p];
  }

  if (feature_names.empty()) {
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      feature_names.push_back("f" + std::to_string(c + 1));
    }
  } else if (static_cast<Eigen::Index>(feature_names.size()) != features.cols()) {
    throw std::invalid_argument("segment_by_period: feature name count mismatch");
  }
  dataset.feature_names = std::move(feature_names);
  return dataset;
}

PeriodData downsample_majority(const MatrixRef& features, const IntVectorRef& labels, double ratio,
                               std::uint64_t seed) {
  if (features.rows() != labels.size()) {
    throw std::invalid_argument("downsample_majority: rows and labels must align");
  }
  if (!(ratio > 0.0)) throw std::invalid_argument("downsample_majority: ratio must be positive");
  check_labels_binary(labels, "downsample_majority");

  const Eigen::Index pos = labels.sum();
  const Eigen::Index neg = labels.size() - pos;
  if (pos == 0 || neg == 0) {
    throw std::invalid_argument("downsample_majority: both classes required");
  }
  // Ties count the positive class as the minority, matching its usual role.
  const int minority_label = pos <= neg ? 1 : 0;
  const Eigen::Index minority = std::min(pos, neg);
  const Eigen::Index majority = std::max(pos, neg);
  const auto keep_majority =
      std::min(majority, static_cast<Eigen::Index>(std::ceil(ratio * static_cast<double>(minority))));

  std::vector<Eigen::Index> majority_rows;
  majority_rows.reserve(majority);
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != minority_label) majority_rows.push_back(i);
  }

  // Partial Fisher-Yates over the majority rows, then restore input order.
  std::mt19937_64 rng(seed);
  for (Eigen::Index k = 0; k < keep_majority; ++k) {
    std::uniform_int_distribution<Eigen::Index> pick(k, majority - 1);
    std::swap(majority_rows[k], majority_rows[pick(rng)]);
  }
  majority_rows.resize(keep_majority);
  std::sort(majority_rows.begin(), majority_rows.end());

  std::vector<bool> keep(labels.size(), false);
  for (Eigen::Index i = 0; i < labels.size(); ++i) keep[i] = labels[i] == minority_label;
  for (Eigen::Index row : majority_rows) keep[row] = true;

  PeriodData out;
  out.features.resize(minority + keep_majority, features.cols());
  out.labels.resize(minority + keep_majority);
  Eigen::Index cursor = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (!keep[i]) continue;
    out.features.row(cursor) = features.row(i);
    out.labels[cursor] = labels[i];
    ++cursor;
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, const std::string& context) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument(context + ": malformed number '" + text + "'");
  }
  return value;
}

int parse_int(const std::string& text, const std::string& context) {
  const double value = parse_double(text, context);
  const int rounded = static_cast<int>(std::llround(value));
  if (value != static_cast<double>(rounded)) {
    throw std::invalid_argument(context + ": expected integer, got '" + text + "'");
  }
  return rounded;
}

}  // namespace

PeriodizedDataset read_periodized_csv(std::istream& in, const std::string& context) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(context + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "period" || header[1] != "label") {
    throw std::invalid_argument(context + ": header must start with period,label");
  }
  std::vector<std::string> feature_names(header.begin() + 2, header.end());
  const auto dim = static_cast<Eigen::Index>(feature_names.size());

  std::vector<int> period_ids;
  std::vector<int> labels;
  std::vector<double> values;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = context + ":" + std::to_string(row_no);
    if (static_cast<Eigen::Index>(fields.size()) != dim + 2) {
      throw std::invalid_argument(where + ": expected " + std::to_string(dim + 2) + " fields");
    }
    period_ids.push_back(parse_int(fields[0], where));
    labels.push_back(parse_int(fields[1], where));
    for (Eigen::Index c = 0; c < dim; ++c) {
      values.push_back(parse_double(fields[2 + c], where));
    }
  }
  if (period_ids.empty()) throw std::invalid_argument(context + ": no data rows");

  const auto n = static_cast<Eigen::Index>(period_ids.size());
  Matrix features(n, dim);
  IntVector label_vec(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    label_vec[i] = labels[i];
    for (Eigen::Index c = 0; c < dim; ++c) features(i, c) = values[i * dim + c];
  }
  return segment_by_period(features, label_vec, period_ids, std::move(feature_names));
}

PeriodizedDataset read_periodized_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_periodized_csv: cannot open " + path);
  return read_periodized_csv(in, path);
}

void write_periodized_csv(const PeriodizedDataset& dataset, std::ostream& out) {
  out << "period,label";
  for (const auto& name : dataset.feature_names) out << ',' << name;
  out << '\n';
  char buffer[64];
  for (int p = 1; p <= dataset.period_count(); ++p) {
    const PeriodData& data = dataset.period(p);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      out << p << ',' << data.labels[i];
      for (Eigen::Index c = 0; c < data.dim(); ++c) {
        std::snprintf(buffer, sizeof(buffer), "%.17g", data.features(i, c));
        out << ',' << buffer;
      }
      out << '\n';
    }
  }
}

void write_periodized_csv(const PeriodizedDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_periodized_csv: cannot open " + path);
  write_periodized_csv(dataset, out);
}

}  // namespace driftsel
