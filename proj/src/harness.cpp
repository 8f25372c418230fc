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
#include "driftsel/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "driftsel/metrics.hpp"
#include "driftsel/svg_plot.hpp"

namespace driftsel {

namespace {

constexpr const char* kFlagSingleClassPeriod = "single_class_period";

std::string fmt_num(double value) {
  if (std::isnan(value)) return "";
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

// results.csv feeds `report`, so its values round-trip at full precision;
// the human-facing summary keeps the short form.
std::string fmt_full(double value) {
  if (std::isnan(value)) return "";
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string fmt_opt(const std::optional<double>& value) {
  return value ? fmt_num(*value) : std::string();
}

std::string fmt_opt_full(const std::optional<double>& value) {
  return value ? fmt_full(*value) : std::string();
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

bool is_single_class(const IntVectorRef& labels) {
  return (labels.array() == 1).all() || (labels.array() == 0).all();
}

int resolve_workers(int configured) {
  if (configured > 0) return configured;
  if (const char* env = std::getenv("DRIFTSEL_WORKERS")) {
    int value = 0;
    const std::string text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc() && ptr == text.data() + text.size() && value >= 1) return value;
    throw std::invalid_argument("DRIFTSEL_WORKERS must be a positive integer");
  }
  return 1;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (repeats < 1) throw std::invalid_argument("config: repeats must be >= 1");
  if (mechanisms.empty()) throw std::invalid_argument("config: mechanism list is empty");
  for (std::size_t i = 0; i < mechanisms.size(); ++i) {
    for (std::size_t j = i + 1; j < mechanisms.size(); ++j) {
      if (mechanisms[i] == mechanisms[j]) {
        throw std::invalid_argument("config: duplicate mechanism '" + to_string(mechanisms[i]) +
                                    "'");
      }
    }
  }
  if (csv_path.empty() == !scenario.has_value()) {
    throw std::invalid_argument("config: exactly one of csv data and scenario required");
  }
  if (jaccard_ks.empty()) throw std::invalid_argument("config: jaccard k list is empty");
  for (int k : jaccard_ks) {
    if (k < 1) throw std::invalid_argument("config: jaccard k must be >= 1");
  }
  if (workers < 0) throw std::invalid_argument("config: workers must be >= 0");
  if (scenario) scenario->validate();
}

ExperimentConfig experiment_config_from(const KeyValueConfig& kv) {
  static const std::vector<std::string> known = {
      "data",          "scenario",       "family",      "mechanisms",       "repeats",
      "seed",          "outdir",         "jaccard_k",   "workers",          "downsample_ratio",
      "downsample_min_rate", "tune",     "tune_per_window", "tune_budget",  "tune_folds",
      "hausdorff_cap"};
  for (const std::string& key : kv.keys()) {
    if (key.rfind("spec.", 0) == 0) continue;
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }

  ExperimentConfig config;
  config.csv_path = kv.get_string("data", "");
  if (kv.has("scenario")) config.scenario = load_scenario(kv.get_string("scenario"));
  config.family = family_from_string(kv.get_string("family", "lr"));
  if (kv.has("mechanisms")) {
    for (const std::string& name : kv.get_list("mechanisms")) {
      config.mechanisms.push_back(mechanism_from_string(name));
    }
  } else {
    config.mechanisms = all_mechanisms();
  }
  config.repeats = kv.get_int("repeats", config.repeats);
  config.master_seed = kv.get_u64("seed", config.master_seed);
  config.outdir = kv.get_string("outdir", config.outdir);
  if (kv.has("jaccard_k")) config.jaccard_ks = kv.get_int_list("jaccard_k");
  config.workers = kv.get_int("workers", config.workers);

  config.registry.downsample_ratio =
      kv.get_double("downsample_ratio", config.registry.downsample_ratio);
  config.registry.downsample_min_rate =
      kv.get_double("downsample_min_rate", config.registry.downsample_min_rate);
  config.registry.tune = kv.get_bool("tune", config.registry.tune);
  config.registry.tune_per_window = kv.get_bool("tune_per_window", config.registry.tune_per_window);
  config.registry.tune_budget = kv.get_int("tune_budget", config.registry.tune_budget);
  config.registry.tune_folds = kv.get_int("tune_folds", config.registry.tune_folds);
  config.sbm.hausdorff_cap = kv.get_int("hausdorff_cap", config.sbm.hausdorff_cap);

  LearnerSpec fixed = default_spec(config.family);
  bool any_fixed = false;
  for (const std::string& key : kv.keys()) {
    if (key.rfind("spec.", 0) == 0) {
      fixed.params[key.substr(5)] = kv.get_double(key);
      any_fixed = true;
    }
  }
  if (any_fixed) config.registry.fixed_spec = fixed;

  config.validate();
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from(KeyValueConfig::parse_file(path));
}

PeriodizedDataset load_dataset(const ExperimentConfig& config) {
  if (!config.csv_path.empty()) return read_periodized_csv(config.csv_path);
  return generate_drift_stream(*config.scenario);
}

bool ResultRow::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

namespace {

std::vector<ResultRow> run_one(const ExperimentConfig& config, const PeriodizedDataset& dataset,
                               int run) {
  const int l = dataset.period_count();
  const int half = l / 2;
  const std::uint64_t run_seed = config.master_seed ^ static_cast<std::uint64_t>(run);

  const ModelRegistry full =
      build_registry_for_period(dataset, config.family, l, run_seed, config.registry);

  std::vector<ResultRow> rows;
  rows.reserve(static_cast<std::size_t>(half) * config.mechanisms.size());
  for (int t = half + 1; t <= l; ++t) {
    const ModelRegistry registry = full.prefix(t - half);
    const TestContext context = make_test_context(dataset, t);
    const HistoryView history(dataset, t - 1);
    const IntVector& labels = dataset.period(t).labels;
    const bool single = is_single_class(labels);
    const bool trivial = registry.size() < 2;  // first testing period

    std::optional<Ranking> oracle;
    if (!single) oracle = rank_oracle(registry, context, labels);

    for (Mechanism mechanism : config.mechanisms) {
      ResultRow row;
      row.run = run;
      row.period = t;
      row.mechanism = to_string(mechanism);

      Ranking ranking;
      if (mechanism == Mechanism::oracle) {
        if (single) {
          ranking = rank_periodic(registry);  // placeholder order, flagged below
          ranking.mechanism = "oracle";
        } else {
          ranking = *oracle;
        }
      } else {
        ranking = rank_mechanism(mechanism, registry, history, context, labels, config.sbm);
      }

      row.top1_model_id = ranking.top1();
      row.ranking = ranking.model_ids;
      row.scores = ranking.scores;
      row.flags = ranking.flags;
      if (single) row.flags.push_back(kFlagSingleClassPeriod);

      if (!single) {
        row.top1_auc = evaluate_on_period(registry.record(row.top1_model_id), dataset, t);
        if (!trivial) row.tau = kendall_tau(ranking.model_ids, oracle->model_ids);
      }
      for (int k : config.jaccard_ks) {
        if (!single && !trivial && k <= registry.size()) {
          row.jaccard.push_back(jaccard_topk(ranking.model_ids, oracle->model_ids, k));
        } else {
          row.jaccard.push_back(std::nullopt);
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace

ResultsTable run_experiment(const ExperimentConfig& config, const PeriodizedDataset& dataset) {
  config.validate();
  const int l = dataset.period_count();
  if (l < 2 || l % 2 != 0) {
    throw std::invalid_argument("harness: dataset must provide an even period count >= 2");
  }

  ResultsTable table;
  table.jaccard_ks = config.jaccard_ks;
  std::vector<std::vector<ResultRow>> per_run(config.repeats);

  const int workers = std::min(resolve_workers(config.workers), config.repeats);
  if (workers <= 1) {
    for (int r = 1; r <= config.repeats; ++r) per_run[r - 1] = run_one(config, dataset, r);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const auto work = [&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= config.repeats) return;
        try {
          per_run[i] = run_one(config, dataset, i + 1);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& thread : pool) thread.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  for (auto& rows : per_run) {
    table.rows.insert(table.rows.end(), std::make_move_iterator(rows.begin()),
                      std::make_move_iterator(rows.end()));
  }
  return table;
}

ResultsTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  const PeriodizedDataset dataset = load_dataset(config);
  return run_experiment(config, dataset);
}

namespace {

struct Accumulator {
  std::vector<double> auc_values;
  std::vector<double> tau_values;
  std::vector<std::vector<double>> jaccard_values;
  std::vector<std::vector<int>> rankings;
};

double mean_of(const std::vector<double>& values) {
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

double sd_of(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double total = 0.0;
  for (double v : values) total += (v - mean) * (v - mean);
  return std::sqrt(total / static_cast<double>(values.size() - 1));
}

}  // namespace

Summary aggregate(const ResultsTable& results) {
  Summary summary;
  summary.jaccard_ks = results.jaccard_ks;
  const std::size_t k_count = results.jaccard_ks.size();

  std::vector<int> periods;
  std::vector<std::string> mechanisms;  // first-seen order
  for (const ResultRow& row : results.rows) {
    if (std::find(periods.begin(), periods.end(), row.period) == periods.end()) {
      periods.push_back(row.period);
    }
    if (std::find(mechanisms.begin(), mechanisms.end(), row.mechanism) == mechanisms.end()) {
      mechanisms.push_back(row.mechanism);
    }
  }
  std::sort(periods.begin(), periods.end());

  const auto collect = [&](int period, const std::string& mechanism) {
    Accumulator acc;
    acc.jaccard_values.resize(k_count);
    for (const ResultRow& row : results.rows) {
      if (row.mechanism != mechanism) continue;
      if (period != 0 && row.period != period) continue;
      if (row.has_flag(kFlagSingleClassPeriod)) continue;  // excluded from aggregation
      if (row.top1_auc) acc.auc_values.push_back(*row.top1_auc);
      if (row.tau) acc.tau_values.push_back(*row.tau);
      for (std::size_t k = 0; k < k_count && k < row.jaccard.size(); ++k) {
        if (row.jaccard[k]) acc.jaccard_values[k].push_back(*row.jaccard[k]);
      }
      if (period != 0 && row.ranking.size() >= 2) acc.rankings.push_back(row.ranking);
    }
    return acc;
  };

  const auto fill_row = [&](SummaryRow& out, const Accumulator& acc) {
    out.count = static_cast<int>(acc.auc_values.size());
    out.mean_auc = acc.auc_values.empty() ? std::nan("") : mean_of(acc.auc_values);
    out.sd_auc = acc.auc_values.empty() ? std::nan("") : sd_of(acc.auc_values, out.mean_auc);
    if (!acc.tau_values.empty()) out.mean_tau = mean_of(acc.tau_values);
    out.mean_jaccard.resize(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
      if (!acc.jaccard_values[k].empty()) out.mean_jaccard[k] = mean_of(acc.jaccard_values[k]);
    }
  };

  std::map<std::string, std::vector<double>> w_by_mechanism;
  for (int period : periods) {
    for (const std::string& mechanism : mechanisms) {
      const Accumulator acc = collect(period, mechanism);
      SummaryRow row;
      row.period = period;
      row.mechanism = mechanism;
      fill_row(row, acc);
      if (acc.rankings.size() >= 2) {
        row.kendall_w = kendall_w(acc.rankings);
        w_by_mechanism[mechanism].push_back(*row.kendall_w);
      }
      summary.rows.push_back(std::move(row));
    }
  }

  // Pooled rows: Scott-Knott over AUC observations across runs and periods.
  std::map<std::string, std::vector<double>> treatments;
  for (const std::string& mechanism : mechanisms) {
    const Accumulator acc = collect(0, mechanism);
    if (acc.auc_values.size() >= 2) treatments[mechanism] = acc.auc_values;
  }
  std::optional<SkResult> sk;
  if (treatments.size() >= 2) sk = scott_knott(treatments);

  for (const std::string& mechanism : mechanisms) {
    const Accumulator acc = collect(0, mechanism);
    SummaryRow row;
    row.period = 0;
    row.mechanism = mechanism;
    fill_row(row, acc);
    const auto w_it = w_by_mechanism.find(mechanism);
    if (w_it != w_by_mechanism.end()) row.kendall_w = mean_of(w_it->second);
    if (sk && sk->group_of.count(mechanism)) row.sk_group = sk->group_of.at(mechanism);
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

void write_results_csv(const ResultsTable& results, std::ostream& out) {
  out << "run,period,mechanism,top1_model_id,top1_auc,tau";
  for (int k : results.jaccard_ks) out << ",jaccard_" << k;
  out << ",ranking,flags\n";
  for (const ResultRow& row : results.rows) {
    out << row.run << ',' << row.period << ',' << row.mechanism << ',' << row.top1_model_id << ','
        << fmt_opt_full(row.top1_auc) << ',' << fmt_opt_full(row.tau);
    for (const auto& j : row.jaccard) out << ',' << fmt_opt_full(j);
    out << ',';
    for (std::size_t i = 0; i < row.ranking.size(); ++i) {
      if (i > 0) out << '>';
      out << row.ranking[i];
    }
    out << ',' << join(row.flags, ';') << '\n';
  }
}

void write_results_csv(const ResultsTable& results, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_results_csv: cannot open " + path);
  write_results_csv(results, out);
}

ResultsTable read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_results_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty results file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split(line, ',');
  if (header.size() < 8 || header[0] != "run" || header[1] != "period" ||
      header[2] != "mechanism" || header[3] != "top1_model_id" || header[4] != "top1_auc" ||
      header[5] != "tau" || header[header.size() - 2] != "ranking" ||
      header.back() != "flags") {
    throw std::runtime_error(path + ": unexpected results header");
  }

  ResultsTable table;
  for (std::size_t c = 6; c + 2 < header.size(); ++c) {
    if (header[c].rfind("jaccard_", 0) != 0) {
      throw std::runtime_error(path + ": unexpected column '" + header[c] + "'");
    }
    table.jaccard_ks.push_back(std::stoi(header[c].substr(8)));
  }

  const auto parse_opt = [](const std::string& text) -> std::optional<double> {
    if (text.empty()) return std::nullopt;
    return std::stod(text);
  };
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split(line, ',');
    // A trailing empty flags field is dropped by the splitter; restore it.
    if (fields.size() == header.size() - 1 && line.back() == ',') fields.emplace_back();
    if (fields.size() != header.size()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad field count");
    }
    ResultRow row;
    row.run = std::stoi(fields[0]);
    row.period = std::stoi(fields[1]);
    row.mechanism = fields[2];
    row.top1_model_id = std::stoi(fields[3]);
    row.top1_auc = parse_opt(fields[4]);
    row.tau = parse_opt(fields[5]);
    for (std::size_t k = 0; k < table.jaccard_ks.size(); ++k) {
      row.jaccard.push_back(parse_opt(fields[6 + k]));
    }
    const std::string& ranking = fields[header.size() - 2];
    for (const std::string& id : split(ranking, '>')) {
      if (!id.empty()) row.ranking.push_back(std::stoi(id));
    }
    for (const std::string& flag : split(fields.back(), ';')) {
      if (!flag.empty()) row.flags.push_back(flag);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_summary_csv(const Summary& summary, std::ostream& out) {
  out << "period,mechanism,n,mean_auc,sd_auc,mean_tau";
  for (int k : summary.jaccard_ks) out << ",mean_jaccard_" << k;
  out << ",kendall_w,sk_group\n";
  for (const SummaryRow& row : summary.rows) {
    if (row.period == 0) {
      out << "all";
    } else {
      out << row.period;
    }
    out << ',' << row.mechanism << ',' << row.count << ',' << fmt_num(row.mean_auc) << ','
        << fmt_num(row.sd_auc) << ',' << fmt_opt(row.mean_tau);
    for (const auto& j : row.mean_jaccard) out << ',' << fmt_opt(j);
    out << ',' << fmt_opt(row.kendall_w) << ',';
    if (row.sk_group) out << *row.sk_group;
    out << '\n';
  }
}

void write_rankings_csv(const ResultsTable& results, std::ostream& out) {
  out << "run,period,mechanism,rank,model_id,score,flags\n";
  for (const ResultRow& row : results.rows) {
    const std::string flags = join(row.flags, ';');
    for (std::size_t i = 0; i < row.ranking.size(); ++i) {
      out << row.run << ',' << row.period << ',' << row.mechanism << ',' << i + 1 << ','
          << row.ranking[i] << ',' << (i < row.scores.size() ? fmt_num(row.scores[i]) : "") << ','
          << flags << '\n';
    }
  }
}

namespace {

void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& writer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_report: cannot open " + path.string());
  writer(out);
  if (!out) throw std::runtime_error("emit_report: write failed for " + path.string());
}

}  // namespace

void emit_report(const Summary& summary, const ResultsTable& results, const std::string& outdir) {
  std::filesystem::create_directories(outdir);
  const std::filesystem::path dir(outdir);

  write_file(dir / "results.csv", [&](std::ostream& out) { write_results_csv(results, out); });
  write_file(dir / "summary.csv", [&](std::ostream& out) { write_summary_csv(summary, out); });
  write_file(dir / "rankings.csv", [&](std::ostream& out) { write_rankings_csv(results, out); });

  std::vector<std::string> mechanisms;
  for (const SummaryRow& row : summary.rows) {
    if (row.period != 0 &&
        std::find(mechanisms.begin(), mechanisms.end(), row.mechanism) == mechanisms.end()) {
      mechanisms.push_back(row.mechanism);
    }
  }

  const auto make_series = [&](const std::function<double(const SummaryRow&)>& pick) {
    std::vector<PlotSeries> series;
    for (const std::string& mechanism : mechanisms) {
      PlotSeries s;
      s.label = mechanism;
      for (const SummaryRow& row : summary.rows) {
        if (row.period == 0 || row.mechanism != mechanism) continue;
        s.x.push_back(row.period);
        s.y.push_back(pick(row));
      }
      series.push_back(std::move(s));
    }
    return series;
  };
  const auto has_points = [](const std::vector<PlotSeries>& series) {
    for (const auto& s : series) {
      for (double y : s.y) {
        if (!std::isnan(y)) return true;
      }
    }
    return false;
  };
  const auto opt_or_nan = [](const std::optional<double>& v) { return v ? *v : std::nan(""); };

  const auto auc_series = make_series([](const SummaryRow& r) { return r.mean_auc; });
  if (has_points(auc_series)) {
    write_line_plot_svg((dir / "auc_trend.svg").string(), "Rank-1 AUC by period", "period",
                        "mean top-1 AUC", auc_series);
  }
  const auto tau_series =
      make_series([&](const SummaryRow& r) { return opt_or_nan(r.mean_tau); });
  if (has_points(tau_series)) {
    write_line_plot_svg((dir / "tau_trend.svg").string(), "Rank agreement with oracle (tau)",
                        "period", "mean Kendall tau", tau_series);
  }
  if (!summary.jaccard_ks.empty()) {
    const auto jac_series = make_series([&](const SummaryRow& r) {
      return opt_or_nan(r.mean_jaccard.empty() ? std::optional<double>() : r.mean_jaccard.front());
    });
    if (has_points(jac_series)) {
      write_line_plot_svg((dir / "jaccard_trend.svg").string(),
                          "Top-" + std::to_string(summary.jaccard_ks.front()) +
                              " overlap with oracle",
                          "period", "mean Jaccard", jac_series);
    }
  }
  const auto w_series =
      make_series([&](const SummaryRow& r) { return opt_or_nan(r.kendall_w); });
  if (has_points(w_series)) {
    write_line_plot_svg((dir / "w_trend.svg").string(), "Ranking concordance across runs",
                        "period", "Kendall's W", w_series);
  }
}

}  // namespace driftsel
