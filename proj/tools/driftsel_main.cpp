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
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "driftsel/data.hpp"
#include "driftsel/harness.hpp"
#include "driftsel/stream_gen.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& out_override,
                int repeats_override, const std::string& seed_override,
                const std::string& family_override, const std::string& mechanisms_override,
                int workers_override) {
  driftsel::KeyValueConfig kv = driftsel::KeyValueConfig::parse_file(config_path);
  if (!out_override.empty()) kv.set("outdir", out_override);
  if (repeats_override > 0) kv.set("repeats", std::to_string(repeats_override));
  if (!seed_override.empty()) kv.set("seed", seed_override);
  if (!family_override.empty()) kv.set("family", family_override);
  if (!mechanisms_override.empty()) kv.set("mechanisms", mechanisms_override);
  if (workers_override >= 0) kv.set("workers", std::to_string(workers_override));

  const driftsel::ExperimentConfig config = driftsel::experiment_config_from(kv);
  const driftsel::PeriodizedDataset dataset = driftsel::load_dataset(config);
  const driftsel::ResultsTable results = driftsel::run_experiment(config, dataset);
  const driftsel::Summary summary = driftsel::aggregate(results);
  driftsel::emit_report(summary, results, config.outdir);
  std::cout << "wrote " << results.rows.size() << " result rows to " << config.outdir << "\n";
  return 0;
}

int generate_command(const std::string& scenario_path, const std::string& out_path) {
  const driftsel::DriftScenario scenario = driftsel::load_scenario(scenario_path);
  const driftsel::PeriodizedDataset dataset = driftsel::generate_drift_stream(scenario);
  driftsel::write_periodized_csv(dataset, out_path);
  std::cout << "wrote " << dataset.period_count() << " periods ("
            << dataset.period(1).size() * dataset.period_count() << " rows) to " << out_path
            << "\n";
  return 0;
}

int report_command(const std::string& results_path, const std::string& outdir) {
  const driftsel::ResultsTable results = driftsel::read_results_csv(results_path);
  const driftsel::Summary summary = driftsel::aggregate(results);
  driftsel::emit_report(summary, results, outdir);
  std::cout << "wrote report for " << results.rows.size() << " rows to " << outdir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sliding-window model selection benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  int repeats_override = 0;
  std::string seed_override;
  std::string family_override;
  std::string mechanisms_override;
  int workers_override = -1;
  CLI::App* run = app.add_subcommand("run", "Run an experiment and emit a report");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--out", out_override, "override outdir");
  run->add_option("--repeats", repeats_override, "override repeat count");
  run->add_option("--seed", seed_override, "override master seed");
  run->add_option("--family", family_override, "override learner family (lr|cart|rf|nn)");
  run->add_option("--mechanisms", mechanisms_override, "override mechanism list (comma separated)");
  run->add_option("--workers", workers_override, "override worker thread count");

  std::string scenario_path;
  std::string gen_out;
  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic stream as CSV");
  generate->add_option("--scenario", scenario_path, "scenario config file")->required();
  generate->add_option("--out", gen_out, "output CSV path")->required();

  std::string results_path;
  std::string report_out;
  CLI::App* report = app.add_subcommand("report", "Rebuild summary and plots from results.csv");
  report->add_option("--results", results_path, "results.csv from a previous run")->required();
  report->add_option("--out", report_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return run_command(config_path, out_override, repeats_override, seed_override,
                         family_override, mechanisms_override, workers_override);
    }
    if (generate->parsed()) return generate_command(scenario_path, gen_out);
    if (report->parsed()) return report_command(results_path, report_out);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
