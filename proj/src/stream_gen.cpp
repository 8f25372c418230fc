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
#include "driftsel/stream_gen.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "driftsel/config.hpp"

namespace driftsel {

namespace {

// Box-Muller over raw mt19937_64 output. std::normal_distribution is
// implementation-defined; this keeps streams reproducible across toolchains.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform_open() {
    // 53-bit mantissa draw in (0, 1].
    return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1p-53;
  }

  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

GaussianRegime make_regime(int dim, double sep, double shift, double sigma, bool flipped) {
  GaussianRegime regime;
  regime.class_means = Matrix::Zero(2, dim);
  regime.class_means(0, 0) = flipped ? sep : -sep;
  regime.class_means(1, 0) = flipped ? -sep : sep;
  for (Eigen::Index c = 1; c < dim; ++c) {
    regime.class_means(0, c) += shift;
    regime.class_means(1, c) += shift;
  }
  regime.class_sigmas = Vector::Constant(2, sigma);
  return regime;
}

GaussianRegime interpolate(const GaussianRegime& a, const GaussianRegime& b, double alpha) {
  GaussianRegime regime;
  regime.class_means = (1.0 - alpha) * a.class_means + alpha * b.class_means;
  regime.class_sigmas = (1.0 - alpha) * a.class_sigmas + alpha * b.class_sigmas;
  return regime;
}

int required_regimes(const DriftScenario& scenario) {
  switch (scenario.kind) {
    case DriftKind::none:
      return 1;
    case DriftKind::abrupt:
    case DriftKind::gradual:
      return 2;
    case DriftKind::cyclic:
      return scenario.cycle_length;
  }
  throw std::logic_error("unreachable drift kind");
}

}  // namespace

DriftKind drift_kind_from_string(const std::string& name) {
  if (name == "none") return DriftKind::none;
  if (name == "abrupt") return DriftKind::abrupt;
  if (name == "gradual") return DriftKind::gradual;
  if (name == "cyclic") return DriftKind::cyclic;
  throw std::invalid_argument("unknown drift kind '" + name + "'");
}

std::string to_string(DriftKind kind) {
  switch (kind) {
    case DriftKind::none:
      return "none";
    case DriftKind::abrupt:
      return "abrupt";
    case DriftKind::gradual:
      return "gradual";
    case DriftKind::cyclic:
      return "cyclic";
  }
  throw std::logic_error("unreachable drift kind");
}

void DriftScenario::validate() const {
  if (period_count < 2) throw std::invalid_argument("scenario: need at least 2 periods");
  if (samples_per_period < 4) {
    throw std::invalid_argument("scenario: need at least 4 samples per period");
  }
  if (!(positive_rate > 0.0) || !(positive_rate < 1.0)) {
    throw std::invalid_argument("scenario: positive_rate must lie in (0, 1)");
  }
  if (positive_rate * samples_per_period < 5.0) {
    throw std::invalid_argument("scenario: positive_rate * samples_per_period must be >= 5");
  }
  if (kind == DriftKind::cyclic && cycle_length < 2) {
    throw std::invalid_argument("scenario: cyclic needs cycle_length >= 2");
  }
  if (regimes.empty()) {
    if (dim < 2) throw std::invalid_argument("scenario: default regimes need dim >= 2");
    if (!(separation > 0.0)) throw std::invalid_argument("scenario: separation must be positive");
    if (!(noise_sigma > 0.0)) throw std::invalid_argument("scenario: sigma must be positive");
  } else {
    if (static_cast<int>(regimes.size()) < required_regimes(*this)) {
      throw std::invalid_argument("scenario: kind needs at least " +
                                  std::to_string(required_regimes(*this)) + " regimes");
    }
    for (const auto& regime : regimes) {
      if (regime.class_means.rows() != 2 || regime.class_means.cols() < 1) {
        throw std::invalid_argument("scenario: regime means must be 2 x d");
      }
      if (regime.class_means.cols() != regimes.front().class_means.cols()) {
        throw std::invalid_argument("scenario: regimes disagree on dimension");
      }
      if (regime.class_sigmas.size() != 2 || (regime.class_sigmas.array() <= 0.0).any()) {
        throw std::invalid_argument("scenario: regime sigmas must be 2 positive values");
      }
    }
  }
}

std::vector<GaussianRegime> default_regimes(const DriftScenario& scenario) {
  const GaussianRegime base = make_regime(scenario.dim, scenario.separation, 0.0,
                                          scenario.noise_sigma, /*flipped=*/false);
  switch (scenario.kind) {
    case DriftKind::none:
      return {base};
    case DriftKind::abrupt:
      return {base, make_regime(scenario.dim, scenario.separation, scenario.shift,
                                scenario.noise_sigma, /*flipped=*/false)};
    case DriftKind::gradual:
      return {base, make_regime(scenario.dim, scenario.separation, scenario.shift,
                                scenario.noise_sigma, /*flipped=*/true)};
    case DriftKind::cyclic: {
      const GaussianRegime swapped = make_regime(scenario.dim, scenario.separation, scenario.shift,
                                                 scenario.noise_sigma, /*flipped=*/true);
      std::vector<GaussianRegime> regimes;
      for (int i = 0; i < scenario.cycle_length; ++i) {
        regimes.push_back(i % 2 == 0 ? base : swapped);
      }
      return regimes;
    }
  }
  throw std::logic_error("unreachable drift kind");
}

GaussianRegime regime_at(const DriftScenario& scenario, int period) {
  if (period < 1 || period > scenario.period_count) {
    throw std::invalid_argument("regime_at: period out of range");
  }
  const std::vector<GaussianRegime> regimes =
      scenario.regimes.empty() ? default_regimes(scenario) : scenario.regimes;
  switch (scenario.kind) {
    case DriftKind::none:
      return regimes[0];
    case DriftKind::abrupt:
      return period <= scenario.period_count / 2 ? regimes[0] : regimes[1];
    case DriftKind::gradual: {
      const double alpha = scenario.period_count == 1
                               ? 0.0
                               : static_cast<double>(period - 1) /
                                     static_cast<double>(scenario.period_count - 1);
      return interpolate(regimes[0], regimes[1], alpha);
    }
    case DriftKind::cyclic:
      return regimes[(period - 1) % scenario.cycle_length];
  }
  throw std::logic_error("unreachable drift kind");
}

PeriodizedDataset generate_drift_stream(const DriftScenario& scenario) {
  scenario.validate();
  const int n = scenario.samples_per_period;
  auto n_pos = static_cast<Eigen::Index>(std::llround(scenario.positive_rate * n));
  n_pos = std::min<Eigen::Index>(std::max<Eigen::Index>(n_pos, 1), n - 1);
  const Eigen::Index n_neg = n - n_pos;

  PeriodizedDataset dataset;
  dataset.periods.resize(scenario.period_count);
  for (int p = 1; p <= scenario.period_count; ++p) {
    const GaussianRegime regime = regime_at(scenario, p);
    const auto dim = regime.dim();
    NormalSampler normal(mix_seed(scenario.seed, static_cast<std::uint64_t>(p)));
    PeriodData& data = dataset.periods[p - 1];
    data.features.resize(n, dim);
    data.labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int label = i < n_neg ? 0 : 1;
      data.labels[i] = label;
      for (Eigen::Index c = 0; c < dim; ++c) {
        data.features(i, c) =
            regime.class_means(label, c) + regime.class_sigmas[label] * normal.next();
      }
    }
  }
  const auto dim = dataset.periods.front().dim();
  for (Eigen::Index c = 0; c < dim; ++c) {
    dataset.feature_names.push_back("f" + std::to_string(c + 1));
  }
  return dataset;
}

DriftScenario scenario_from_config(const KeyValueConfig& config) {
  DriftScenario scenario;
  scenario.kind = drift_kind_from_string(config.get_string("kind", "none"));
  scenario.period_count = config.get_int("periods", scenario.period_count);
  scenario.samples_per_period = config.get_int("samples_per_period", scenario.samples_per_period);
  scenario.positive_rate = config.get_double("positive_rate", scenario.positive_rate);
  scenario.dim = config.get_int("dim", scenario.dim);
  scenario.cycle_length = config.get_int("cycle_length", scenario.cycle_length);
  scenario.seed = config.get_u64("seed", scenario.seed);
  scenario.separation = config.get_double("separation", scenario.separation);
  scenario.shift = config.get_double("shift", scenario.shift);
  scenario.noise_sigma = config.get_double("sigma", scenario.noise_sigma);

  for (int r = 0;; ++r) {
    const std::string prefix = "regime" + std::to_string(r) + ".";
    if (!config.has(prefix + "mean0")) break;
    GaussianRegime regime;
    const std::vector<double> mean0 = config.get_double_list(prefix + "mean0");
    const std::vector<double> mean1 = config.get_double_list(prefix + "mean1");
    if (mean0.size() != mean1.size() || mean0.empty()) {
      throw std::invalid_argument("scenario: regime mean lists must be non-empty and aligned");
    }
    const auto dim = static_cast<Eigen::Index>(mean0.size());
    regime.class_means.resize(2, dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
      regime.class_means(0, c) = mean0[c];
      regime.class_means(1, c) = mean1[c];
    }
    regime.class_sigmas.resize(2);
    regime.class_sigmas[0] = config.get_double(prefix + "sigma0", 1.0);
    regime.class_sigmas[1] = config.get_double(prefix + "sigma1", 1.0);
    scenario.regimes.push_back(std::move(regime));
  }
  if (!scenario.regimes.empty()) scenario.dim = static_cast<int>(scenario.regimes[0].dim());
  scenario.validate();
  return scenario;
}

DriftScenario load_scenario(const std::string& path) {
  return scenario_from_config(KeyValueConfig::parse_file(path));
}

}  // namespace driftsel
