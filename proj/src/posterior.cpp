/*
 * Copyright 2026 The Swagkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "swag/posterior.hpp"

#include <cmath>

#include "swag/errors.hpp"
#include "swag/rng.hpp"

namespace swag {

void SamplingConfig::validate() const {
  if (num_samples < 1) {
    throw ConfigError("SamplingConfig: num_samples must be >= 1");
  }
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw ConfigError("SamplingConfig: scale must be >= 0 and finite");
  }
}

ParamSnapshot sample_params(const PosteriorApprox& p, const SamplingConfig& cfg,
                            std::uint64_t draw_index) {
  cfg.validate();
  const std::size_t dim = p.dim();
  const std::size_t rank = p.rank();
  if (!cfg.diag_only && rank < 2) {
    throw ConfigError("sample_params: posterior rank must be >= 2 (or use diag_only)");
  }
  if (cfg.scale == 0.0) {
    // Exact collapse onto the mean; adding a zero perturbation could still
    // flip signed zeros, so return the mean vector untouched.
    return ParamSnapshot(p.mean());
  }

  Rng rng(cfg.seed, stream_tag(kStreamPosteriorDraw, draw_index));
  const double s = std::sqrt(cfg.scale);
  const double diag_coef = s / std::sqrt(2.0);

  std::vector<double> theta(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    theta[j] = p.mean()[j] + diag_coef * std::sqrt(p.diag_var()[j]) * rng.normal();
  }
  if (!cfg.diag_only) {
    const double low_coef = s / std::sqrt(2.0 * static_cast<double>(rank - 1));
    for (const auto& col : p.deviation_columns()) {
      const double z = low_coef * rng.normal();
      for (std::size_t j = 0; j < dim; ++j) {
        theta[j] += col[j] * z;
      }
    }
  }
  return ParamSnapshot(std::move(theta));
}

std::vector<PredictionDistribution> predict_point(
    const ParamSnapshot& params, const ModelSpec& spec,
    const std::vector<std::vector<double>>& inputs) {
  std::vector<PredictionDistribution> out;
  out.reserve(inputs.size());
  for (const auto& x : inputs) {
    out.push_back(forward(spec, params, x));
  }
  return out;
}

namespace {

std::vector<ParamSnapshot> draw_samples(const PosteriorApprox& p, const SamplingConfig& cfg) {
  cfg.validate();
  std::vector<ParamSnapshot> samples;
  samples.reserve(cfg.num_samples);
  for (std::uint64_t n = 0; n < cfg.num_samples; ++n) {
    samples.push_back(sample_params(p, cfg, n));
  }
  return samples;
}

void check_param_count(const PosteriorApprox& p, const ModelSpec& spec) {
  spec.validate();
  if (spec.param_count() != p.dim()) {
    throw ConfigError("predict_ensemble: model parameter count " +
                      std::to_string(spec.param_count()) +
                      " does not match posterior dim " + std::to_string(p.dim()));
  }
}

}  // namespace

std::vector<PredictionDistribution> predict_ensemble(
    const PosteriorApprox& p, const ModelSpec& spec,
    const std::vector<std::vector<double>>& inputs, const SamplingConfig& cfg) {
  check_param_count(p, spec);
  const std::vector<ParamSnapshot> samples = draw_samples(p, cfg);

  std::vector<PredictionDistribution> out;
  out.reserve(inputs.size());
  for (const auto& x : inputs) {
    std::vector<double> mean;
    for (std::size_t n = 0; n < samples.size(); ++n) {
      const PredictionDistribution d = forward(spec, samples[n], x);
      if (n == 0) {
        mean = d.probs;
      } else {
        // Incremental mean: identical per-sample outputs stay bitwise fixed,
        // which keeps the scale = 0 ensemble equal to the point prediction.
        const double inv = 1.0 / static_cast<double>(n + 1);
        for (std::size_t c = 0; c < mean.size(); ++c) {
          mean[c] += (d.probs[c] - mean[c]) * inv;
        }
      }
    }
    validate_distribution(mean, "predict_ensemble output");
    out.push_back(PredictionDistribution{std::move(mean)});
  }
  return out;
}

EnsembleDetail predict_ensemble_detailed(const PosteriorApprox& p, const ModelSpec& spec,
                                         const std::vector<std::vector<double>>& inputs,
                                         const SamplingConfig& cfg) {
  check_param_count(p, spec);
  const std::vector<ParamSnapshot> samples = draw_samples(p, cfg);

  EnsembleDetail detail;
  detail.mean.reserve(inputs.size());
  detail.per_sample.reserve(inputs.size());
  for (const auto& x : inputs) {
    std::vector<PredictionDistribution> rows;
    rows.reserve(samples.size());
    std::vector<double> mean;
    for (std::size_t n = 0; n < samples.size(); ++n) {
      rows.push_back(forward(spec, samples[n], x));
      const auto& probs = rows.back().probs;
      if (n == 0) {
        mean = probs;
      } else {
        const double inv = 1.0 / static_cast<double>(n + 1);
        for (std::size_t c = 0; c < mean.size(); ++c) {
          mean[c] += (probs[c] - mean[c]) * inv;
        }
      }
    }
    validate_distribution(mean, "predict_ensemble output");
    detail.mean.push_back(PredictionDistribution{std::move(mean)});
    detail.per_sample.push_back(std::move(rows));
  }
  return detail;
}

}  // namespace swag
