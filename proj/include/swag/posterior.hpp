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

#pragma once

#include <cstdint>
#include <vector>

#include "swag/distribution.hpp"
#include "swag/nn.hpp"
#include "swag/trajectory.hpp"

namespace swag {

// Controls posterior sampling. scale multiplies the covariance (1.0 is the
// plain Gaussian posterior; 0 collapses every sample onto the mean, i.e. the
// averaged-weights point model). diag_only drops the low-rank term, which
// also lifts the rank >= 2 requirement.
struct SamplingConfig {
  std::size_t num_samples = 20;
  std::uint64_t seed = 0;
  double scale = 1.0;
  bool diag_only = false;

  void validate() const;
};

// One draw from N(mean, scale/2 * (diag(diag_var) + D D^T / (rank-1))),
// realized without forming the dense covariance:
//
//   theta = mean + sqrt(scale) * ( (1/sqrt 2) sqrt(diag_var) ∘ z1
//                                + (1/sqrt(2(rank-1))) D z2 )
//
// with z1 ~ N(0, I_dim) and z2 ~ N(0, I_rank). Deterministic given
// (cfg.seed, draw_index), independent of evaluation order.
ParamSnapshot sample_params(const PosteriorApprox& p, const SamplingConfig& cfg,
                            std::uint64_t draw_index);

// Softmax output of the model at fixed parameters, one row per input.
std::vector<PredictionDistribution> predict_point(const ParamSnapshot& params,
                                                  const ModelSpec& spec,
                                                  const std::vector<std::vector<double>>& inputs);

// Ensemble prediction: draws cfg.num_samples parameter vectors once, runs
// each over every input, and averages the per-sample softmax outputs.
std::vector<PredictionDistribution> predict_ensemble(
    const PosteriorApprox& p, const ModelSpec& spec,
    const std::vector<std::vector<double>>& inputs, const SamplingConfig& cfg);

// Same as predict_ensemble but also keeps the per-sample outputs
// (per_sample[i][n] is sample n's distribution for input i). Used by the
// inspect command and by convexity checks.
struct EnsembleDetail {
  std::vector<PredictionDistribution> mean;
  std::vector<std::vector<PredictionDistribution>> per_sample;
};

EnsembleDetail predict_ensemble_detailed(const PosteriorApprox& p, const ModelSpec& spec,
                                         const std::vector<std::vector<double>>& inputs,
                                         const SamplingConfig& cfg);

}  // namespace swag
