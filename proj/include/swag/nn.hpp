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
#include <functional>
#include <string>
#include <vector>

#include "swag/data.hpp"
#include "swag/distribution.hpp"
#include "swag/trajectory.hpp"

namespace swag {

enum class Activation { tanh, relu };

Activation activation_from_string(const std::string& name);
std::string activation_name(Activation a);

// Feed-forward softmax classifier. Parameters are one flat vector; per layer
// the weight matrix is stored row-major (n_out x n_in) followed by the bias.
struct ModelSpec {
  std::vector<std::size_t> layer_sizes;  // input dim, hidden..., class count
  Activation activation = Activation::tanh;

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t num_classes() const { return layer_sizes.back(); }
  std::size_t param_count() const;
  void validate() const;  // >= 2 layers, all sizes >= 1, classes >= 2
};

struct TrainConfig {
  std::size_t epochs = 40;
  std::size_t batch_size = 32;
  double learning_rate = 0.25;
  std::size_t swa_start_epoch = 10;
  std::uint64_t seed = 0;
  double l2 = 0.0;

  void validate() const;
};

PredictionDistribution forward(const ModelSpec& spec, const ParamSnapshot& params,
                               const std::vector<double>& x);

// Exact gradient of cross_entropy(target, forward(spec, params, x)) with
// respect to every parameter.
std::vector<double> grad(const ModelSpec& spec, const ParamSnapshot& params,
                         const std::vector<double>& x, const std::vector<double>& target);

// Mean gradient and mean loss over a batch (mean reduction, so gradients are
// batch-size independent).
struct BatchGrad {
  std::vector<double> grad;
  double loss = 0.0;
};

BatchGrad grad_batch(const ModelSpec& spec, const ParamSnapshot& params,
                     const std::vector<const std::vector<double>*>& xs,
                     const std::vector<const std::vector<double>*>& targets);

double ce_loss(const ModelSpec& spec, const ParamSnapshot& params,
               const std::vector<double>& x, const std::vector<double>& target);

// Uniform init in (-1/sqrt(fan_in), 1/sqrt(fan_in)) per layer, seeded.
ParamSnapshot init_params(const ModelSpec& spec, std::uint64_t seed);

using EpochCallback =
    std::function<void(std::size_t epoch, const ParamSnapshot& params,
                       const SwagCollector& collector)>;

struct TrainResult {
  ParamSnapshot params;       // final-epoch parameters (the "base" model)
  SwagCollector collector;    // one snapshot per epoch >= swa_start_epoch
  std::vector<double> epoch_losses;
};

// SGD on one-hot majority gold labels. After each epoch e >= swa_start_epoch
// the current parameters are pushed into the collector, so
// collector.count() == epochs - swa_start_epoch.
TrainResult train(const ModelSpec& spec, const TrainConfig& cfg,
                  const std::vector<SoftLabelExample>& data, std::size_t rank_cap = 20,
                  const EpochCallback& hook = nullptr);

// Continues training from epoch `start_epoch` given checkpointed parameters
// and collector state; epoch shuffles are keyed by (seed, epoch), so a
// resumed run retraces the interrupted one exactly.
TrainResult resume_training(const ModelSpec& spec, const TrainConfig& cfg,
                            const std::vector<SoftLabelExample>& data,
                            std::size_t start_epoch, ParamSnapshot params,
                            SwagCollector collector, const EpochCallback& hook = nullptr);

}  // namespace swag
