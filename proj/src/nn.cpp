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

#include "swag/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swag/errors.hpp"
#include "swag/rng.hpp"

namespace swag {

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  throw ConfigError("unknown activation \"" + name + "\" (expected tanh or relu)");
}

std::string activation_name(Activation a) {
  return a == Activation::tanh ? "tanh" : "relu";
}

std::size_t ModelSpec::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    n += (layer_sizes[l] + 1) * layer_sizes[l + 1];
  }
  return n;
}

void ModelSpec::validate() const {
  if (layer_sizes.size() < 2) {
    throw ConfigError("ModelSpec: need at least input and output layer sizes");
  }
  for (const std::size_t s : layer_sizes) {
    if (s < 1) throw ConfigError("ModelSpec: layer sizes must be >= 1");
  }
  if (num_classes() < 2) {
    throw ConfigError("ModelSpec: need at least 2 classes");
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("TrainConfig: learning_rate must be positive and finite");
  }
  if (swa_start_epoch >= epochs) {
    throw ConfigError("TrainConfig: swa_start_epoch must be < epochs");
  }
  if (!(l2 >= 0.0) || !std::isfinite(l2)) {
    throw ConfigError("TrainConfig: l2 must be >= 0 and finite");
  }
}

namespace {

struct ForwardTrace {
  // activations[0] is the input; activations[l+1] the output of layer l
  // (post-activation, or softmax for the last layer).
  std::vector<std::vector<double>> activations;
  std::vector<std::vector<double>> pre_acts;  // z per layer
};

void check_shapes(const ModelSpec& spec, const ParamSnapshot& params,
                  const std::vector<double>& x) {
  spec.validate();
  if (params.dim() != spec.param_count()) {
    throw ConfigError("parameter count " + std::to_string(params.dim()) +
                      " does not match model (" + std::to_string(spec.param_count()) + ")");
  }
  if (x.size() != spec.input_dim()) {
    throw ConfigError("input dim " + std::to_string(x.size()) + " does not match model (" +
                      std::to_string(spec.input_dim()) + ")");
  }
}

double activate(Activation a, double z) {
  return a == Activation::tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

double activate_deriv(Activation a, double z) {
  if (a == Activation::tanh) {
    const double t = std::tanh(z);
    return 1.0 - t * t;
  }
  return z > 0.0 ? 1.0 : 0.0;
}

void softmax_inplace(std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

ForwardTrace forward_trace(const ModelSpec& spec, const std::vector<double>& p,
                           const std::vector<double>& x) {
  const std::size_t num_layers = spec.layer_sizes.size() - 1;
  ForwardTrace t;
  t.activations.resize(num_layers + 1);
  t.pre_acts.resize(num_layers);
  t.activations[0] = x;

  std::size_t off = 0;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::size_t n_in = spec.layer_sizes[l];
    const std::size_t n_out = spec.layer_sizes[l + 1];
    const double* w = p.data() + off;
    const double* b = w + n_in * n_out;
    const std::vector<double>& a = t.activations[l];

    std::vector<double> z(n_out);
    for (std::size_t r = 0; r < n_out; ++r) {
      double acc = b[r];
      const double* wr = w + r * n_in;
      for (std::size_t c = 0; c < n_in; ++c) {
        acc += wr[c] * a[c];
      }
      z[r] = acc;
    }
    t.pre_acts[l] = z;
    if (l + 1 == num_layers) {
      softmax_inplace(z);
    } else {
      for (double& v : z) v = activate(spec.activation, v);
    }
    t.activations[l + 1] = std::move(z);
    off += (n_in + 1) * n_out;
  }
  return t;
}

constexpr double kLossEps = 1e-12;

double ce_from_output(const std::vector<double>& out, const std::vector<double>& target) {
  double loss = 0.0;
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (target[c] > 0.0) {
      loss -= target[c] * std::log(std::max(out[c], kLossEps));
    }
  }
  return loss;
}

// Backprop for cross-entropy over softmax output; writes the gradient for
// one example into g (same layout as the parameter vector).
void backprop_into(const ModelSpec& spec, const std::vector<double>& p,
                   const ForwardTrace& t, const std::vector<double>& target,
                   std::vector<double>& g) {
  const std::size_t num_layers = spec.layer_sizes.size() - 1;

  std::vector<double> delta = t.activations[num_layers];
  for (std::size_t c = 0; c < delta.size(); ++c) {
    delta[c] -= target[c];
  }

  std::size_t off_end = p.size();
  for (std::size_t li = num_layers; li-- > 0;) {
    const std::size_t n_in = spec.layer_sizes[li];
    const std::size_t n_out = spec.layer_sizes[li + 1];
    const std::size_t off = off_end - (n_in + 1) * n_out;
    const std::vector<double>& a = t.activations[li];

    double* gw = g.data() + off;
    double* gb = gw + n_in * n_out;
    for (std::size_t r = 0; r < n_out; ++r) {
      double* gwr = gw + r * n_in;
      const double d = delta[r];
      for (std::size_t c = 0; c < n_in; ++c) {
        gwr[c] = d * a[c];
      }
      gb[r] = d;
    }

    if (li > 0) {
      const double* w = p.data() + off;
      std::vector<double> prev(n_in, 0.0);
      for (std::size_t r = 0; r < n_out; ++r) {
        const double* wr = w + r * n_in;
        const double d = delta[r];
        for (std::size_t c = 0; c < n_in; ++c) {
          prev[c] += wr[c] * d;
        }
      }
      for (std::size_t c = 0; c < n_in; ++c) {
        prev[c] *= activate_deriv(spec.activation, t.pre_acts[li - 1][c]);
      }
      delta = std::move(prev);
    }
    off_end = off;
  }
}

}  // namespace

PredictionDistribution forward(const ModelSpec& spec, const ParamSnapshot& params,
                               const std::vector<double>& x) {
  check_shapes(spec, params, x);
  ForwardTrace t = forward_trace(spec, params.values(), x);
  return PredictionDistribution{std::move(t.activations.back())};
}

std::vector<double> grad(const ModelSpec& spec, const ParamSnapshot& params,
                         const std::vector<double>& x, const std::vector<double>& target) {
  check_shapes(spec, params, x);
  if (target.size() != spec.num_classes()) {
    throw ConfigError("target length does not match class count");
  }
  validate_distribution(target, "grad target");
  const ForwardTrace t = forward_trace(spec, params.values(), x);
  std::vector<double> g(params.dim(), 0.0);
  backprop_into(spec, params.values(), t, target, g);
  return g;
}

BatchGrad grad_batch(const ModelSpec& spec, const ParamSnapshot& params,
                     const std::vector<const std::vector<double>*>& xs,
                     const std::vector<const std::vector<double>*>& targets) {
  if (xs.empty() || xs.size() != targets.size()) {
    throw ConfigError("grad_batch: empty batch or size mismatch");
  }
  check_shapes(spec, params, *xs.front());

  BatchGrad out;
  out.grad.assign(params.dim(), 0.0);
  std::vector<double> g(params.dim());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const ForwardTrace t = forward_trace(spec, params.values(), *xs[i]);
    backprop_into(spec, params.values(), t, *targets[i], g);
    const double inv = 1.0 / static_cast<double>(i + 1);
    for (std::size_t j = 0; j < g.size(); ++j) {
      out.grad[j] += (g[j] - out.grad[j]) * inv;
    }
    out.loss += (ce_from_output(t.activations.back(), *targets[i]) - out.loss) * inv;
  }
  return out;
}

double ce_loss(const ModelSpec& spec, const ParamSnapshot& params,
               const std::vector<double>& x, const std::vector<double>& target) {
  check_shapes(spec, params, x);
  const ForwardTrace t = forward_trace(spec, params.values(), x);
  return ce_from_output(t.activations.back(), target);
}

ParamSnapshot init_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed, stream_tag(kStreamParamInit, 0));
  std::vector<double> p;
  p.reserve(spec.param_count());
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const std::size_t n_in = spec.layer_sizes[l];
    const std::size_t n_out = spec.layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(n_in));
    for (std::size_t i = 0; i < (n_in + 1) * n_out; ++i) {
      p.push_back(rng.uniform(-bound, bound));
    }
  }
  return ParamSnapshot(std::move(p));
}

namespace {

TrainResult run_epochs(const ModelSpec& spec, const TrainConfig& cfg,
                       const std::vector<SoftLabelExample>& data, std::size_t start_epoch,
                       std::vector<double> params, SwagCollector collector,
                       const EpochCallback& hook) {
  const std::size_t n = data.size();
  std::vector<std::vector<double>> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (data[i].features.size() != spec.input_dim()) {
      throw ConfigError("train: example \"" + data[i].example_id + "\" feature dim " +
                        std::to_string(data[i].features.size()) + " does not match model");
    }
    if (data[i].annotations.size() != spec.num_classes()) {
      throw DataError("train: example \"" + data[i].example_id +
                      "\" class count does not match model");
    }
    targets[i].assign(spec.num_classes(), 0.0);
    targets[i][data[i].gold] = 1.0;
  }

  std::vector<double> epoch_losses;
  std::vector<std::size_t> order(n);
  std::vector<const std::vector<double>*> bx, bt;
  for (std::size_t epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(cfg.seed, stream_tag(kStreamEpochShuffle, epoch));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      bx.clear();
      bt.clear();
      for (std::size_t i = start; i < end; ++i) {
        bx.push_back(&data[order[i]].features);
        bt.push_back(&targets[order[i]]);
      }
      const BatchGrad bg = grad_batch(spec, ParamSnapshot(params), bx, bt);
      for (std::size_t j = 0; j < params.size(); ++j) {
        params[j] -= cfg.learning_rate * (bg.grad[j] + cfg.l2 * params[j]);
      }
      loss_sum += bg.loss * static_cast<double>(end - start);
    }
    const double epoch_loss = loss_sum / static_cast<double>(n);

    for (std::size_t j = 0; j < params.size(); ++j) {
      if (!std::isfinite(params[j])) {
        throw NumericError("train: non-finite parameter after epoch " +
                           std::to_string(epoch));
      }
    }
    if (epoch >= cfg.swa_start_epoch) {
      collector.update(ParamSnapshot(params));
    }
    epoch_losses.push_back(epoch_loss);
    if (hook) {
      hook(epoch, ParamSnapshot(params), collector);
    }
  }

  return TrainResult{ParamSnapshot(std::move(params)), std::move(collector),
                     std::move(epoch_losses)};
}

}  // namespace

TrainResult train(const ModelSpec& spec, const TrainConfig& cfg,
                  const std::vector<SoftLabelExample>& data, std::size_t rank_cap,
                  const EpochCallback& hook) {
  spec.validate();
  cfg.validate();
  if (data.empty()) {
    throw DataError("train: empty dataset");
  }
  ParamSnapshot init = init_params(spec, cfg.seed);
  SwagCollector collector(spec.param_count(), rank_cap);
  return run_epochs(spec, cfg, data, 0, init.values(), std::move(collector), hook);
}

TrainResult resume_training(const ModelSpec& spec, const TrainConfig& cfg,
                            const std::vector<SoftLabelExample>& data,
                            std::size_t start_epoch, ParamSnapshot params,
                            SwagCollector collector, const EpochCallback& hook) {
  spec.validate();
  cfg.validate();
  if (data.empty()) {
    throw DataError("resume_training: empty dataset");
  }
  if (start_epoch > cfg.epochs) {
    throw ConfigError("resume_training: start_epoch beyond configured epochs");
  }
  if (params.dim() != spec.param_count()) {
    throw ConfigError("resume_training: checkpoint parameter count mismatch");
  }
  if (collector.dim() != spec.param_count()) {
    throw ConfigError("resume_training: checkpoint collector dim mismatch");
  }
  return run_epochs(spec, cfg, data, start_epoch, params.values(), std::move(collector),
                    hook);
}

}  // namespace swag
