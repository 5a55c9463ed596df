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
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "swag/eval.hpp"
#include "swag/nn.hpp"
#include "swag/posterior.hpp"

namespace swag {

// Everything one experiment needs. Model input/output sizes are inferred
// from the training data at run start, so the config only carries hidden
// layer sizes. TrainConfig.seed and SamplingConfig.seed are overwritten per
// run by the entries of `seeds`.
struct ExperimentConfig {
  std::filesystem::path train_path;
  std::vector<std::filesystem::path> test_paths;
  std::vector<std::size_t> hidden_sizes = {16};
  Activation activation = Activation::tanh;
  TrainConfig train;
  SamplingConfig sampling;
  std::size_t rank_cap = 20;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::filesystem::path out_dir;

  void validate() const;  // non-empty duplicate-free seeds, paths exist
};

ExperimentConfig experiment_config_from_json(const std::string& text,
                                             const std::string& source_name);
// Canonical JSON form; also the input to config_hash, so two configs hash
// equal exactly when every resolved field matches.
std::string experiment_config_to_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

struct RunOptions {
  bool resume = false;          // pick up per-seed checkpoints if present
  bool parallel_seeds = true;   // one thread per seed
  // Test hook, called after every epoch of every seed; exceptions propagate
  // as that seed's failure.
  std::function<void(std::uint64_t seed, std::size_t epoch)> epoch_hook;
};

struct RunResult {
  std::filesystem::path run_dir;
  // One summary per test set, keyed by test set id; only seeds that
  // completed contribute.
  std::map<std::string, ComparisonSummary> summaries;
  std::map<std::uint64_t, std::string> failed_seeds;  // seed -> error text
};

// Runs the full protocol: per seed, train once, then evaluate base (final
// parameters), swa (posterior mean), and swag (sampled ensemble) on every
// test set. Writes per-seed reports, trajectories and checkpoints, one
// summary per test set, and a manifest listing every produced file. Output
// is byte-identical across reruns of the same config.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

// The data behind one inspected example: annotation distribution, the
// ensemble's per-sample predictions, their mean, and the cross-entropy of
// the mean against the annotations.
struct InspectRow {
  std::string example_id;
  std::size_t gold = 0;
  std::vector<double> annotation;
  std::vector<double> mean_prediction;
  std::vector<std::vector<double>> sample_predictions;
  double cross_entropy = 0.0;
};

// Loads the run artifacts behind an EvalReport (config, collector, test
// data), recomputes ensemble predictions for the named examples, and returns
// one row per id. Unknown ids raise an error listing the available ids.
std::vector<InspectRow> inspect_examples(const std::filesystem::path& report_path,
                                         const std::vector<std::string>& example_ids);

std::string inspect_rows_text(const std::vector<InspectRow>& rows);
std::string inspect_rows_csv(const std::vector<InspectRow>& rows);

}  // namespace swag
