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
#include <string>
#include <vector>

#include "swag/data.hpp"
#include "swag/distribution.hpp"

namespace swag {

enum class Method { base, swa, swag };

std::string method_name(Method m);
Method method_from_string(const std::string& name);

// Prediction flooring inside cross_entropy. Averaged ensemble outputs are
// strictly positive, but a single softmax can underflow to 0; the floor
// keeps the result finite while staying far below reporting precision.
inline constexpr double kCrossEntropyEps = 1e-12;

// Annotation counts normalized to a probability vector.
PredictionDistribution annotation_distribution(const SoftLabelExample& ex);

// -sum_c annot[c] * ln(max(pred[c], eps)), in nats. Classes with zero
// annotation mass contribute exactly 0 whatever the prediction says there.
double cross_entropy(const PredictionDistribution& pred, const PredictionDistribution& annot);

struct PerExampleRecord {
  std::string example_id;
  std::size_t gold = 0;
  std::vector<double> predicted;
  std::vector<double> annotation;
  double cross_entropy = 0.0;
};

struct EvalReport {
  Method method = Method::base;
  std::string train_set_id;
  std::string test_set_id;
  std::uint64_t seed = 0;
  std::size_t num_examples = 0;
  double accuracy = 0.0;
  double mean_cross_entropy = 0.0;
  std::vector<PerExampleRecord> per_example;
};

// Header fields recomputed from per-example records; evaluate() uses these
// same helpers, so recomputation reproduces the header exactly.
double recompute_accuracy(const std::vector<PerExampleRecord>& records);
double recompute_mean_cross_entropy(const std::vector<PerExampleRecord>& records);

EvalReport evaluate(const std::vector<PredictionDistribution>& preds,
                    const std::vector<SoftLabelExample>& data, Method method,
                    const std::string& train_set_id, const std::string& test_set_id,
                    std::uint64_t seed);

struct MethodStats {
  Method method = Method::base;
  double accuracy_mean = 0.0;
  double accuracy_sd = 0.0;
  double cross_entropy_mean = 0.0;
  double cross_entropy_sd = 0.0;
  double delta_accuracy = 0.0;       // method - base
  double delta_cross_entropy = 0.0;  // method - base (negative = better)
};

struct ComparisonSummary {
  std::string train_set_id;
  std::string test_set_id;
  bool cross_dataset = false;
  std::vector<std::uint64_t> seeds;  // ascending
  bool single_seed = false;
  std::vector<MethodStats> methods;  // base first, then swa/swag as present
};

// Aggregates reports over seeds. All reports must share train/test set ids,
// every method must cover the same seed set, and base must be present (it
// anchors the deltas). Standard deviations use the n-1 denominator.
ComparisonSummary summarize(const std::vector<EvalReport>& reports);

// JSON (de)serialization and the plain-text rendering of a summary: an
// accuracy table (Dataset, Method, Acc, SD, Delta) followed by a
// cross-entropy table (Dataset, Method, CE, Delta).
std::string report_to_json(const EvalReport& r);
EvalReport report_from_json(const std::string& text, const std::string& source_name);
void save_report(const std::filesystem::path& path, const EvalReport& r);
EvalReport load_report(const std::filesystem::path& path);

std::string summary_to_json(const ComparisonSummary& s);
std::string summary_table_text(const ComparisonSummary& s);

// Per-example CSV for plotting: example_id, cross_entropy, argmax column,
// then pred_<c> and annot_<c> per class.
std::string report_to_csv(const EvalReport& r);

}  // namespace swag
