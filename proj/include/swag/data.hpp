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
#include <map>
#include <string>
#include <vector>

namespace swag {

// One classification example carrying the full annotator vote histogram, not
// just a single label. `gold` is the majority class, ties broken toward the
// lowest class index.
struct SoftLabelExample {
  std::string example_id;
  std::vector<double> features;               // may be empty until attached
  std::vector<std::uint64_t> annotations;     // votes per class, length C
  std::size_t gold = 0;
};

// Lowest class index attaining the maximum vote count. Errors on an empty or
// all-zero histogram.
std::size_t majority_gold(const std::vector<std::uint64_t>& annotations);

// Configuration for the synthetic soft-label generator. Classes live on
// axis-aligned Gaussian clusters whose centers are pairwise separated by
// exactly `cluster_separation`; annotators vote independently from the true
// class posterior at the drawn point, so disagreement concentrates on
// genuinely ambiguous examples. `domain_shift`, when non-empty, is added to
// every feature vector after the votes are drawn, producing a covariate-
// shifted variant with identical annotations.
struct SynthConfig {
  std::size_t num_examples = 1000;
  std::size_t num_classes = 3;
  std::size_t feature_dim = 3;
  double cluster_separation = 2.0;
  std::size_t annotators = 5;
  std::uint64_t seed = 0;
  std::vector<double> domain_shift;  // empty = none; else length feature_dim
};

std::vector<SoftLabelExample> generate(const SynthConfig& cfg);

// The exact cluster centers `generate` uses: center c = (separation / sqrt 2)
// along axis c. Requires feature_dim >= num_classes.
std::vector<std::vector<double>> cluster_centers(const SynthConfig& cfg);

// ---------------------------------------------------------------------------
// Dataset files. Datasets are JSONL, one object per line with keys
// "annotations", "example_id", "features", "gold". An optional sidecar
// <path>.meta.json records {"family": ..., "id": ...} so cross-dataset runs
// can tell train/test families apart; when the sidecar is missing the family
// falls back to the file stem with trailing _train/_test/_dev/_shifted
// suffixes stripped.
// ---------------------------------------------------------------------------

void save_dataset(const std::filesystem::path& path,
                  const std::vector<SoftLabelExample>& examples);
std::vector<SoftLabelExample> load_dataset(const std::filesystem::path& path);

struct DatasetMeta {
  std::string id;      // e.g. "ambig_test_shifted"
  std::string family;  // e.g. "ambig"
};

void save_dataset_meta(const std::filesystem::path& dataset_path, const DatasetMeta& meta);
DatasetMeta load_dataset_meta(const std::filesystem::path& dataset_path);

// ---------------------------------------------------------------------------
// SNLI-style annotation ingestion. Input is JSONL with fields
// {"example_id": str, "gold_label": str, "annotator_labels": [str, ...]};
// records whose gold label is "-" (no majority) are skipped and counted.
// ---------------------------------------------------------------------------

using LabelMap = std::map<std::string, std::size_t>;

// entailment -> 0, neutral -> 1, contradiction -> 2.
LabelMap nli_label_map();

struct AnnotationLoadResult {
  std::vector<SoftLabelExample> examples;  // features left empty
  std::size_t skipped = 0;
};

AnnotationLoadResult load_annotations(const std::filesystem::path& path,
                                      const LabelMap& label_map);

// ---------------------------------------------------------------------------
// Feature files: binary, little-endian, "SWGF" | version u32 | rows u64 |
// cols u64 | row-major f64. A JSON manifest at <path>.manifest.json holds
// {"ids": [...]} aligning rows to example ids.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kFeatureFormatVersion = 1;

struct FeatureFile {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;         // row-major
  std::vector<std::string> ids;     // from the manifest
};

void write_features(const std::filesystem::path& path, const FeatureFile& f);
FeatureFile read_features(const std::filesystem::path& path);

// Populates example features from a feature file; row i must carry the same
// id as examples[i].
std::vector<SoftLabelExample> attach_features(std::vector<SoftLabelExample> examples,
                                              const std::filesystem::path& feature_path);

// Summary numbers for `gen` output and quick sanity checks.
struct DatasetStats {
  std::size_t num_examples = 0;
  std::vector<std::size_t> gold_counts;
  double mean_annotation_entropy = 0.0;
  double unanimous_fraction = 0.0;
};

DatasetStats dataset_stats(const std::vector<SoftLabelExample>& examples);

}  // namespace swag
