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

#include "swag/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "swag/distribution.hpp"
#include "swag/errors.hpp"
#include "swag/io_util.hpp"
#include "swag/rng.hpp"

namespace swag {

std::size_t majority_gold(const std::vector<std::uint64_t>& annotations) {
  if (annotations.empty()) {
    throw DataError("majority_gold: empty annotation vector");
  }
  std::size_t best = 0;
  std::uint64_t total = annotations[0];
  for (std::size_t c = 1; c < annotations.size(); ++c) {
    total += annotations[c];
    if (annotations[c] > annotations[best]) best = c;
  }
  if (total == 0) {
    throw DataError("majority_gold: zero total votes");
  }
  return best;
}

namespace {

void validate_synth_config(const SynthConfig& cfg) {
  if (cfg.num_examples < 1) throw ConfigError("generate: num_examples must be >= 1");
  if (cfg.num_classes < 2) throw ConfigError("generate: num_classes must be >= 2");
  if (cfg.feature_dim < 1) throw ConfigError("generate: feature_dim must be >= 1");
  if (cfg.feature_dim < cfg.num_classes) {
    // Axis-aligned centers need one axis per class to keep all pairwise
    // center distances equal to cluster_separation.
    throw ConfigError("generate: feature_dim must be >= num_classes");
  }
  if (!(cfg.cluster_separation > 0.0) || !std::isfinite(cfg.cluster_separation)) {
    throw ConfigError("generate: cluster_separation must be positive and finite");
  }
  if (cfg.annotators < 1) throw ConfigError("generate: annotators must be >= 1");
  if (!cfg.domain_shift.empty() && cfg.domain_shift.size() != cfg.feature_dim) {
    throw ConfigError("generate: domain_shift length must equal feature_dim");
  }
  for (const double v : cfg.domain_shift) {
    if (!std::isfinite(v)) throw ConfigError("generate: non-finite domain_shift entry");
  }
}

// True class posterior at x under equal priors and unit-variance Gaussian
// clusters: softmax over -0.5 * squared distance to each center.
std::vector<double> bayes_posterior(const std::vector<double>& x,
                                    const std::vector<std::vector<double>>& centers) {
  std::vector<double> logit(centers.size());
  for (std::size_t c = 0; c < centers.size(); ++c) {
    double sq = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = x[j] - centers[c][j];
      sq += d * d;
    }
    logit[c] = -0.5 * sq;
  }
  const double m = *std::max_element(logit.begin(), logit.end());
  double z = 0.0;
  for (double& l : logit) {
    l = std::exp(l - m);
    z += l;
  }
  for (double& l : logit) l /= z;
  return logit;
}

std::size_t sample_categorical(Rng& rng, const std::vector<double>& p) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    acc += p[c];
    if (u <= acc) return c;
  }
  return p.size() - 1;  // guard against accumulated rounding
}

}  // namespace

std::vector<std::vector<double>> cluster_centers(const SynthConfig& cfg) {
  validate_synth_config(cfg);
  // Distance between any two distinct centers is separation exactly:
  // ||s/sqrt2 * (e_a - e_b)|| = s/sqrt2 * sqrt2 = s.
  const double coord = cfg.cluster_separation / std::sqrt(2.0);
  std::vector<std::vector<double>> centers(cfg.num_classes,
                                           std::vector<double>(cfg.feature_dim, 0.0));
  for (std::size_t c = 0; c < cfg.num_classes; ++c) {
    centers[c][c] = coord;
  }
  return centers;
}

std::vector<SoftLabelExample> generate(const SynthConfig& cfg) {
  validate_synth_config(cfg);
  const auto centers = cluster_centers(cfg);

  std::vector<SoftLabelExample> out;
  out.reserve(cfg.num_examples);
  for (std::size_t i = 0; i < cfg.num_examples; ++i) {
    // One stream per example, so the shifted variant of a dataset replays
    // the same draws and differs only by the feature offset.
    Rng rng(cfg.seed, stream_tag(kStreamSynthData, i));

    const std::size_t true_class = static_cast<std::size_t>(rng.next_below(cfg.num_classes));
    std::vector<double> x(cfg.feature_dim);
    for (std::size_t j = 0; j < cfg.feature_dim; ++j) {
      x[j] = centers[true_class][j] + rng.normal();
    }

    const std::vector<double> posterior = bayes_posterior(x, centers);
    std::vector<std::uint64_t> votes(cfg.num_classes, 0);
    for (std::size_t a = 0; a < cfg.annotators; ++a) {
      votes[sample_categorical(rng, posterior)] += 1;
    }

    SoftLabelExample ex;
    ex.gold = majority_gold(votes);
    ex.annotations = std::move(votes);
    for (std::size_t j = 0; j < cfg.domain_shift.size(); ++j) {
      x[j] += cfg.domain_shift[j];
    }
    ex.features = std::move(x);

    char id[32];
    std::snprintf(id, sizeof(id), "ex-%06zu", i);
    ex.example_id = id;
    out.push_back(std::move(ex));
  }
  return out;
}

// --------------------------- dataset JSONL ---------------------------------

void save_dataset(const std::filesystem::path& path,
                  const std::vector<SoftLabelExample>& examples) {
  std::string out;
  for (const auto& ex : examples) {
    nlohmann::json j;
    j["annotations"] = ex.annotations;
    j["example_id"] = ex.example_id;
    j["features"] = ex.features;
    j["gold"] = ex.gold;
    out += j.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<SoftLabelExample> load_dataset(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::vector<SoftLabelExample> out;
  std::istringstream in(bytes);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      SoftLabelExample ex;
      ex.example_id = j.at("example_id").get<std::string>();
      ex.features = j.at("features").get<std::vector<double>>();
      ex.annotations = j.at("annotations").get<std::vector<std::uint64_t>>();
      ex.gold = j.at("gold").get<std::size_t>();
      if (ex.gold >= ex.annotations.size()) {
        throw DataError("gold index out of range");
      }
      out.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

namespace {

std::filesystem::path meta_path(const std::filesystem::path& dataset_path) {
  return dataset_path.string() + ".meta.json";
}

std::string strip_split_suffix(std::string stem) {
  static const char* suffixes[] = {"_shifted", "_train", "_test", "_dev"};
  bool changed = true;
  while (changed) {
    changed = false;
    for (const char* s : suffixes) {
      const std::string suf(s);
      if (stem.size() > suf.size() && stem.ends_with(suf)) {
        stem.resize(stem.size() - suf.size());
        changed = true;
      }
    }
  }
  return stem;
}

}  // namespace

void save_dataset_meta(const std::filesystem::path& dataset_path, const DatasetMeta& meta) {
  nlohmann::json j;
  j["family"] = meta.family;
  j["id"] = meta.id;
  write_file_atomic(meta_path(dataset_path), j.dump(2) + "\n");
}

DatasetMeta load_dataset_meta(const std::filesystem::path& dataset_path) {
  const auto mp = meta_path(dataset_path);
  DatasetMeta meta;
  if (std::filesystem::exists(mp)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(mp));
      meta.id = j.at("id").get<std::string>();
      meta.family = j.at("family").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(mp.string() + ": " + e.what());
    }
    return meta;
  }
  meta.id = dataset_path.stem().string();
  meta.family = strip_split_suffix(meta.id);
  return meta;
}

// ------------------------- annotation ingestion ----------------------------

LabelMap nli_label_map() {
  return {{"entailment", 0}, {"neutral", 1}, {"contradiction", 2}};
}

AnnotationLoadResult load_annotations(const std::filesystem::path& path,
                                      const LabelMap& label_map) {
  if (label_map.empty()) {
    throw ConfigError("load_annotations: empty label map");
  }
  std::size_t num_classes = 0;
  for (const auto& [name, idx] : label_map) {
    num_classes = std::max(num_classes, idx + 1);
  }

  const std::string bytes = read_file(path);
  AnnotationLoadResult result;
  std::istringstream in(bytes);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }

    std::string example_id, gold_label;
    std::vector<std::string> annotator_labels;
    try {
      example_id = j.at("example_id").get<std::string>();
      gold_label = j.at("gold_label").get<std::string>();
      annotator_labels = j.at("annotator_labels").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }

    if (gold_label == "-") {
      // No-majority convention; usable for inspection but not for training
      // on gold labels, so it is skipped and tallied.
      result.skipped += 1;
      continue;
    }

    SoftLabelExample ex;
    ex.example_id = example_id;
    ex.annotations.assign(num_classes, 0);
    for (const auto& label : annotator_labels) {
      const auto it = label_map.find(label);
      if (it == label_map.end()) {
        throw DataError(path.string() + ":" + std::to_string(line_no) +
                        ": unknown annotator label \"" + label + "\" in record \"" +
                        example_id + "\"");
      }
      ex.annotations[it->second] += 1;
    }
    const auto git = label_map.find(gold_label);
    if (git == label_map.end()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": unknown gold label \"" + gold_label + "\" in record \"" +
                      example_id + "\"");
    }
    ex.gold = git->second;

    std::uint64_t max_votes = 0;
    std::uint64_t total = 0;
    for (const auto v : ex.annotations) {
      max_votes = std::max(max_votes, v);
      total += v;
    }
    if (total == 0) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": record \"" + example_id + "\" has no annotator labels");
    }
    if (ex.annotations[ex.gold] != max_votes) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": record \"" +
                      example_id + "\" gold label does not attain the majority vote");
    }
    result.examples.push_back(std::move(ex));
  }
  return result;
}

// ----------------------------- feature files -------------------------------

namespace {

constexpr std::string_view kFeatureMagic = "SWGF";

std::filesystem::path manifest_path(const std::filesystem::path& feature_path) {
  return feature_path.string() + ".manifest.json";
}

}  // namespace

void write_features(const std::filesystem::path& path, const FeatureFile& f) {
  if (f.data.size() != f.rows * f.cols) {
    throw ConfigError("write_features: data size does not match rows * cols");
  }
  if (f.ids.size() != f.rows) {
    throw ConfigError("write_features: manifest id count does not match rows");
  }
  std::string out;
  out.reserve(24 + f.data.size() * 8);
  out += kFeatureMagic;
  put_u32le(out, kFeatureFormatVersion);
  put_u64le(out, f.rows);
  put_u64le(out, f.cols);
  for (const double v : f.data) {
    put_f64le(out, v);
  }
  write_file_atomic(path, out);

  nlohmann::json j;
  j["ids"] = f.ids;
  write_file_atomic(manifest_path(path), j.dump(2) + "\n");
}

FeatureFile read_features(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  ByteReader r(bytes, path.string());
  r.magic(kFeatureMagic);
  const std::uint32_t version = r.u32();
  if (version != kFeatureFormatVersion) {
    throw DataError(path.string() + ": unsupported feature format version " +
                    std::to_string(version));
  }
  FeatureFile f;
  f.rows = r.u64();
  f.cols = r.u64();
  f.data.resize(f.rows * f.cols);
  for (double& v : f.data) {
    v = r.f64();
  }
  r.expect_end();

  const auto mp = manifest_path(path);
  if (!std::filesystem::exists(mp)) {
    throw DataError(mp.string() + ": feature manifest missing");
  }
  try {
    nlohmann::json j = nlohmann::json::parse(read_file(mp));
    f.ids = j.at("ids").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(mp.string() + ": " + e.what());
  }
  if (f.ids.size() != f.rows) {
    throw DataError(mp.string() + ": manifest id count does not match feature rows");
  }
  return f;
}

std::vector<SoftLabelExample> attach_features(std::vector<SoftLabelExample> examples,
                                              const std::filesystem::path& feature_path) {
  const FeatureFile f = read_features(feature_path);
  if (f.rows != examples.size()) {
    throw DataError(feature_path.string() + ": feature rows (" + std::to_string(f.rows) +
                    ") do not match example count (" + std::to_string(examples.size()) + ")");
  }
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (f.ids[i] != examples[i].example_id) {
      throw DataError(feature_path.string() + ": row " + std::to_string(i) +
                      " id \"" + f.ids[i] + "\" does not match example \"" +
                      examples[i].example_id + "\"");
    }
    examples[i].features.assign(f.data.begin() + static_cast<std::ptrdiff_t>(i * f.cols),
                                f.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * f.cols));
  }
  return examples;
}

DatasetStats dataset_stats(const std::vector<SoftLabelExample>& examples) {
  DatasetStats s;
  s.num_examples = examples.size();
  if (examples.empty()) return s;
  const std::size_t num_classes = examples.front().annotations.size();
  s.gold_counts.assign(num_classes, 0);
  std::size_t unanimous = 0;
  double entropy_sum = 0.0;
  for (const auto& ex : examples) {
    if (ex.gold < s.gold_counts.size()) s.gold_counts[ex.gold] += 1;
    std::uint64_t total = 0;
    std::uint64_t max_votes = 0;
    for (const auto v : ex.annotations) {
      total += v;
      max_votes = std::max(max_votes, v);
    }
    if (total > 0 && max_votes == total) unanimous += 1;
    std::vector<double> p(ex.annotations.size());
    for (std::size_t c = 0; c < p.size(); ++c) {
      p[c] = total > 0 ? static_cast<double>(ex.annotations[c]) / static_cast<double>(total)
                       : 0.0;
    }
    entropy_sum += entropy(p);
  }
  s.mean_annotation_entropy = entropy_sum / static_cast<double>(examples.size());
  s.unanimous_fraction =
      static_cast<double>(unanimous) / static_cast<double>(examples.size());
  return s;
}

}  // namespace swag
