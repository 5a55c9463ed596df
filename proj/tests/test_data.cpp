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

#include <doctest/doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "swag/data.hpp"
#include "swag/errors.hpp"
#include "swag/io_util.hpp"
#include "test_util.hpp"

using namespace swag;

TEST_CASE("majority_gold picks the lowest index on ties") {
  CHECK(majority_gold({2, 3, 0}) == 1);
  CHECK(majority_gold({3, 3, 1}) == 0);
  CHECK(majority_gold({0, 0, 7}) == 2);
  CHECK_THROWS_AS(majority_gold({}), DataError);
  CHECK_THROWS_AS(majority_gold({0, 0, 0}), DataError);
}

TEST_CASE("cluster centers are pairwise equidistant") {
  SynthConfig cfg;
  cfg.num_classes = 3;
  cfg.feature_dim = 5;
  cfg.cluster_separation = 3.5;
  const auto centers = cluster_centers(cfg);
  REQUIRE(centers.size() == 3);
  for (std::size_t a = 0; a < 3; ++a) {
    REQUIRE(centers[a].size() == 5);
    for (std::size_t b = a + 1; b < 3; ++b) {
      double sq = 0.0;
      for (std::size_t j = 0; j < 5; ++j) {
        const double d = centers[a][j] - centers[b][j];
        sq += d * d;
      }
      CHECK(std::sqrt(sq) == doctest::Approx(3.5).epsilon(1e-12));
    }
  }
}

TEST_CASE("synth config misuse is rejected") {
  SynthConfig cfg;
  cfg.num_classes = 1;
  CHECK_THROWS_AS(generate(cfg), ConfigError);
  cfg.num_classes = 4;
  cfg.feature_dim = 3;  // fewer axes than classes
  CHECK_THROWS_AS(generate(cfg), ConfigError);
  cfg.num_classes = 3;
  cfg.cluster_separation = 0.0;
  CHECK_THROWS_AS(generate(cfg), ConfigError);
  cfg.cluster_separation = 2.0;
  cfg.annotators = 0;
  CHECK_THROWS_AS(generate(cfg), ConfigError);
  cfg.annotators = 5;
  cfg.domain_shift = {1.0};  // wrong length
  CHECK_THROWS_AS(generate(cfg), ConfigError);
}

TEST_CASE("generation is deterministic and majority-consistent") {
  SynthConfig cfg;
  cfg.num_examples = 200;
  cfg.seed = 77;
  const auto a = generate(cfg);
  const auto b = generate(cfg);
  REQUIRE(a.size() == 200);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].example_id == b[i].example_id);
    CHECK(a[i].features == b[i].features);
    CHECK(a[i].annotations == b[i].annotations);
    CHECK(a[i].gold == b[i].gold);
    CHECK(a[i].gold == majority_gold(a[i].annotations));
    std::uint64_t total = 0;
    for (const auto v : a[i].annotations) total += v;
    CHECK(total == cfg.annotators);
  }
  CHECK(a.front().example_id == "ex-000000");
  CHECK(a.back().example_id == "ex-000199");

  cfg.seed = 78;
  const auto c = generate(cfg);
  CHECK(a.front().features != c.front().features);
}

TEST_CASE("one annotator gives one-hot annotations") {
  SynthConfig cfg;
  cfg.num_examples = 50;
  cfg.annotators = 1;
  cfg.seed = 3;
  for (const auto& ex : generate(cfg)) {
    std::uint64_t total = 0;
    for (const auto v : ex.annotations) total += v;
    CHECK(total == 1);
    CHECK(ex.annotations[ex.gold] == 1);
  }
}

TEST_CASE("wide separation makes annotators unanimous") {
  SynthConfig cfg;
  cfg.num_examples = 500;
  cfg.cluster_separation = 10.0;
  cfg.seed = 5;
  const auto stats = dataset_stats(generate(cfg));
  CHECK(stats.unanimous_fraction > 0.95);
  CHECK(stats.mean_annotation_entropy < 0.05);
}

TEST_CASE("annotation entropy falls as the clusters separate") {
  // Disagreement should shrink monotonically with separation, for every seed.
  const double separations[] = {0.5, 1.0, 2.0, 4.0, 8.0};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    double prev = 1e9;
    for (const double sep : separations) {
      SynthConfig cfg;
      cfg.num_examples = 600;
      cfg.cluster_separation = sep;
      cfg.seed = seed;
      const auto stats = dataset_stats(generate(cfg));
      CHECK(stats.mean_annotation_entropy < prev);
      prev = stats.mean_annotation_entropy;
    }
  }
}

TEST_CASE("domain shift moves features but not annotations") {
  SynthConfig cfg;
  cfg.num_examples = 150;
  cfg.seed = 41;
  const auto plain = generate(cfg);
  cfg.domain_shift = {0.7, -0.2, 1.5};
  const auto shifted = generate(cfg);
  REQUIRE(plain.size() == shifted.size());
  for (std::size_t i = 0; i < plain.size(); ++i) {
    CHECK(shifted[i].example_id == plain[i].example_id);
    CHECK(shifted[i].annotations == plain[i].annotations);
    CHECK(shifted[i].gold == plain[i].gold);
    for (std::size_t j = 0; j < 3; ++j) {
      // The shift is applied after the votes, as one addition per feature.
      CHECK(shifted[i].features[j] == plain[i].features[j] + cfg.domain_shift[j]);
    }
  }
}

TEST_CASE("dataset JSONL round-trips byte-identically") {
  swagtest::TempDir tmp("data");
  SynthConfig cfg;
  cfg.num_examples = 40;
  cfg.seed = 9;
  const auto examples = generate(cfg);

  const auto path = tmp.file("set.jsonl");
  save_dataset(path, examples);
  const std::string first = read_file(path);
  const auto loaded = load_dataset(path);
  REQUIRE(loaded.size() == examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    CHECK(loaded[i].example_id == examples[i].example_id);
    CHECK(loaded[i].features == examples[i].features);
    CHECK(loaded[i].annotations == examples[i].annotations);
    CHECK(loaded[i].gold == examples[i].gold);
  }
  save_dataset(path, loaded);
  CHECK(read_file(path) == first);
}

TEST_CASE("dataset parse errors carry the path and line") {
  swagtest::TempDir tmp("data_err");
  const auto path = tmp.file("bad.jsonl");

  write_file_atomic(path, "{\"example_id\": \"a\", \"features\": [1.0], "
                          "\"annotations\": [1, 2], \"gold\": 1}\nnot json\n");
  CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains(":2:"), DataError);

  write_file_atomic(path, "{\"example_id\": \"a\", \"features\": [1.0], "
                          "\"annotations\": [1, 2], \"gold\": 5}\n");
  CHECK_THROWS_AS(load_dataset(path), DataError);

  CHECK_THROWS_AS(load_dataset(tmp.file("missing.jsonl")), DataError);
}

TEST_CASE("dataset meta sidecar round-trips, with a stem fallback") {
  swagtest::TempDir tmp("meta");
  const auto path = tmp.file("ambig_test_shifted.jsonl");
  SynthConfig tiny;
  tiny.num_examples = 3;
  save_dataset(path, generate(tiny));

  SUBCASE("explicit sidecar wins") {
    save_dataset_meta(path, DatasetMeta{"ambig_test_shifted", "ambig"});
    const auto meta = load_dataset_meta(path);
    CHECK(meta.id == "ambig_test_shifted");
    CHECK(meta.family == "ambig");
  }
  SUBCASE("fallback strips split suffixes from the stem") {
    const auto meta = load_dataset_meta(path);
    CHECK(meta.id == "ambig_test_shifted");
    CHECK(meta.family == "ambig");
    CHECK(load_dataset_meta(tmp.file("plain.jsonl")).family == "plain");
    CHECK(load_dataset_meta(tmp.file("x_train.jsonl")).family == "x");
  }
}

TEST_CASE("annotation ingestion builds vote histograms") {
  swagtest::TempDir tmp("annot");
  const auto path = tmp.file("snli.jsonl");
  write_file_atomic(
      path,
      R"({"example_id": "a", "gold_label": "neutral", "annotator_labels": ["entailment", "entailment", "neutral", "neutral", "neutral"]})"
      "\n"
      R"({"example_id": "b", "gold_label": "entailment", "annotator_labels": ["entailment", "entailment", "entailment", "entailment", "entailment"]})"
      "\n"
      R"({"example_id": "c", "gold_label": "-", "annotator_labels": ["neutral", "contradiction", "entailment", "neutral", "contradiction"]})"
      "\n");

  const auto result = load_annotations(path, nli_label_map());
  CHECK(result.skipped == 1);
  REQUIRE(result.examples.size() == 2);
  CHECK(result.examples[0].example_id == "a");
  CHECK(result.examples[0].annotations == std::vector<std::uint64_t>{2, 3, 0});
  CHECK(result.examples[0].gold == 1);
  CHECK(result.examples[0].features.empty());
  CHECK(result.examples[1].annotations == std::vector<std::uint64_t>{5, 0, 0});
  CHECK(result.examples[1].gold == 0);
}

TEST_CASE("annotation ingestion rejects inconsistent records") {
  swagtest::TempDir tmp("annot_err");
  const auto path = tmp.file("bad.jsonl");

  SUBCASE("unknown annotator label") {
    write_file_atomic(path, R"({"example_id": "x", "gold_label": "neutral", "annotator_labels": ["maybe"]})"
                            "\n");
    CHECK_THROWS_WITH_AS(load_annotations(path, nli_label_map()),
                         doctest::Contains("maybe"), DataError);
  }
  SUBCASE("unknown gold label") {
    write_file_atomic(path, R"({"example_id": "x", "gold_label": "yes", "annotator_labels": ["neutral"]})"
                            "\n");
    CHECK_THROWS_AS(load_annotations(path, nli_label_map()), DataError);
  }
  SUBCASE("gold label misses the majority") {
    write_file_atomic(
        path,
        R"({"example_id": "x", "gold_label": "neutral", "annotator_labels": ["entailment", "entailment", "neutral"]})"
        "\n");
    CHECK_THROWS_WITH_AS(load_annotations(path, nli_label_map()),
                         doctest::Contains("majority"), DataError);
  }
  SUBCASE("no annotator labels at all") {
    write_file_atomic(path, R"({"example_id": "x", "gold_label": "neutral", "annotator_labels": []})"
                            "\n");
    CHECK_THROWS_AS(load_annotations(path, nli_label_map()), DataError);
  }
  SUBCASE("missing field") {
    write_file_atomic(path, R"({"example_id": "x", "gold_label": "neutral"})"
                            "\n");
    CHECK_THROWS_WITH_AS(load_annotations(path, nli_label_map()),
                         doctest::Contains(":1:"), DataError);
  }
}

TEST_CASE("feature files round-trip and attach by id") {
  swagtest::TempDir tmp("feat");
  const auto path = tmp.file("f.swgf");

  FeatureFile f;
  f.rows = 2;
  f.cols = 3;
  f.data = {0.1, -0.2, 0.3, 1.5, 2.5, -3.5};
  f.ids = {"a", "b"};
  write_features(path, f);

  const FeatureFile g = read_features(path);
  CHECK(g.rows == 2);
  CHECK(g.cols == 3);
  CHECK(g.data == f.data);
  CHECK(g.ids == f.ids);

  write_features(path, g);
  const std::string bytes1 = read_file(path);
  write_features(path, f);
  CHECK(read_file(path) == bytes1);

  std::vector<SoftLabelExample> exs(2);
  exs[0].example_id = "a";
  exs[0].annotations = {1, 0};
  exs[1].example_id = "b";
  exs[1].annotations = {0, 1};
  exs[1].gold = 1;
  const auto attached = attach_features(std::move(exs), path);
  CHECK(attached[0].features == std::vector<double>{0.1, -0.2, 0.3});
  CHECK(attached[1].features == std::vector<double>{1.5, 2.5, -3.5});
}

TEST_CASE("feature attachment failures are explicit") {
  swagtest::TempDir tmp("feat_err");
  const auto path = tmp.file("f.swgf");
  FeatureFile f;
  f.rows = 1;
  f.cols = 2;
  f.data = {1.0, 2.0};
  f.ids = {"a"};
  write_features(path, f);

  SUBCASE("row count mismatch") {
    std::vector<SoftLabelExample> exs(2);
    exs[0].example_id = "a";
    exs[1].example_id = "b";
    CHECK_THROWS_AS(attach_features(std::move(exs), path), DataError);
  }
  SUBCASE("id mismatch") {
    std::vector<SoftLabelExample> exs(1);
    exs[0].example_id = "zzz";
    CHECK_THROWS_WITH_AS(attach_features(std::move(exs), path),
                         doctest::Contains("zzz"), DataError);
  }
  SUBCASE("manifest missing") {
    std::filesystem::remove(tmp.path() / "f.swgf.manifest.json");
    CHECK_THROWS_WITH_AS(read_features(path), doctest::Contains("manifest"), DataError);
  }
  SUBCASE("shape errors on write") {
    FeatureFile bad = f;
    bad.data.pop_back();
    CHECK_THROWS_AS(write_features(path, bad), ConfigError);
    bad = f;
    bad.ids.clear();
    CHECK_THROWS_AS(write_features(path, bad), ConfigError);
  }
}

TEST_CASE("dataset stats aggregate by hand-checkable formulas") {
  std::vector<SoftLabelExample> exs(3);
  exs[0].annotations = {5, 0, 0};
  exs[0].gold = 0;
  exs[1].annotations = {0, 5, 0};
  exs[1].gold = 1;
  exs[2].annotations = {2, 2, 1};
  exs[2].gold = 0;
  const auto s = dataset_stats(exs);
  CHECK(s.num_examples == 3);
  CHECK(s.gold_counts == std::vector<std::size_t>{2, 1, 0});
  CHECK(s.unanimous_fraction == doctest::Approx(2.0 / 3.0));
  const double h = -(0.4 * std::log(0.4) * 2.0 + 0.2 * std::log(0.2));
  CHECK(s.mean_annotation_entropy == doctest::Approx(h / 3.0).epsilon(1e-12));
}
