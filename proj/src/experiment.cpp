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

#include "swag/experiment.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <future>
#include <set>

#include <nlohmann/json.hpp>

#include "swag/errors.hpp"
#include "swag/io_util.hpp"
#include "swag/version.hpp"

namespace swag {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  if (seeds.empty()) {
    throw ConfigError("experiment: seed list is empty");
  }
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) {
    throw ConfigError("experiment: seed list contains duplicates");
  }
  if (train_path.empty() || !fs::exists(train_path)) {
    throw ConfigError("experiment: training dataset not found: " + train_path.string());
  }
  if (test_paths.empty()) {
    throw ConfigError("experiment: no test datasets configured");
  }
  for (const auto& p : test_paths) {
    if (!fs::exists(p)) {
      throw ConfigError("experiment: test dataset not found: " + p.string());
    }
  }
  if (hidden_sizes.empty()) {
    throw ConfigError("experiment: need at least one hidden layer size");
  }
  for (const std::size_t h : hidden_sizes) {
    if (h < 1) throw ConfigError("experiment: hidden sizes must be >= 1");
  }
  if (rank_cap < 2) {
    throw ConfigError("experiment: rank_cap must be >= 2");
  }
  if (out_dir.empty()) {
    throw ConfigError("experiment: output directory not set");
  }
  train.validate();
  sampling.validate();
}

ExperimentConfig experiment_config_from_json(const std::string& text,
                                             const std::string& source_name) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("train")) cfg.train_path = j.at("train").get<std::string>();
    if (j.contains("tests")) {
      cfg.test_paths.clear();
      for (const auto& t : j.at("tests")) {
        cfg.test_paths.emplace_back(t.get<std::string>());
      }
    }
    if (j.contains("hidden_sizes")) {
      cfg.hidden_sizes = j.at("hidden_sizes").get<std::vector<std::size_t>>();
    }
    if (j.contains("activation")) {
      cfg.activation = activation_from_string(j.at("activation").get<std::string>());
    }
    if (j.contains("train_config")) {
      const auto& t = j.at("train_config");
      if (t.contains("epochs")) cfg.train.epochs = t.at("epochs").get<std::size_t>();
      if (t.contains("batch_size")) {
        cfg.train.batch_size = t.at("batch_size").get<std::size_t>();
      }
      if (t.contains("learning_rate")) {
        cfg.train.learning_rate = t.at("learning_rate").get<double>();
      }
      if (t.contains("swa_start_epoch")) {
        cfg.train.swa_start_epoch = t.at("swa_start_epoch").get<std::size_t>();
      }
      if (t.contains("l2")) cfg.train.l2 = t.at("l2").get<double>();
    }
    if (j.contains("sampling")) {
      const auto& s = j.at("sampling");
      if (s.contains("num_samples")) {
        cfg.sampling.num_samples = s.at("num_samples").get<std::size_t>();
      }
      if (s.contains("scale")) cfg.sampling.scale = s.at("scale").get<double>();
      if (s.contains("diag_only")) cfg.sampling.diag_only = s.at("diag_only").get<bool>();
    }
    if (j.contains("rank_cap")) cfg.rank_cap = j.at("rank_cap").get<std::size_t>();
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
  return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["activation"] = activation_name(cfg.activation);
  j["hidden_sizes"] = cfg.hidden_sizes;
  j["out"] = cfg.out_dir.generic_string();
  j["rank_cap"] = cfg.rank_cap;
  j["sampling"] = {{"diag_only", cfg.sampling.diag_only},
                   {"num_samples", cfg.sampling.num_samples},
                   {"scale", cfg.sampling.scale}};
  j["seeds"] = cfg.seeds;
  nlohmann::json tests = nlohmann::json::array();
  for (const auto& p : cfg.test_paths) tests.push_back(p.generic_string());
  j["tests"] = std::move(tests);
  j["train"] = cfg.train_path.generic_string();
  j["train_config"] = {{"batch_size", cfg.train.batch_size},
                       {"epochs", cfg.train.epochs},
                       {"l2", cfg.train.l2},
                       {"learning_rate", cfg.train.learning_rate},
                       {"swa_start_epoch", cfg.train.swa_start_epoch}};
  return j.dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& cfg) {
  return hex64(fnv1a64(experiment_config_to_json(cfg)));
}

namespace {

struct TestSet {
  fs::path path;
  DatasetMeta meta;
  std::vector<SoftLabelExample> examples;
  std::vector<std::vector<double>> inputs;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::vector<EvalReport> reports;
  std::string error;  // empty on success
};

std::string report_filename(Method m, const std::string& test_id) {
  return "report_" + method_name(m) + "_" + test_id + ".json";
}

void write_state(const fs::path& seed_dir, std::size_t completed_epochs,
                 const std::string& hash) {
  nlohmann::json j;
  j["completed_epochs"] = completed_epochs;
  j["config_hash"] = hash;
  write_file_atomic(seed_dir / "state.json", j.dump(2) + "\n");
}

// Runs (or resumes) training for one seed, checkpointing after every epoch,
// then evaluates the three methods on every test set and writes the reports.
SeedOutcome run_seed(const ExperimentConfig& cfg, const ModelSpec& spec,
                     const std::vector<SoftLabelExample>& train_data,
                     const std::vector<TestSet>& tests, const std::string& train_id,
                     const std::string& hash, std::uint64_t seed,
                     const RunOptions& options) {
  SeedOutcome out;
  out.seed = seed;
  try {
    const fs::path seed_dir = cfg.out_dir / ("seed_" + std::to_string(seed));
    fs::create_directories(seed_dir);

    TrainConfig tc = cfg.train;
    tc.seed = seed;

    std::vector<ParamSnapshot> snaps;  // epochs >= swa_start_epoch so far
    const EpochCallback checkpoint_hook = [&](std::size_t epoch, const ParamSnapshot& params,
                                              const SwagCollector& collector) {
      save_trajectory(seed_dir / "params.swgt", {params});
      save_collector(seed_dir / "collector.swgc", collector);
      if (epoch >= tc.swa_start_epoch) {
        snaps.push_back(params);
        save_trajectory(seed_dir / "trajectory.swgt", snaps);
      }
      // State goes last so a torn-off run never points at missing files.
      write_state(seed_dir, epoch + 1, hash);
      if (options.epoch_hook) {
        options.epoch_hook(seed, epoch);
      }
    };

    ParamSnapshot base_params(std::vector<double>{0.0});  // placeholder
    SwagCollector final_collector(1, 2);                  // placeholder
    bool have_result = false;

    const fs::path state_path = seed_dir / "state.json";
    if (options.resume && fs::exists(state_path)) {
      nlohmann::json st;
      try {
        st = nlohmann::json::parse(read_file(state_path));
      } catch (const nlohmann::json::exception& e) {
        throw DataError(state_path.string() + ": " + e.what());
      }
      const std::size_t completed = st.at("completed_epochs").get<std::size_t>();
      const std::string st_hash = st.value("config_hash", "");
      if (st_hash != hash) {
        throw ConfigError(state_path.string() +
                          ": checkpoint belongs to a different configuration (" + st_hash +
                          ", expected " + hash + ")");
      }
      std::vector<ParamSnapshot> saved = load_trajectory(seed_dir / "params.swgt");
      if (saved.size() != 1) {
        throw DataError((seed_dir / "params.swgt").string() +
                        ": expected a single parameter snapshot");
      }
      SwagCollector restored = load_collector(seed_dir / "collector.swgc");
      if (fs::exists(seed_dir / "trajectory.swgt")) {
        snaps = load_trajectory(seed_dir / "trajectory.swgt");
      }
      if (completed >= tc.epochs) {
        base_params = std::move(saved[0]);
        final_collector = std::move(restored);
        have_result = true;
      } else {
        TrainResult r = resume_training(spec, tc, train_data, completed,
                                        std::move(saved[0]), std::move(restored),
                                        checkpoint_hook);
        base_params = std::move(r.params);
        final_collector = std::move(r.collector);
        have_result = true;
      }
    }
    if (!have_result) {
      snaps.clear();
      TrainResult r = train(spec, tc, train_data, cfg.rank_cap, checkpoint_hook);
      base_params = std::move(r.params);
      final_collector = std::move(r.collector);
    }

    TrajectoryMeta tmeta;
    tmeta.experiment_id = hash + "-seed" + std::to_string(seed);
    for (std::size_t e = tc.swa_start_epoch; e < tc.epochs; ++e) {
      tmeta.epoch_indices.push_back(static_cast<std::int64_t>(e));
    }
    save_trajectory_meta(seed_dir / "trajectory.swgt", tmeta);

    const PosteriorApprox posterior = final_collector.finalize();
    const ParamSnapshot swa_params(posterior.mean());
    SamplingConfig sc = cfg.sampling;
    sc.seed = seed;

    for (const auto& t : tests) {
      const auto base_preds = predict_point(base_params, spec, t.inputs);
      const auto swa_preds = predict_point(swa_params, spec, t.inputs);
      const auto swag_preds = predict_ensemble(posterior, spec, t.inputs, sc);
      const std::array<std::pair<Method, const std::vector<PredictionDistribution>*>, 3>
          rows = {{{Method::base, &base_preds},
                   {Method::swa, &swa_preds},
                   {Method::swag, &swag_preds}}};
      for (const auto& [method, preds] : rows) {
        EvalReport rep = evaluate(*preds, t.examples, method, train_id, t.meta.id, seed);
        save_report(seed_dir / report_filename(method, t.meta.id), rep);
        out.reports.push_back(std::move(rep));
      }
    }
  } catch (const std::exception& e) {
    out.reports.clear();
    out.error = e.what();
  }
  return out;
}

std::vector<std::string> list_run_files(const fs::path& run_dir) {
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), run_dir).generic_string();
    if (rel == "manifest.json") continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const std::string hash = config_hash(cfg);

  const std::vector<SoftLabelExample> train_data = load_dataset(cfg.train_path);
  if (train_data.empty()) {
    throw DataError("experiment: training dataset is empty: " + cfg.train_path.string());
  }
  const DatasetMeta train_meta = load_dataset_meta(cfg.train_path);

  const std::size_t feature_dim = train_data.front().features.size();
  const std::size_t num_classes = train_data.front().annotations.size();
  if (feature_dim == 0) {
    throw DataError("experiment: training examples carry no features");
  }

  std::vector<TestSet> tests;
  std::set<std::string> test_ids;
  for (const auto& p : cfg.test_paths) {
    TestSet t;
    t.path = p;
    t.meta = load_dataset_meta(p);
    t.examples = load_dataset(p);
    if (t.examples.empty()) {
      throw DataError("experiment: test dataset is empty: " + p.string());
    }
    if (!test_ids.insert(t.meta.id).second) {
      throw ConfigError("experiment: duplicate test set id \"" + t.meta.id + "\"");
    }
    for (const auto& ex : t.examples) {
      if (ex.features.size() != feature_dim || ex.annotations.size() != num_classes) {
        throw DataError("experiment: test example \"" + ex.example_id + "\" in " +
                        p.string() + " does not match training dims");
      }
      t.inputs.push_back(ex.features);
    }
    tests.push_back(std::move(t));
  }

  ModelSpec spec;
  spec.layer_sizes.push_back(feature_dim);
  for (const std::size_t h : cfg.hidden_sizes) spec.layer_sizes.push_back(h);
  spec.layer_sizes.push_back(num_classes);
  spec.activation = cfg.activation;
  spec.validate();

  fs::create_directories(cfg.out_dir);
  write_file_atomic(cfg.out_dir / "config.json", experiment_config_to_json(cfg));

  // Copy the test datasets into the run so it stays inspectable after the
  // originals move.
  fs::create_directories(cfg.out_dir / "datasets");
  for (const auto& t : tests) {
    const fs::path dst = cfg.out_dir / "datasets" / (t.meta.id + ".jsonl");
    write_file_atomic(dst, read_file(t.path));
    save_dataset_meta(dst, t.meta);
  }

  std::vector<SeedOutcome> outcomes;
  if (options.parallel_seeds && cfg.seeds.size() > 1) {
    std::vector<std::future<SeedOutcome>> futures;
    futures.reserve(cfg.seeds.size());
    for (const std::uint64_t s : cfg.seeds) {
      futures.push_back(std::async(std::launch::async, [&, s] {
        return run_seed(cfg, spec, train_data, tests, train_meta.id, hash, s, options);
      }));
    }
    for (auto& f : futures) outcomes.push_back(f.get());
  } else {
    for (const std::uint64_t s : cfg.seeds) {
      outcomes.push_back(run_seed(cfg, spec, train_data, tests, train_meta.id, hash, s,
                                  options));
    }
  }

  RunResult result;
  result.run_dir = cfg.out_dir;

  std::map<std::string, std::vector<EvalReport>> by_test;
  for (auto& o : outcomes) {
    if (!o.error.empty()) {
      result.failed_seeds[o.seed] = o.error;
      continue;
    }
    for (auto& r : o.reports) {
      by_test[r.test_set_id].push_back(std::move(r));
    }
  }

  for (const auto& t : tests) {
    const auto it = by_test.find(t.meta.id);
    if (it == by_test.end()) continue;  // every seed failed
    ComparisonSummary s = summarize(it->second);
    s.cross_dataset = t.meta.family != train_meta.family;
    write_file_atomic(cfg.out_dir / ("summary_" + t.meta.id + ".json"), summary_to_json(s));
    write_file_atomic(cfg.out_dir / ("summary_" + t.meta.id + ".txt"),
                      summary_table_text(s));
    result.summaries.emplace(t.meta.id, std::move(s));
  }

  const fs::path errors_path = cfg.out_dir / "errors.json";
  if (!result.failed_seeds.empty()) {
    nlohmann::json errs;
    for (const auto& [seed, msg] : result.failed_seeds) {
      errs[std::to_string(seed)] = msg;
    }
    write_file_atomic(errors_path, errs.dump(2) + "\n");
  } else if (fs::exists(errors_path)) {
    fs::remove(errors_path);  // clean rerun over an old failed run
  }

  nlohmann::json manifest;
  manifest["config_hash"] = hash;
  manifest["files"] = list_run_files(cfg.out_dir);
  manifest["tool_version"] = kToolVersion;
  write_file_atomic(cfg.out_dir / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

// --------------------------------- inspect ---------------------------------

std::vector<InspectRow> inspect_examples(const std::filesystem::path& report_path,
                                         const std::vector<std::string>& example_ids) {
  if (example_ids.empty()) {
    throw ConfigError("inspect: no example ids given");
  }
  const EvalReport report = load_report(report_path);
  const fs::path seed_dir = fs::absolute(report_path).parent_path();
  const fs::path run_dir = seed_dir.parent_path();
  const fs::path config_path = run_dir / "config.json";
  if (!fs::exists(config_path)) {
    throw DataError("inspect: " + config_path.string() +
                    " not found (report is not inside a run directory)");
  }
  const ExperimentConfig cfg =
      experiment_config_from_json(read_file(config_path), config_path.string());

  const fs::path data_path = run_dir / "datasets" / (report.test_set_id + ".jsonl");
  const std::vector<SoftLabelExample> examples = load_dataset(data_path);

  SwagCollector collector = load_collector(seed_dir / "collector.swgc");
  const PosteriorApprox posterior = collector.finalize();

  ModelSpec spec;
  spec.layer_sizes.push_back(examples.front().features.size());
  for (const std::size_t h : cfg.hidden_sizes) spec.layer_sizes.push_back(h);
  spec.layer_sizes.push_back(examples.front().annotations.size());
  spec.activation = cfg.activation;

  SamplingConfig sc = cfg.sampling;
  sc.seed = report.seed;

  std::vector<std::vector<double>> inputs;
  std::vector<const SoftLabelExample*> picked;
  for (const auto& id : example_ids) {
    const auto it = std::find_if(examples.begin(), examples.end(),
                                 [&](const SoftLabelExample& e) { return e.example_id == id; });
    if (it == examples.end()) {
      std::string available;
      for (const auto& e : examples) {
        if (!available.empty()) available += ", ";
        available += e.example_id;
      }
      throw DataError("inspect: unknown example id \"" + id + "\"; available ids: " +
                      available);
    }
    picked.push_back(&*it);
    inputs.push_back(it->features);
  }

  const EnsembleDetail detail = predict_ensemble_detailed(posterior, spec, inputs, sc);

  std::vector<InspectRow> rows;
  for (std::size_t i = 0; i < picked.size(); ++i) {
    InspectRow row;
    row.example_id = picked[i]->example_id;
    row.gold = picked[i]->gold;
    row.annotation = annotation_distribution(*picked[i]).probs;
    row.mean_prediction = detail.mean[i].probs;
    for (const auto& d : detail.per_sample[i]) {
      row.sample_predictions.push_back(d.probs);
    }
    row.cross_entropy = cross_entropy(detail.mean[i],
                                      PredictionDistribution{row.annotation});
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string probs_text(const std::vector<double>& p) {
  std::string s = "[";
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (c) s += ", ";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", p[c]);
    s += buf;
  }
  s += "]";
  return s;
}

}  // namespace

std::string inspect_rows_text(const std::vector<InspectRow>& rows) {
  std::string out;
  for (const auto& row : rows) {
    char head[160];
    std::snprintf(head, sizeof(head), "%s  gold=%zu  cross_entropy=%.4f\n",
                  row.example_id.c_str(), row.gold, row.cross_entropy);
    out += head;
    out += "  annotation : " + probs_text(row.annotation) + "\n";
    out += "  mean pred  : " + probs_text(row.mean_prediction) + "\n";
    for (std::size_t n = 0; n < row.sample_predictions.size(); ++n) {
      char label[32];
      std::snprintf(label, sizeof(label), "  sample %3zu : ", n);
      out += label;
      out += probs_text(row.sample_predictions[n]) + "\n";
    }
    out += "\n";
  }
  return out;
}

std::string inspect_rows_csv(const std::vector<InspectRow>& rows) {
  if (rows.empty()) {
    throw DataError("inspect: no rows to export");
  }
  const std::size_t num_classes = rows.front().annotation.size();
  std::string out = "example_id,row,cross_entropy";
  for (std::size_t c = 0; c < num_classes; ++c) {
    out += ",p_" + std::to_string(c);
  }
  out += "\n";
  const auto emit = [&](const std::string& id, const std::string& kind,
                        const std::string& ce, const std::vector<double>& p) {
    out += id + "," + kind + "," + ce;
    for (const double v : p) {
      out += "," + format_double(v);
    }
    out += "\n";
  };
  for (const auto& row : rows) {
    emit(row.example_id, "annotation", "", row.annotation);
    emit(row.example_id, "mean", format_double(row.cross_entropy), row.mean_prediction);
    for (std::size_t n = 0; n < row.sample_predictions.size(); ++n) {
      emit(row.example_id, "sample_" + std::to_string(n), "", row.sample_predictions[n]);
    }
  }
  return out;
}

}  // namespace swag
