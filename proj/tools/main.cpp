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

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI/CLI11.hpp>

#include "swag/data.hpp"
#include "swag/errors.hpp"
#include "swag/eval.hpp"
#include "swag/experiment.hpp"
#include "swag/io_util.hpp"
#include "swag/version.hpp"

namespace fs = std::filesystem;

namespace {

// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
// failure. CLI parsing problems count as configuration errors.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

fs::path default_out_root() {
  if (const char* env = std::getenv("SWAGKIT_OUT")) {
    if (*env) return fs::path(env);
  }
  return fs::path(".");
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw swag::ConfigError("cannot parse number \"" + tok + "\" in list \"" + text + "\"");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void print_stats(const fs::path& path, const std::vector<swag::SoftLabelExample>& examples) {
  const swag::DatasetStats s = swag::dataset_stats(examples);
  std::string balance = "[";
  for (std::size_t c = 0; c < s.gold_counts.size(); ++c) {
    if (c) balance += ", ";
    balance += std::to_string(s.gold_counts[c]);
  }
  balance += "]";
  std::printf("%s: %zu examples, gold balance %s, mean annotation entropy %.4f, "
              "unanimous fraction %.3f\n",
              path.string().c_str(), s.num_examples, balance.c_str(),
              s.mean_annotation_entropy, s.unanimous_fraction);
}

struct GenArgs {
  std::string out;
  std::string name = "synth";
  std::size_t train_examples = 1500;
  std::size_t test_examples = 600;
  std::size_t classes = 3;
  std::size_t feature_dim = 3;
  double separation = 2.0;
  std::size_t annotators = 5;
  std::uint64_t seed = 7;
  std::string shift;  // comma list, or one value broadcast to every axis
};

int cmd_gen(const GenArgs& a) {
  const fs::path out_dir = a.out.empty() ? default_out_root() / "data" : fs::path(a.out);
  fs::create_directories(out_dir);

  swag::SynthConfig cfg;
  cfg.num_classes = a.classes;
  cfg.feature_dim = a.feature_dim;
  cfg.cluster_separation = a.separation;
  cfg.annotators = a.annotators;

  const auto emit = [&](const std::string& split, std::size_t n, std::uint64_t seed,
                        const std::vector<double>& shift) {
    swag::SynthConfig c = cfg;
    c.num_examples = n;
    c.seed = seed;
    c.domain_shift = shift;
    const auto examples = swag::generate(c);
    const fs::path path = out_dir / (a.name + "_" + split + ".jsonl");
    swag::save_dataset(path, examples);
    swag::save_dataset_meta(path, swag::DatasetMeta{a.name + "_" + split, a.name});
    print_stats(path, examples);
  };

  // Train and test draw from disjoint seeds; the shifted test replays the
  // test seed so only the feature offset differs.
  emit("train", a.train_examples, a.seed, {});
  emit("test", a.test_examples, a.seed + 1, {});
  if (!a.shift.empty()) {
    std::vector<double> shift = parse_double_list(a.shift);
    if (shift.size() == 1 && a.feature_dim > 1) {
      shift.assign(a.feature_dim, shift[0]);
    }
    emit("test_shifted", a.test_examples, a.seed + 1, shift);
  }
  return kExitOk;
}

struct RunArgs {
  std::string config;
  std::string train;
  std::vector<std::string> tests;
  std::string out;
  std::string seeds;
  std::string hidden;
  std::string activation;
  // Sentinels (-1) mean "not given on the command line".
  int rank_cap = -1;
  int num_samples = -1;
  double scale = -1.0;
  int epochs = -1;
  int batch_size = -1;
  double lr = -1.0;
  int swa_start = -1;
  double l2 = -1.0;
  bool sequential = false;
  bool resume = false;
};

int cmd_run(const RunArgs& a) {
  swag::ExperimentConfig cfg;
  if (!a.config.empty()) {
    cfg = swag::experiment_config_from_json(swag::read_file(a.config), a.config);
  }
  // Flags override config-file values, which override defaults.
  if (!a.train.empty()) cfg.train_path = a.train;
  if (!a.tests.empty()) {
    cfg.test_paths.clear();
    for (const auto& t : a.tests) cfg.test_paths.emplace_back(t);
  }
  if (!a.out.empty()) cfg.out_dir = a.out;
  if (cfg.out_dir.empty()) cfg.out_dir = default_out_root() / "run";
  if (!a.seeds.empty()) {
    cfg.seeds.clear();
    for (const double v : parse_double_list(a.seeds)) {
      cfg.seeds.push_back(static_cast<std::uint64_t>(v));
    }
  }
  if (!a.hidden.empty()) {
    cfg.hidden_sizes.clear();
    for (const double v : parse_double_list(a.hidden)) {
      cfg.hidden_sizes.push_back(static_cast<std::size_t>(v));
    }
  }
  if (!a.activation.empty()) cfg.activation = swag::activation_from_string(a.activation);
  if (a.rank_cap >= 0) cfg.rank_cap = static_cast<std::size_t>(a.rank_cap);
  if (a.num_samples >= 0) cfg.sampling.num_samples = static_cast<std::size_t>(a.num_samples);
  if (a.scale >= 0.0) cfg.sampling.scale = a.scale;
  if (a.epochs >= 0) cfg.train.epochs = static_cast<std::size_t>(a.epochs);
  if (a.batch_size >= 0) cfg.train.batch_size = static_cast<std::size_t>(a.batch_size);
  if (a.lr >= 0.0) cfg.train.learning_rate = a.lr;
  if (a.swa_start >= 0) cfg.train.swa_start_epoch = static_cast<std::size_t>(a.swa_start);
  if (a.l2 >= 0.0) cfg.train.l2 = a.l2;

  swag::RunOptions options;
  options.parallel_seeds = !a.sequential;
  options.resume = a.resume;

  const swag::RunResult result = swag::run_experiment(cfg, options);

  for (const auto& [seed, error] : result.failed_seeds) {
    std::fprintf(stderr, "seed %llu failed: %s\n",
                 static_cast<unsigned long long>(seed), error.c_str());
  }
  if (result.summaries.empty()) {
    // Nothing succeeded; surface the first recorded failure as the outcome.
    throw swag::DataError("run: every seed failed; see " +
                          (result.run_dir / "errors.json").string());
  }
  for (const auto& [test_id, summary] : result.summaries) {
    std::printf("%s", swag::summary_table_text(summary).c_str());
    std::printf("\n");
  }
  std::printf("run dir: %s\n", result.run_dir.string().c_str());
  return kExitOk;
}

int cmd_inspect(const std::string& report, const std::string& ids_text,
                const std::string& csv_out) {
  std::vector<std::string> ids;
  std::size_t pos = 0;
  while (pos <= ids_text.size()) {
    const std::size_t comma = ids_text.find(',', pos);
    ids.push_back(ids_text.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  const auto rows = swag::inspect_examples(report, ids);
  std::printf("%s", swag::inspect_rows_text(rows).c_str());
  if (!csv_out.empty()) {
    swag::write_file_atomic(csv_out, swag::inspect_rows_csv(rows));
    std::printf("wrote %s\n", csv_out.c_str());
  }
  return kExitOk;
}

int cmd_eval(const std::string& report_path, const std::string& out) {
  swag::EvalReport r = swag::load_report(report_path);
  const double acc = swag::recompute_accuracy(r.per_example);
  const double ce = swag::recompute_mean_cross_entropy(r.per_example);
  std::printf("method=%s seed=%llu n=%zu accuracy=%.6f mean_cross_entropy=%.6f\n",
              swag::method_name(r.method).c_str(),
              static_cast<unsigned long long>(r.seed), r.per_example.size(), acc, ce);
  if (std::abs(acc - r.accuracy) > 1e-9 || std::abs(ce - r.mean_cross_entropy) > 1e-9) {
    throw swag::DataError("eval: stored header (accuracy=" +
                          swag::format_double(r.accuracy) + ", mean_cross_entropy=" +
                          swag::format_double(r.mean_cross_entropy) +
                          ") disagrees with the per-example records");
  }
  if (!out.empty()) {
    r.accuracy = acc;
    r.mean_cross_entropy = ce;
    r.num_examples = r.per_example.size();
    swag::save_report(out, r);
    std::printf("wrote %s\n", out.c_str());
  }
  return kExitOk;
}

int cmd_export(const std::string& report_path, const std::string& out) {
  const swag::EvalReport r = swag::load_report(report_path);
  swag::write_file_atomic(out, swag::report_to_csv(r));
  std::printf("wrote %s\n", out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(swag::kToolName) +
               " - weight-averaged ensembles evaluated against annotator distributions"};
  app.set_version_flag("--version", std::string(swag::kToolVersion));
  app.require_subcommand(1);

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "Generate synthetic soft-label datasets");
  gen->add_option("--out", gen_args.out, "Output directory (default $SWAGKIT_OUT/data)");
  gen->add_option("--name", gen_args.name, "Dataset family name");
  gen->add_option("--train-examples", gen_args.train_examples, "Training set size");
  gen->add_option("--test-examples", gen_args.test_examples, "Test set size");
  gen->add_option("--classes", gen_args.classes, "Number of classes");
  gen->add_option("--feature-dim", gen_args.feature_dim, "Feature dimension");
  gen->add_option("--separation", gen_args.separation, "Cluster center separation");
  gen->add_option("--annotators", gen_args.annotators, "Annotators per example");
  gen->add_option("--seed", gen_args.seed, "Generator seed");
  gen->add_option("--domain-shift", gen_args.shift,
                  "Feature mean offset for an extra shifted test set; comma list "
                  "or one value broadcast to all axes");

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Train and evaluate base/swa/swag over seeds");
  run->add_option("--config", run_args.config, "Experiment config JSON");
  run->add_option("--train", run_args.train, "Training dataset (JSONL)");
  run->add_option("--test", run_args.tests, "Test dataset (repeatable)");
  run->add_option("--out", run_args.out, "Run output directory");
  run->add_option("--seeds", run_args.seeds, "Comma-separated seed list");
  run->add_option("--hidden", run_args.hidden, "Comma-separated hidden layer sizes");
  run->add_option("--activation", run_args.activation, "tanh or relu");
  run->add_option("--rank-cap", run_args.rank_cap, "Deviation columns kept (K)");
  run->add_option("--num-samples", run_args.num_samples, "Posterior samples (N)");
  run->add_option("--scale", run_args.scale, "Covariance scale");
  run->add_option("--epochs", run_args.epochs, "Training epochs");
  run->add_option("--batch-size", run_args.batch_size, "SGD batch size");
  run->add_option("--lr", run_args.lr, "Learning rate");
  run->add_option("--swa-start", run_args.swa_start, "First epoch collected");
  run->add_option("--l2", run_args.l2, "L2 penalty");
  run->add_flag("--sequential", run_args.sequential, "Run seeds one after another");
  run->add_flag("--resume", run_args.resume, "Resume from per-seed checkpoints");

  std::string inspect_report, inspect_ids, inspect_csv;
  CLI::App* inspect =
      app.add_subcommand("inspect", "Show per-sample predictions for chosen examples");
  inspect->add_option("report", inspect_report, "EvalReport JSON from a run directory")
      ->required();
  inspect->add_option("--ids", inspect_ids, "Comma-separated example ids")->required();
  inspect->add_option("--csv", inspect_csv, "Also write the rows as CSV");

  std::string eval_report, eval_out;
  CLI::App* eval = app.add_subcommand("eval", "Recompute a report from its records");
  eval->add_option("report", eval_report, "EvalReport JSON")->required();
  eval->add_option("--out", eval_out, "Write the recomputed report here");

  std::string export_report, export_out;
  CLI::App* exp = app.add_subcommand("export", "Write a report's records as CSV");
  exp->add_option("report", export_report, "EvalReport JSON")->required();
  exp->add_option("--out", export_out, "CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_args);
    if (run->parsed()) return cmd_run(run_args);
    if (inspect->parsed()) return cmd_inspect(inspect_report, inspect_ids, inspect_csv);
    if (eval->parsed()) return cmd_eval(eval_report, eval_out);
    if (exp->parsed()) return cmd_export(export_report, export_out);
  } catch (const swag::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const swag::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const swag::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitConfig;
}
