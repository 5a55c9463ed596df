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

// Acceptance checks for the toolkit, one printed line per criterion. Exits
// nonzero if any criterion fails. Unlike the unit tests these run the full
// stack end to end, with every tolerance pinned in this file.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "swag/data.hpp"
#include "swag/errors.hpp"
#include "swag/eval.hpp"
#include "swag/experiment.hpp"
#include "swag/io_util.hpp"
#include "swag/nn.hpp"
#include "swag/posterior.hpp"
#include "swag/rng.hpp"
#include "swag/trajectory.hpp"
#include "test_util.hpp"

using namespace swag;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Failure {
  std::string reason;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

// ---------------------------------------------------------------------------
// 1. Trajectory oracle suite: random trajectories against a long-double
//    brute-force computation of the mean, diagonal variance, and the
//    prefix-mean deviation columns, including eviction down to the last K.
// ---------------------------------------------------------------------------

std::string criterion_trajectory_oracle() {
  const auto start = std::chrono::steady_clock::now();
  Rng meta(20260801, 0);
  const std::size_t ranks[] = {2, 5, 20};

  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t count = 2 + meta.next_below(99);   // 2..100 snapshots
    const std::size_t dim = 1 + meta.next_below(50);     // 1..50 parameters
    const std::size_t rank_cap = ranks[trial % 3];

    std::vector<std::vector<double>> snaps(count, std::vector<double>(dim));
    Rng values(777, static_cast<std::uint64_t>(trial));
    for (auto& s : snaps) {
      for (double& v : s) v = values.uniform(-2.0, 2.0);
    }

    // Brute-force oracle in extended precision.
    std::vector<long double> sum(dim, 0.0L), sq(dim, 0.0L);
    std::vector<std::vector<double>> oracle_devs;  // one per snapshot
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<double> dev(dim);
      for (std::size_t j = 0; j < dim; ++j) {
        sum[j] += snaps[i][j];
        sq[j] += static_cast<long double>(snaps[i][j]) * snaps[i][j];
        const long double prefix_mean = sum[j] / static_cast<long double>(i + 1);
        dev[j] = static_cast<double>(snaps[i][j] - prefix_mean);
      }
      oracle_devs.push_back(std::move(dev));
    }

    SwagCollector c(dim, rank_cap);
    for (const auto& s : snaps) c.update(ParamSnapshot(s));
    const PosteriorApprox p = c.finalize();

    for (std::size_t j = 0; j < dim; ++j) {
      const double mean = static_cast<double>(sum[j] / static_cast<long double>(count));
      require(std::abs(p.mean()[j] - mean) <= 1e-12 * (1.0 + std::abs(mean)),
              "mean beyond rel 1e-12 (trial " + std::to_string(trial) + ")");
      const long double raw =
          sq[j] / static_cast<long double>(count) -
          (sum[j] / static_cast<long double>(count)) * (sum[j] / static_cast<long double>(count));
      const double var = static_cast<double>(raw < 0.0L ? 0.0L : raw);
      require(std::abs(p.diag_var()[j] - var) <= 1e-10,
              "diag variance beyond abs 1e-10 (trial " + std::to_string(trial) + ")");
    }

    const std::size_t kept = std::min(count, rank_cap);
    require(p.rank() == kept, "eviction kept " + std::to_string(p.rank()) + " columns, want " +
                                  std::to_string(kept));
    for (std::size_t k = 0; k < kept; ++k) {
      const auto& oracle_col = oracle_devs[count - kept + k];
      for (std::size_t j = 0; j < dim; ++j) {
        require(std::abs(p.deviation_columns()[k][j] - oracle_col[j]) <=
                    1e-12 * (1.0 + std::abs(oracle_col[j])),
                "deviation column beyond 1e-12 (trial " + std::to_string(trial) + ")");
      }
    }
  }

  const double elapsed = seconds_since(start);
  require(elapsed < 5.0, "took " + std::to_string(elapsed) + "s, budget 5s");
  char buf[128];
  std::snprintf(buf, sizeof(buf), "100 random trajectories, %.2fs", elapsed);
  return buf;
}

// ---------------------------------------------------------------------------
// 2. Sampler statistics on a dim = 3, rank = 2 posterior with a hand-set
//    covariance, plus bitwise rerun stability.
// ---------------------------------------------------------------------------

std::string criterion_sampler_statistics() {
  const auto start = std::chrono::steady_clock::now();
  const PosteriorApprox p({1.0, -2.0, 0.5}, {0.3, 0.2, 0.1},
                          {{0.4, -0.2, 0.1}, {-0.1, 0.3, 0.2}}, 10);
  const DenseMatrix cov = covariance_dense(p);
  SamplingConfig cfg;
  cfg.seed = 51;

  const std::size_t m = 50000;
  std::vector<double> mean(3, 0.0), xx(9, 0.0);
  std::string bytes_a;
  bytes_a.reserve(m * 3 * sizeof(double));
  for (std::size_t i = 0; i < m; ++i) {
    const auto v = sample_params(p, cfg, i).values();
    bytes_a.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
    for (std::size_t a = 0; a < 3; ++a) {
      mean[a] += v[a];
      for (std::size_t b = 0; b < 3; ++b) xx[a * 3 + b] += v[a] * v[b];
    }
  }
  const std::uint64_t hash_a = fnv1a64(bytes_a);
  for (double& v : mean) v /= static_cast<double>(m);

  for (std::size_t a = 0; a < 3; ++a) {
    const double sigma = std::sqrt(cov.at(a, a));
    const double bound = 3.0 * sigma / std::sqrt(static_cast<double>(m));
    require(std::abs(mean[a] - p.mean()[a]) < bound,
            "empirical mean coordinate " + std::to_string(a) + " off by more than 3 sigma");
    for (std::size_t b = 0; b < 3; ++b) {
      const double emp = xx[a * 3 + b] / static_cast<double>(m) - mean[a] * mean[b];
      require(std::abs(emp - cov.at(a, b)) < 0.02,
              "empirical covariance entry beyond 0.02");
    }
  }

  std::string bytes_b;
  bytes_b.reserve(m * 3 * sizeof(double));
  for (std::size_t i = 0; i < m; ++i) {
    const auto v = sample_params(p, cfg, i).values();
    bytes_b.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }
  require(hash_a == fnv1a64(bytes_b), "seeded rerun is not bitwise identical");

  const double elapsed = seconds_since(start);
  require(elapsed < 10.0, "took " + std::to_string(elapsed) + "s, budget 10s");
  char buf[128];
  std::snprintf(buf, sizeof(buf), "50000 samples, mean/cov within bounds, %.2fs", elapsed);
  return buf;
}

// ---------------------------------------------------------------------------
// 3. Gradient check: 20 random networks and inputs against central finite
//    differences with h = 1e-5.
// ---------------------------------------------------------------------------

std::string criterion_gradient_check() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(31415, 0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    ModelSpec spec;
    const std::size_t in = 1 + rng.next_below(5);
    const std::size_t hid = 2 + rng.next_below(6);
    const std::size_t classes = 2 + rng.next_below(3);
    spec.layer_sizes = {in, hid, classes};
    spec.activation = Activation::tanh;

    std::vector<double> pvals(spec.param_count());
    for (double& v : pvals) v = rng.uniform(-1.0, 1.0);
    const ParamSnapshot params(std::move(pvals));
    std::vector<double> x(in);
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    std::vector<double> target(classes);
    double tsum = 0.0;
    for (double& v : target) {
      v = rng.uniform(0.05, 1.0);
      tsum += v;
    }
    for (double& v : target) v /= tsum;

    const std::vector<double> g = grad(spec, params, x, target);
    const double h = 1e-5;
    for (std::size_t j = 0; j < g.size(); ++j) {
      std::vector<double> shifted = params.values();
      shifted[j] += h;
      const double up = ce_loss(spec, ParamSnapshot(shifted), x, target);
      shifted[j] -= 2.0 * h;
      const double down = ce_loss(spec, ParamSnapshot(shifted), x, target);
      const double fd = (up - down) / (2.0 * h);
      const double rel =
          std::abs(g[j] - fd) / std::max({1.0, std::abs(g[j]), std::abs(fd)});
      worst = std::max(worst, rel);
    }
  }
  require(worst < 1e-5, "max relative gradient error " + std::to_string(worst));

  const double elapsed = seconds_since(start);
  require(elapsed < 5.0, "took " + std::to_string(elapsed) + "s, budget 5s");
  char buf[128];
  std::snprintf(buf, sizeof(buf), "20 networks, max rel err %.2e, %.2fs", worst, elapsed);
  return buf;
}

// ---------------------------------------------------------------------------
// 4. Degeneracy: scale = 0 ensembles reproduce the averaged-weights point
//    model exactly, and a zero-covariance posterior does so for any N.
// ---------------------------------------------------------------------------

bool reports_probs_equal(const EvalReport& a, const EvalReport& b) {
  if (a.per_example.size() != b.per_example.size()) return false;
  for (std::size_t i = 0; i < a.per_example.size(); ++i) {
    const auto& pa = a.per_example[i].predicted;
    const auto& pb = b.per_example[i].predicted;
    if (pa.size() != pb.size()) return false;
    if (std::memcmp(pa.data(), pb.data(), pa.size() * sizeof(double)) != 0) return false;
  }
  return a.accuracy == b.accuracy && a.mean_cross_entropy == b.mean_cross_entropy;
}

std::string criterion_degeneracy() {
  SynthConfig synth;
  synth.num_examples = 200;
  synth.seed = 14;
  const auto train_data = generate(synth);
  synth.num_examples = 80;
  synth.seed = 15;
  const auto test_data = generate(synth);
  std::vector<std::vector<double>> inputs;
  for (const auto& ex : test_data) inputs.push_back(ex.features);

  ModelSpec spec;
  spec.layer_sizes = {3, 8, 3};
  TrainConfig tc;
  tc.epochs = 10;
  tc.swa_start_epoch = 3;
  tc.seed = 4;
  TrainResult tr = train(spec, tc, train_data, 5);
  const PosteriorApprox posterior = tr.collector.finalize();
  const ParamSnapshot swa_params(posterior.mean());

  const auto swa_preds = predict_point(swa_params, spec, inputs);
  const EvalReport swa_report = evaluate(swa_preds, test_data, Method::swa, "tr", "te", 4);

  SamplingConfig sc;
  sc.seed = 4;
  sc.scale = 0.0;
  sc.num_samples = 20;
  const auto swag_preds = predict_ensemble(posterior, spec, inputs, sc);
  const EvalReport swag_report =
      evaluate(swag_preds, test_data, Method::swag, "tr", "te", 4);
  require(reports_probs_equal(swa_report, swag_report),
          "scale = 0 ensemble diverges from the SWA point report");

  const std::size_t dim = spec.param_count();
  const PosteriorApprox zero_cov(posterior.mean(), std::vector<double>(dim, 0.0),
                                 std::vector<std::vector<double>>(
                                     3, std::vector<double>(dim, 0.0)),
                                 posterior.snapshot_count());
  for (const std::size_t n : {1, 7, 20}) {
    SamplingConfig zc;
    zc.seed = 99;
    zc.scale = 1.0;
    zc.num_samples = n;
    const auto preds = predict_ensemble(zero_cov, spec, inputs, zc);
    const EvalReport rep = evaluate(preds, test_data, Method::swag, "tr", "te", 4);
    require(reports_probs_equal(swa_report, rep),
            "zero-covariance ensemble with N = " + std::to_string(n) +
                " diverges from the point report");
  }
  return "scale=0 and zero-covariance ensembles match the point model bitwise";
}

// ---------------------------------------------------------------------------
// 5. Cross-entropy kernel: exact uniform value and the Gibbs inequality on
//    10,000 random distribution pairs.
// ---------------------------------------------------------------------------

std::string criterion_cross_entropy_kernel() {
  const PredictionDistribution uniform{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
  const std::vector<std::vector<double>> annots = {
      {0.4, 0.6, 0.0}, {1.0, 0.0, 0.0}, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, {0.2, 0.2, 0.6}};
  for (const auto& a : annots) {
    const double ce = cross_entropy(uniform, PredictionDistribution{a});
    require(std::abs(ce - std::log(3.0)) <= 1e-12,
            "uniform-prediction CE differs from ln 3 by more than 1e-12");
  }

  Rng rng(112358, 0);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t classes = 2 + rng.next_below(4);
    const auto draw = [&] {
      std::vector<double> p(classes);
      double sum = 0.0;
      for (double& v : p) {
        v = rng.uniform01();
        sum += v;
      }
      for (double& v : p) v /= sum;
      return p;
    };
    const auto pred = draw();
    const auto annot = draw();
    const double ce = cross_entropy(PredictionDistribution{pred}, PredictionDistribution{annot});
    require(ce + 1e-12 >= entropy(annot), "Gibbs inequality violated on pair " +
                                              std::to_string(i));
  }
  return "uniform CE = ln 3 exactly; Gibbs holds on 10000 pairs";
}

// ---------------------------------------------------------------------------
// 6. Trend reproduction on the synthetic ambiguous dataset, 5 seeds. The
//    frozen protocol: 3 classes, 5 annotators, separation 2.0, 1500 train /
//    600 test examples, a 16-unit tanh network, and a domain-shifted copy of
//    the test set.
// ---------------------------------------------------------------------------

ExperimentConfig trend_config(const std::filesystem::path& dir) {
  SynthConfig synth;
  synth.num_classes = 3;
  synth.feature_dim = 3;
  synth.cluster_separation = 2.0;
  synth.annotators = 5;

  synth.num_examples = 1500;
  synth.seed = 7;
  save_dataset(dir / "synth_train.jsonl", generate(synth));
  save_dataset_meta(dir / "synth_train.jsonl", DatasetMeta{"synth_train", "synth"});

  synth.num_examples = 600;
  synth.seed = 8;
  save_dataset(dir / "synth_test.jsonl", generate(synth));
  save_dataset_meta(dir / "synth_test.jsonl", DatasetMeta{"synth_test", "synth"});

  synth.domain_shift = {0.6, 0.6, 0.6};
  save_dataset(dir / "synth_test_shifted.jsonl", generate(synth));
  save_dataset_meta(dir / "synth_test_shifted.jsonl",
                    DatasetMeta{"synth_test_shifted", "synth"});

  ExperimentConfig cfg;
  cfg.train_path = dir / "synth_train.jsonl";
  cfg.test_paths = {dir / "synth_test.jsonl", dir / "synth_test_shifted.jsonl"};
  cfg.hidden_sizes = {16};
  cfg.activation = Activation::tanh;
  cfg.train.epochs = 60;
  cfg.train.batch_size = 16;
  cfg.train.learning_rate = 0.5;
  cfg.train.swa_start_epoch = 10;
  cfg.train.l2 = 1e-4;
  cfg.sampling.num_samples = 20;
  cfg.sampling.scale = 1.0;
  cfg.rank_cap = 20;
  cfg.seeds = {1, 2, 3, 4, 5};
  cfg.out_dir = dir / "run";
  return cfg;
}

const MethodStats& stats_for(const ComparisonSummary& s, Method m) {
  for (const auto& ms : s.methods) {
    if (ms.method == m) return ms;
  }
  throw Failure{"summary is missing method " + method_name(m)};
}

std::string criterion_trend_reproduction(const std::filesystem::path& dir,
                                         std::filesystem::path& run_dir_out) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = trend_config(dir);
  const RunResult result = run_experiment(cfg);
  run_dir_out = result.run_dir;
  require(result.failed_seeds.empty(), "some seeds failed");

  // (a) Calibration: SWAG beats base on CE in >= 4/5 seeds and SWA on
  // average.
  std::size_t swag_wins = 0;
  for (const std::uint64_t seed : cfg.seeds) {
    const auto seed_dir = result.run_dir / ("seed_" + std::to_string(seed));
    const EvalReport base = load_report(seed_dir / "report_base_synth_test.json");
    const EvalReport swag_rep = load_report(seed_dir / "report_swag_synth_test.json");
    if (swag_rep.mean_cross_entropy < base.mean_cross_entropy) swag_wins += 1;
  }
  require(swag_wins >= 4, "SWAG beat base CE in only " + std::to_string(swag_wins) +
                              "/5 seeds");
  const ComparisonSummary& test = result.summaries.at("synth_test");
  const MethodStats& base = stats_for(test, Method::base);
  const MethodStats& swa = stats_for(test, Method::swa);
  const MethodStats& swag_stats = stats_for(test, Method::swag);
  require(swag_stats.cross_entropy_mean <= swa.cross_entropy_mean,
          "SWAG mean CE above SWA mean CE");

  // (b) Headline accuracy: averaged methods do not lose accuracy.
  require(swa.accuracy_mean >= base.accuracy_mean, "SWA mean accuracy below base");
  require(swag_stats.accuracy_mean >= base.accuracy_mean, "SWAG mean accuracy below base");

  // (c) Robustness: non-negative accuracy delta under domain shift.
  const ComparisonSummary& shifted = result.summaries.at("synth_test_shifted");
  require(stats_for(shifted, Method::swa).delta_accuracy >= 0.0,
          "SWA accuracy delta negative under shift");
  require(stats_for(shifted, Method::swag).delta_accuracy >= 0.0,
          "SWAG accuracy delta negative under shift");

  const double elapsed = seconds_since(start);
  require(elapsed < 180.0, "took " + std::to_string(elapsed) + "s, budget 180s");
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "swag<base CE %zu/5 seeds; CE %.3f/%.3f/%.3f acc %.3f/%.3f/%.3f "
                "(base/swa/swag); shift dAcc %+.3f/%+.3f; %.1fs",
                swag_wins, base.cross_entropy_mean, swa.cross_entropy_mean,
                swag_stats.cross_entropy_mean, base.accuracy_mean, swa.accuracy_mean,
                swag_stats.accuracy_mean, stats_for(shifted, Method::swa).delta_accuracy,
                stats_for(shifted, Method::swag).delta_accuracy, elapsed);
  return buf;
}

// ---------------------------------------------------------------------------
// 7. Inspect ordering: pick an unanimous-correct, a split-annotation-correct,
//    and a confidently-wrong example from the trend run and verify the
//    inspect rows order their cross-entropies low < medium < high.
// ---------------------------------------------------------------------------

std::string criterion_inspect_ordering(const std::filesystem::path& run_dir) {
  const auto report_path = run_dir / "seed_1" / "report_swag_synth_test.json";
  const EvalReport report = load_report(report_path);

  const PerExampleRecord* low = nullptr;    // unanimous votes, predicted right
  const PerExampleRecord* medium = nullptr; // split votes, predicted right
  const PerExampleRecord* high = nullptr;   // predicted wrong, worst CE
  for (const auto& rec : report.per_example) {
    double annot_max = 0.0;
    for (const double v : rec.annotation) annot_max = std::max(annot_max, v);
    const bool correct = argmax_class(rec.predicted) == rec.gold;
    if (correct && annot_max == 1.0) {
      if (low == nullptr || rec.cross_entropy < low->cross_entropy) low = &rec;
    }
    if (correct && annot_max <= 0.6) {
      if (medium == nullptr || rec.cross_entropy < medium->cross_entropy) medium = &rec;
    }
    if (!correct) {
      if (high == nullptr || rec.cross_entropy > high->cross_entropy) high = &rec;
    }
  }
  require(low != nullptr, "no unanimous correctly-predicted example in the test set");
  require(medium != nullptr, "no split-annotation correctly-predicted example");
  require(high != nullptr, "no mispredicted example");

  const auto rows = inspect_examples(
      report_path, {low->example_id, medium->example_id, high->example_id});
  require(rows.size() == 3, "inspect returned the wrong number of rows");
  for (std::size_t i = 0; i < 3; ++i) {
    const PerExampleRecord* rec = i == 0 ? low : (i == 1 ? medium : high);
    require(rows[i].cross_entropy == rec->cross_entropy,
            "inspect recomputed a different cross-entropy than the report");
  }
  require(rows[0].cross_entropy < rows[1].cross_entropy,
          "unanimous-correct CE not below split-annotation CE");
  require(rows[1].cross_entropy < rows[2].cross_entropy,
          "split-annotation CE not below confidently-wrong CE");

  char buf[160];
  std::snprintf(buf, sizeof(buf), "CE ordering %.3f < %.3f < %.3f (%s, %s, %s)",
                rows[0].cross_entropy, rows[1].cross_entropy, rows[2].cross_entropy,
                rows[0].example_id.c_str(), rows[1].example_id.c_str(),
                rows[2].example_id.c_str());
  return buf;
}

// ---------------------------------------------------------------------------
// 8. Format round-trips: trajectory, dataset, and feature files survive
//    write -> read -> write byte-identically.
// ---------------------------------------------------------------------------

std::string criterion_format_round_trips(const std::filesystem::path& dir) {
  // Trajectory.
  std::vector<ParamSnapshot> snaps;
  Rng rng(2718, 0);
  for (int i = 0; i < 7; ++i) {
    std::vector<double> v(11);
    for (double& x : v) x = rng.uniform(-3.0, 3.0);
    snaps.emplace_back(std::move(v));
  }
  const auto tpath = dir / "roundtrip.swgt";
  save_trajectory(tpath, snaps);
  const std::string tbytes = read_file(tpath);
  save_trajectory(tpath, load_trajectory(tpath));
  require(read_file(tpath) == tbytes, "trajectory file changed across a round trip");

  // Dataset.
  SynthConfig synth;
  synth.num_examples = 60;
  synth.seed = 23;
  const auto dpath = dir / "roundtrip.jsonl";
  save_dataset(dpath, generate(synth));
  const std::string dbytes = read_file(dpath);
  save_dataset(dpath, load_dataset(dpath));
  require(read_file(dpath) == dbytes, "dataset file changed across a round trip");

  // Features.
  FeatureFile f;
  f.rows = 5;
  f.cols = 4;
  f.ids = {"a", "b", "c", "d", "e"};
  for (std::size_t i = 0; i < f.rows * f.cols; ++i) {
    f.data.push_back(rng.uniform(-1.0, 1.0));
  }
  const auto fpath = dir / "roundtrip.swgf";
  write_features(fpath, f);
  const std::string fbytes = read_file(fpath);
  const std::string mbytes = read_file(dir / "roundtrip.swgf.manifest.json");
  write_features(fpath, read_features(fpath));
  require(read_file(fpath) == fbytes, "feature file changed across a round trip");
  require(read_file(dir / "roundtrip.swgf.manifest.json") == mbytes,
          "feature manifest changed across a round trip");

  return "trajectory, dataset, and feature files are byte-stable";
}

}  // namespace

int main() {
  swagtest::TempDir tmp("acceptance");
  std::filesystem::path trend_run_dir;

  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
      {"trajectory oracle suite", [] { return criterion_trajectory_oracle(); }},
      {"sampler statistics", [] { return criterion_sampler_statistics(); }},
      {"gradient check", [] { return criterion_gradient_check(); }},
      {"degeneracy", [] { return criterion_degeneracy(); }},
      {"cross-entropy kernel", [] { return criterion_cross_entropy_kernel(); }},
      {"trend reproduction",
       [&] { return criterion_trend_reproduction(tmp.path(), trend_run_dir); }},
      {"inspect ordering", [&] { return criterion_inspect_ordering(trend_run_dir); }},
      {"format round-trips", [&] { return criterion_format_round_trips(tmp.path()); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string verdict = "PASS";
    std::string detail;
    try {
      detail = criteria[i].second();
    } catch (const Failure& f) {
      verdict = "FAIL";
      detail = f.reason;
    } catch (const std::exception& e) {
      verdict = "FAIL";
      detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %zu %s %s: %s\n", i + 1, verdict.c_str(),
                criteria[i].first.c_str(), detail.c_str());
    std::fflush(stdout);
    if (verdict == "FAIL") failures += 1;
  }
  return failures == 0 ? 0 : 1;
}
