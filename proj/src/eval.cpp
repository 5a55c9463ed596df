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

#include "swag/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "swag/errors.hpp"
#include "swag/io_util.hpp"

namespace swag {

std::string method_name(Method m) {
  switch (m) {
    case Method::base:
      return "base";
    case Method::swa:
      return "swa";
    case Method::swag:
      return "swag";
  }
  throw ConfigError("method_name: invalid method");
}

Method method_from_string(const std::string& name) {
  if (name == "base") return Method::base;
  if (name == "swa") return Method::swa;
  if (name == "swag") return Method::swag;
  throw ConfigError("unknown method \"" + name + "\" (expected base, swa, or swag)");
}

PredictionDistribution annotation_distribution(const SoftLabelExample& ex) {
  std::uint64_t total = 0;
  for (const auto v : ex.annotations) total += v;
  if (total == 0) {
    throw DataError("annotation_distribution: example \"" + ex.example_id +
                    "\" has zero total votes");
  }
  std::vector<double> p(ex.annotations.size());
  for (std::size_t c = 0; c < p.size(); ++c) {
    p[c] = static_cast<double>(ex.annotations[c]) / static_cast<double>(total);
  }
  return PredictionDistribution{std::move(p)};
}

double cross_entropy(const PredictionDistribution& pred, const PredictionDistribution& annot) {
  validate_distribution(pred.probs, "cross_entropy pred");
  validate_distribution(annot.probs, "cross_entropy annot");
  if (pred.num_classes() != annot.num_classes()) {
    throw ConfigError("cross_entropy: class count mismatch");
  }
  double ce = 0.0;
  for (std::size_t c = 0; c < annot.probs.size(); ++c) {
    if (annot.probs[c] > 0.0) {
      ce -= annot.probs[c] * std::log(std::max(pred.probs[c], kCrossEntropyEps));
    }
  }
  return ce;
}

double recompute_accuracy(const std::vector<PerExampleRecord>& records) {
  if (records.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& rec : records) {
    if (argmax_class(rec.predicted) == rec.gold) correct += 1;
  }
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

double recompute_mean_cross_entropy(const std::vector<PerExampleRecord>& records) {
  if (records.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& rec : records) {
    sum += rec.cross_entropy;
  }
  return sum / static_cast<double>(records.size());
}

EvalReport evaluate(const std::vector<PredictionDistribution>& preds,
                    const std::vector<SoftLabelExample>& data, Method method,
                    const std::string& train_set_id, const std::string& test_set_id,
                    std::uint64_t seed) {
  if (preds.size() != data.size()) {
    throw DataError("evaluate: " + std::to_string(preds.size()) + " predictions for " +
                    std::to_string(data.size()) + " examples");
  }
  if (data.empty()) {
    throw DataError("evaluate: empty dataset");
  }
  EvalReport r;
  r.method = method;
  r.train_set_id = train_set_id;
  r.test_set_id = test_set_id;
  r.seed = seed;
  r.num_examples = data.size();
  r.per_example.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    validate_distribution(preds[i].probs, "evaluate prediction " + data[i].example_id);
    PerExampleRecord rec;
    rec.example_id = data[i].example_id;
    rec.gold = data[i].gold;
    rec.predicted = preds[i].probs;
    rec.annotation = annotation_distribution(data[i]).probs;
    rec.cross_entropy = cross_entropy(preds[i], PredictionDistribution{rec.annotation});
    r.per_example.push_back(std::move(rec));
  }
  r.accuracy = recompute_accuracy(r.per_example);
  r.mean_cross_entropy = recompute_mean_cross_entropy(r.per_example);
  return r;
}

namespace {

double sample_sd(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double sq = 0.0;
  for (const double x : xs) {
    sq += (x - mean) * (x - mean);
  }
  return std::sqrt(sq / static_cast<double>(xs.size() - 1));
}

double plain_mean(const std::vector<double>& xs) {
  double sum = 0.0;
  for (const double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

}  // namespace

ComparisonSummary summarize(const std::vector<EvalReport>& reports) {
  if (reports.empty()) {
    throw DataError("summarize: no reports");
  }
  const std::string& train_id = reports.front().train_set_id;
  const std::string& test_id = reports.front().test_set_id;
  for (const auto& r : reports) {
    if (r.train_set_id != train_id || r.test_set_id != test_id) {
      throw DataError("summarize: reports mix dataset ids (" + r.train_set_id + "/" +
                      r.test_set_id + " vs " + train_id + "/" + test_id + ")");
    }
  }

  // seed -> (accuracy, ce) per method, ordered by seed.
  std::map<Method, std::map<std::uint64_t, const EvalReport*>> by_method;
  for (const auto& r : reports) {
    auto [it, inserted] = by_method[r.method].emplace(r.seed, &r);
    if (!inserted) {
      throw DataError("summarize: duplicate report for method " + method_name(r.method) +
                      " seed " + std::to_string(r.seed));
    }
  }
  const auto base_it = by_method.find(Method::base);
  if (base_it == by_method.end()) {
    throw DataError("summarize: no base reports to anchor deltas");
  }

  std::vector<std::uint64_t> seeds;
  for (const auto& [seed, rep] : base_it->second) seeds.push_back(seed);
  for (const auto& [method, group] : by_method) {
    if (group.size() != seeds.size()) {
      throw DataError("summarize: method " + method_name(method) +
                      " does not cover the base seed set");
    }
    for (const auto s : seeds) {
      if (group.find(s) == group.end()) {
        throw DataError("summarize: method " + method_name(method) + " missing seed " +
                        std::to_string(s));
      }
    }
  }

  ComparisonSummary out;
  out.train_set_id = train_id;
  out.test_set_id = test_id;
  out.seeds = seeds;
  out.single_seed = seeds.size() == 1;

  std::map<Method, MethodStats> stats;
  for (const auto& [method, group] : by_method) {
    std::vector<double> accs, ces;
    for (const auto s : seeds) {
      accs.push_back(group.at(s)->accuracy);
      ces.push_back(group.at(s)->mean_cross_entropy);
    }
    MethodStats ms;
    ms.method = method;
    ms.accuracy_mean = plain_mean(accs);
    ms.accuracy_sd = sample_sd(accs, ms.accuracy_mean);
    ms.cross_entropy_mean = plain_mean(ces);
    ms.cross_entropy_sd = sample_sd(ces, ms.cross_entropy_mean);
    stats[method] = ms;
  }
  const MethodStats& base = stats.at(Method::base);
  for (auto& [method, ms] : stats) {
    ms.delta_accuracy = ms.accuracy_mean - base.accuracy_mean;
    ms.delta_cross_entropy = ms.cross_entropy_mean - base.cross_entropy_mean;
    out.methods.push_back(ms);
  }
  return out;
}

// ------------------------------ serialization ------------------------------

std::string report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["accuracy"] = r.accuracy;
  j["mean_cross_entropy"] = r.mean_cross_entropy;
  j["method"] = method_name(r.method);
  j["num_examples"] = r.num_examples;
  j["seed"] = r.seed;
  j["test_set_id"] = r.test_set_id;
  j["train_set_id"] = r.train_set_id;
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& rec : r.per_example) {
    nlohmann::json e;
    e["annotation"] = rec.annotation;
    e["cross_entropy"] = rec.cross_entropy;
    e["example_id"] = rec.example_id;
    e["gold"] = rec.gold;
    e["predicted"] = rec.predicted;
    recs.push_back(std::move(e));
  }
  j["per_example"] = std::move(recs);
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text, const std::string& source_name) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    EvalReport r;
    r.accuracy = j.at("accuracy").get<double>();
    r.mean_cross_entropy = j.at("mean_cross_entropy").get<double>();
    r.method = method_from_string(j.at("method").get<std::string>());
    r.num_examples = j.at("num_examples").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.test_set_id = j.at("test_set_id").get<std::string>();
    r.train_set_id = j.at("train_set_id").get<std::string>();
    for (const auto& e : j.at("per_example")) {
      PerExampleRecord rec;
      rec.annotation = e.at("annotation").get<std::vector<double>>();
      rec.cross_entropy = e.at("cross_entropy").get<double>();
      rec.example_id = e.at("example_id").get<std::string>();
      rec.gold = e.at("gold").get<std::size_t>();
      rec.predicted = e.at("predicted").get<std::vector<double>>();
      r.per_example.push_back(std::move(rec));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source_name + ": " + e.what());
  }
}

void save_report(const std::filesystem::path& path, const EvalReport& r) {
  write_file_atomic(path, report_to_json(r));
}

EvalReport load_report(const std::filesystem::path& path) {
  return report_from_json(read_file(path), path.string());
}

std::string summary_to_json(const ComparisonSummary& s) {
  nlohmann::json j;
  j["cross_dataset"] = s.cross_dataset;
  j["seeds"] = s.seeds;
  j["single_seed"] = s.single_seed;
  j["test_set_id"] = s.test_set_id;
  j["train_set_id"] = s.train_set_id;
  nlohmann::json ms = nlohmann::json::array();
  for (const auto& m : s.methods) {
    nlohmann::json e;
    e["accuracy_mean"] = m.accuracy_mean;
    e["accuracy_sd"] = m.accuracy_sd;
    e["cross_entropy_mean"] = m.cross_entropy_mean;
    e["cross_entropy_sd"] = m.cross_entropy_sd;
    e["delta_accuracy"] = m.delta_accuracy;
    e["delta_cross_entropy"] = m.delta_cross_entropy;
    e["method"] = method_name(m.method);
    ms.push_back(std::move(e));
  }
  j["methods"] = std::move(ms);
  return j.dump(2) + "\n";
}

namespace {

std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%+.*f", precision, v);
  return buf;
}

std::string fixed_unsigned(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

}  // namespace

std::string summary_table_text(const ComparisonSummary& s) {
  std::string out;
  const std::string dataset =
      s.cross_dataset ? s.train_set_id + " -> " + s.test_set_id : s.test_set_id;
  out += "Accuracy over seeds {";
  for (std::size_t i = 0; i < s.seeds.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s.seeds[i]);
  }
  out += "}";
  if (s.single_seed) out += " (single seed; SD degenerate)";
  out += "\n";

  char line[160];
  std::snprintf(line, sizeof(line), "%-24s %-6s %8s %8s %8s\n", "Dataset", "Method", "Acc",
                "SD", "Delta");
  out += line;
  for (const auto& m : s.methods) {
    std::snprintf(line, sizeof(line), "%-24s %-6s %8s %8s %8s\n", dataset.c_str(),
                  method_name(m.method).c_str(), fixed_unsigned(m.accuracy_mean, 4).c_str(),
                  fixed_unsigned(m.accuracy_sd, 4).c_str(),
                  m.method == Method::base ? "-" : fixed(m.delta_accuracy, 4).c_str());
    out += line;
  }

  out += "\nCross-entropy vs annotation distributions (nats)\n";
  std::snprintf(line, sizeof(line), "%-24s %-6s %8s %8s\n", "Dataset", "Method", "CE",
                "Delta");
  out += line;
  for (const auto& m : s.methods) {
    std::snprintf(line, sizeof(line), "%-24s %-6s %8s %8s\n", dataset.c_str(),
                  method_name(m.method).c_str(),
                  fixed_unsigned(m.cross_entropy_mean, 4).c_str(),
                  m.method == Method::base ? "-" : fixed(m.delta_cross_entropy, 4).c_str());
    out += line;
  }
  return out;
}

std::string report_to_csv(const EvalReport& r) {
  if (r.per_example.empty()) {
    throw DataError("report_to_csv: no per-example records");
  }
  const std::size_t num_classes = r.per_example.front().predicted.size();
  std::string out = "example_id,gold,predicted_class,correct,cross_entropy";
  for (std::size_t c = 0; c < num_classes; ++c) {
    out += ",pred_" + std::to_string(c);
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    out += ",annot_" + std::to_string(c);
  }
  out += "\n";
  for (const auto& rec : r.per_example) {
    const std::size_t pred_class = argmax_class(rec.predicted);
    out += rec.example_id;
    out += "," + std::to_string(rec.gold);
    out += "," + std::to_string(pred_class);
    out += rec.gold == pred_class ? ",1" : ",0";
    out += "," + format_double(rec.cross_entropy);
    for (const double v : rec.predicted) {
      out += "," + format_double(v);
    }
    for (const double v : rec.annotation) {
      out += "," + format_double(v);
    }
    out += "\n";
  }
  return out;
}

}  // namespace swag
