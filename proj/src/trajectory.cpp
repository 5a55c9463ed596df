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

#include "swag/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "swag/errors.hpp"
#include "swag/io_util.hpp"

namespace swag {

namespace {

void check_finite(const std::vector<double>& values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError(std::string(what) + ": non-finite value at index " +
                         std::to_string(i));
    }
  }
}

}  // namespace

ParamSnapshot::ParamSnapshot(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw ConfigError("ParamSnapshot: empty parameter vector");
  }
  check_finite(values_, "ParamSnapshot");
}

PosteriorApprox::PosteriorApprox(std::vector<double> mean, std::vector<double> diag_var,
                                 std::vector<std::vector<double>> deviation_columns,
                                 std::size_t snapshot_count)
    : mean_(std::move(mean)),
      diag_var_(std::move(diag_var)),
      deviation_columns_(std::move(deviation_columns)),
      snapshot_count_(snapshot_count) {
  if (mean_.empty()) {
    throw ConfigError("PosteriorApprox: empty mean");
  }
  if (diag_var_.size() != mean_.size()) {
    throw ConfigError("PosteriorApprox: diag_var length does not match mean length");
  }
  for (const double v : diag_var_) {
    if (!(v >= 0.0)) {
      throw ConfigError("PosteriorApprox: diag_var entries must be >= 0");
    }
  }
  for (const auto& col : deviation_columns_) {
    if (col.size() != mean_.size()) {
      throw ConfigError("PosteriorApprox: deviation column length does not match dim");
    }
  }
  if (deviation_columns_.size() > snapshot_count_) {
    throw ConfigError("PosteriorApprox: rank exceeds snapshot count");
  }
  check_finite(mean_, "PosteriorApprox mean");
  check_finite(diag_var_, "PosteriorApprox diag_var");
}

SwagCollector::SwagCollector(std::size_t dim, std::size_t rank_cap, DeviationCenter center)
    : dim_(dim), rank_cap_(rank_cap), center_(center) {
  if (dim_ < 1) {
    throw ConfigError("SwagCollector: dim must be >= 1");
  }
  if (rank_cap_ < 2) {
    // The low-rank factor divides by rank - 1.
    throw ConfigError("SwagCollector: rank_cap must be >= 2");
  }
  running_mean_.assign(dim_, 0.0);
  running_sq_mean_.assign(dim_, 0.0);
}

void SwagCollector::update(const ParamSnapshot& snap) {
  if (finalized_) {
    throw ConfigError("SwagCollector: update after finalize");
  }
  if (snap.dim() != dim_) {
    throw ConfigError("SwagCollector: snapshot dim " + std::to_string(snap.dim()) +
                      " does not match collector dim " + std::to_string(dim_));
  }
  const std::vector<double>& x = snap.values();

  std::vector<double> deviation(dim_);
  if (center_ == DeviationCenter::exclude_current) {
    for (std::size_t j = 0; j < dim_; ++j) {
      deviation[j] = x[j] - running_mean_[j];
    }
  }

  // Incremental prefix means: m += (x - m)/i. Algebraically ((i-1)m + x)/i,
  // and exactly stationary on constant trajectories.
  count_ += 1;
  const double inv_i = 1.0 / static_cast<double>(count_);
  for (std::size_t j = 0; j < dim_; ++j) {
    running_mean_[j] += (x[j] - running_mean_[j]) * inv_i;
    running_sq_mean_[j] += (x[j] * x[j] - running_sq_mean_[j]) * inv_i;
  }

  if (center_ == DeviationCenter::include_current) {
    for (std::size_t j = 0; j < dim_; ++j) {
      deviation[j] = x[j] - running_mean_[j];
    }
  }

  deviations_.push_back(std::move(deviation));
  if (deviations_.size() > rank_cap_) {
    deviations_.pop_front();
  }
}

PosteriorApprox SwagCollector::finalize() {
  if (finalized_) {
    throw ConfigError("SwagCollector: finalize called twice");
  }
  if (count_ < 2) {
    throw DataError("SwagCollector: need at least 2 snapshots to finalize, have " +
                    std::to_string(count_));
  }
  std::vector<double> diag_var(dim_);
  for (std::size_t j = 0; j < dim_; ++j) {
    // Second uncentered moment minus squared mean; floating-point
    // cancellation can leave tiny negatives, which are clamped.
    diag_var[j] = std::max(0.0, running_sq_mean_[j] - running_mean_[j] * running_mean_[j]);
  }
  std::vector<std::vector<double>> columns(deviations_.begin(), deviations_.end());
  finalized_ = true;
  return PosteriorApprox(running_mean_, std::move(diag_var), std::move(columns), count_);
}

SwagCollector SwagCollector::restore(std::size_t dim, std::size_t rank_cap,
                                     DeviationCenter center, std::size_t count,
                                     std::vector<double> running_mean,
                                     std::vector<double> running_sq_mean,
                                     std::deque<std::vector<double>> deviations) {
  SwagCollector c(dim, rank_cap, center);
  if (running_mean.size() != dim || running_sq_mean.size() != dim) {
    throw DataError("SwagCollector::restore: moment vector length mismatch");
  }
  if (deviations.size() != std::min(count, rank_cap)) {
    throw DataError("SwagCollector::restore: expected " +
                    std::to_string(std::min(count, rank_cap)) + " deviation columns, got " +
                    std::to_string(deviations.size()));
  }
  for (const auto& col : deviations) {
    if (col.size() != dim) {
      throw DataError("SwagCollector::restore: deviation column length mismatch");
    }
    check_finite(col, "SwagCollector::restore deviation");
  }
  check_finite(running_mean, "SwagCollector::restore running_mean");
  check_finite(running_sq_mean, "SwagCollector::restore running_sq_mean");
  c.count_ = count;
  c.running_mean_ = std::move(running_mean);
  c.running_sq_mean_ = std::move(running_sq_mean);
  c.deviations_ = std::move(deviations);
  return c;
}

DenseMatrix covariance_dense(const PosteriorApprox& p) {
  const std::size_t dim = p.dim();
  const std::size_t rank = p.rank();
  if (rank < 2) {
    throw ConfigError("covariance_dense: rank must be >= 2 (divides by rank - 1)");
  }
  DenseMatrix m;
  m.rows = dim;
  m.cols = dim;
  m.data.assign(dim * dim, 0.0);
  const double low_rank_scale = 1.0 / static_cast<double>(rank - 1);
  for (const auto& col : p.deviation_columns()) {
    for (std::size_t r = 0; r < dim; ++r) {
      const double cr = col[r] * low_rank_scale;
      for (std::size_t c = 0; c < dim; ++c) {
        m.at(r, c) += cr * col[c];
      }
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    m.at(j, j) += p.diag_var()[j];
  }
  for (double& v : m.data) {
    v *= 0.5;
  }
  return m;
}

// --------------------------- file formats ----------------------------------

namespace {

constexpr std::string_view kTrajectoryMagic = "SWGT";
constexpr std::string_view kCollectorMagic = "SWGC";

void append_vector(std::string& out, const std::vector<double>& v) {
  for (const double x : v) {
    put_f64le(out, x);
  }
}

std::vector<double> read_vector(ByteReader& r, std::size_t dim) {
  std::vector<double> v(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    v[j] = r.f64();
  }
  return v;
}

}  // namespace

void save_trajectory(const std::filesystem::path& path,
                     const std::vector<ParamSnapshot>& snapshots) {
  if (snapshots.empty()) {
    throw ConfigError("save_trajectory: no snapshots");
  }
  const std::size_t dim = snapshots.front().dim();
  for (const auto& s : snapshots) {
    if (s.dim() != dim) {
      throw ConfigError("save_trajectory: inconsistent snapshot dims");
    }
  }
  std::string out;
  out.reserve(24 + snapshots.size() * dim * 8);
  out += kTrajectoryMagic;
  put_u32le(out, kTrajectoryFormatVersion);
  put_u64le(out, dim);
  put_u64le(out, snapshots.size());
  for (const auto& s : snapshots) {
    append_vector(out, s.values());
  }
  write_file_atomic(path, out);
}

std::vector<ParamSnapshot> load_trajectory(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  ByteReader r(bytes, path.string());
  r.magic(kTrajectoryMagic);
  const std::uint32_t version = r.u32();
  if (version != kTrajectoryFormatVersion) {
    throw DataError(path.string() + ": unsupported trajectory format version " +
                    std::to_string(version));
  }
  const std::uint64_t dim = r.u64();
  const std::uint64_t count = r.u64();
  if (dim == 0) {
    throw DataError(path.string() + ": zero dim");
  }
  std::vector<ParamSnapshot> snapshots;
  snapshots.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    snapshots.emplace_back(read_vector(r, dim));
  }
  r.expect_end();
  return snapshots;
}

void save_collector(const std::filesystem::path& path, const SwagCollector& collector) {
  std::string out;
  const std::size_t dim = collector.dim();
  out.reserve(48 + (2 + collector.deviations().size()) * dim * 8);
  out += kCollectorMagic;
  put_u32le(out, kTrajectoryFormatVersion);
  put_u64le(out, dim);
  put_u64le(out, collector.count());
  put_u64le(out, collector.rank_cap());
  put_u64le(out, collector.deviations().size());
  put_u32le(out, static_cast<std::uint32_t>(collector.center()));
  append_vector(out, collector.running_mean());
  append_vector(out, collector.running_sq_mean());
  for (const auto& col : collector.deviations()) {
    append_vector(out, col);
  }
  write_file_atomic(path, out);
}

SwagCollector load_collector(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  ByteReader r(bytes, path.string());
  r.magic(kCollectorMagic);
  const std::uint32_t version = r.u32();
  if (version != kTrajectoryFormatVersion) {
    throw DataError(path.string() + ": unsupported checkpoint format version " +
                    std::to_string(version));
  }
  const std::uint64_t dim = r.u64();
  const std::uint64_t count = r.u64();
  const std::uint64_t rank_cap = r.u64();
  const std::uint64_t dev_count = r.u64();
  const std::uint32_t center_raw = r.u32();
  if (center_raw > 1) {
    throw DataError(path.string() + ": unknown deviation center " + std::to_string(center_raw));
  }
  if (dev_count != std::min<std::uint64_t>(count, rank_cap)) {
    throw DataError(path.string() + ": inconsistent deviation column count");
  }
  std::vector<double> mean = read_vector(r, dim);
  std::vector<double> sq_mean = read_vector(r, dim);
  std::deque<std::vector<double>> deviations;
  for (std::uint64_t i = 0; i < dev_count; ++i) {
    deviations.push_back(read_vector(r, dim));
  }
  r.expect_end();
  return SwagCollector::restore(dim, rank_cap, static_cast<DeviationCenter>(center_raw), count,
                                std::move(mean), std::move(sq_mean), std::move(deviations));
}

void save_trajectory_meta(const std::filesystem::path& trajectory_path,
                          const TrajectoryMeta& meta) {
  nlohmann::json j;
  j["experiment_id"] = meta.experiment_id;
  j["epoch_indices"] = meta.epoch_indices;
  write_file_atomic(trajectory_path.string() + ".json", j.dump(2) + "\n");
}

TrajectoryMeta load_trajectory_meta(const std::filesystem::path& trajectory_path) {
  const std::string bytes = read_file(trajectory_path.string() + ".json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(trajectory_path.string() + ".json: " + e.what());
  }
  TrajectoryMeta meta;
  meta.experiment_id = j.at("experiment_id").get<std::string>();
  meta.epoch_indices = j.at("epoch_indices").get<std::vector<std::int64_t>>();
  return meta;
}

}  // namespace swag
