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
#include <deque>
#include <filesystem>
#include <string>
#include <vector>

namespace swag {

// One flat parameter vector captured during training. Construction rejects
// non-finite values, so downstream code can assume finiteness.
class ParamSnapshot {
 public:
  explicit ParamSnapshot(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

// Which running mean centers a deviation column. The default centers on the
// prefix mean that includes the current snapshot; the exclusive variant is a
// comparison switch and centers on the mean of the preceding snapshots (zero
// vector before the first snapshot).
enum class DeviationCenter : std::uint32_t {
  include_current = 0,
  exclude_current = 1,
};

// Finalized Gaussian posterior factors: mean, diagonal variance, and the
// retained deviation columns. Immutable once constructed; safe to share
// across threads.
class PosteriorApprox {
 public:
  PosteriorApprox(std::vector<double> mean, std::vector<double> diag_var,
                  std::vector<std::vector<double>> deviation_columns,
                  std::size_t snapshot_count);

  std::size_t dim() const { return mean_.size(); }
  std::size_t rank() const { return deviation_columns_.size(); }
  std::size_t snapshot_count() const { return snapshot_count_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& diag_var() const { return diag_var_; }
  const std::vector<std::vector<double>>& deviation_columns() const {
    return deviation_columns_;
  }

 private:
  std::vector<double> mean_;
  std::vector<double> diag_var_;
  std::vector<std::vector<double>> deviation_columns_;  // oldest -> newest
  std::size_t snapshot_count_;
};

// Accumulates parameter snapshots into running first and second moments plus
// a ring buffer of the most recent deviation columns. Single writer; updates
// must be externally serialized.
class SwagCollector {
 public:
  SwagCollector(std::size_t dim, std::size_t rank_cap,
                DeviationCenter center = DeviationCenter::include_current);

  // Absorbs one snapshot: count -> i, mean and second moment advance to the
  // prefix averages over the first i snapshots, and the deviation column
  // snapshot - running_mean is appended (oldest column evicted beyond
  // rank_cap).
  void update(const ParamSnapshot& snap);

  // Clamps diag variance at zero and freezes the factors. The collector
  // refuses further updates afterwards. Requires count >= 2.
  PosteriorApprox finalize();

  std::size_t dim() const { return dim_; }
  std::size_t count() const { return count_; }
  std::size_t rank_cap() const { return rank_cap_; }
  DeviationCenter center() const { return center_; }
  bool finalized() const { return finalized_; }
  const std::vector<double>& running_mean() const { return running_mean_; }
  const std::vector<double>& running_sq_mean() const { return running_sq_mean_; }
  const std::deque<std::vector<double>>& deviations() const { return deviations_; }

  // Rebuilds a collector from checkpointed state (validates shapes).
  static SwagCollector restore(std::size_t dim, std::size_t rank_cap, DeviationCenter center,
                               std::size_t count, std::vector<double> running_mean,
                               std::vector<double> running_sq_mean,
                               std::deque<std::vector<double>> deviations);

 private:
  std::size_t dim_;
  std::size_t rank_cap_;
  DeviationCenter center_;
  std::size_t count_ = 0;
  bool finalized_ = false;
  std::vector<double> running_mean_;
  std::vector<double> running_sq_mean_;
  std::deque<std::vector<double>> deviations_;  // oldest -> newest
};

// Small dense matrix for diagnostics; row-major.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// (1/2) * (diag(diag_var) + D D^T / (rank - 1)). Diagnostic/test use for
// small dim only; requires rank >= 2.
DenseMatrix covariance_dense(const PosteriorApprox& p);

// ---------------------------------------------------------------------------
// Trajectory and checkpoint files (binary, little-endian).
//
// Trajectory (.swgt): "SWGT" | version u32 | dim u64 | count u64 |
//                     count x dim f64 snapshot records.
// Collector checkpoint (.swgc): "SWGC" | version u32 | dim u64 | count u64 |
//                     rank_cap u64 | dev_count u64 | center u32 |
//                     running_mean dim f64 | running_sq_mean dim f64 |
//                     dev_count x dim f64 deviation columns (oldest first).
// An optional JSON sidecar (<file>.json) carries run metadata.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kTrajectoryFormatVersion = 1;

void save_trajectory(const std::filesystem::path& path,
                     const std::vector<ParamSnapshot>& snapshots);
std::vector<ParamSnapshot> load_trajectory(const std::filesystem::path& path);

void save_collector(const std::filesystem::path& path, const SwagCollector& collector);
SwagCollector load_collector(const std::filesystem::path& path);

struct TrajectoryMeta {
  std::string experiment_id;
  std::vector<std::int64_t> epoch_indices;
};

void save_trajectory_meta(const std::filesystem::path& trajectory_path,
                          const TrajectoryMeta& meta);
TrajectoryMeta load_trajectory_meta(const std::filesystem::path& trajectory_path);

}  // namespace swag
