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

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "swag/errors.hpp"

namespace swag {

// Probability vector over C classes. Entries in [0,1], summing to 1 within
// 1e-9. Produced by softmax outputs, annotation normalization, and ensemble
// averaging.
struct PredictionDistribution {
  std::vector<double> probs;

  std::size_t num_classes() const { return probs.size(); }
};

inline constexpr double kDistributionSumTol = 1e-9;

inline bool is_valid_distribution(const std::vector<double>& p,
                                  double tol = kDistributionSumTol) {
  if (p.empty()) return false;
  double sum = 0.0;
  for (const double v : p) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0 + tol) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

inline void validate_distribution(const std::vector<double>& p, const std::string& context) {
  if (!is_valid_distribution(p)) {
    throw DataError(context + ": not a valid probability distribution");
  }
}

// Index of the largest entry; ties resolve to the lowest class index.
inline std::size_t argmax_class(const std::vector<double>& p) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.size(); ++c) {
    if (p[c] > p[best]) best = c;
  }
  return best;
}

// Shannon entropy in nats, with 0 * ln 0 taken as 0.
inline double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (const double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace swag
