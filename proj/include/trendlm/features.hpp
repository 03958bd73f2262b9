/*
 * Copyright 2026 The trendlm authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trendlm/querylog.hpp"

namespace trendlm::features {

struct FeatureParams {
  // Surprising but deliberate: log(0) is *defined as* the value 1e-6, not
  // as log(1e-6). Everything downstream assumes this convention.
  double log_zero = 1e-6;
  double clip_max = 1e3;
};

/// log(x) for x > 0; params.log_zero for x == 0; rejects negatives.
double safe_log(double x, const FeatureParams& params = {});

/// min(x, clip_max). +inf clips to clip_max; NaN (a 0/0 division artifact)
/// maps to 0 since such cells carry no signal.
double clip_feature(double x, const FeatureParams& params = {});

/// One of the seven time-series feature definitions, evaluated for an
/// entity at window i (per-window features need i >= 1, window-pair
/// features need i >= 2). Absent counts read as 0; clipping is applied
/// last.
double feature_value(int m, const querylog::FrequencyTable& table, int window,
                     EntityId entity, const FeatureParams& params = {});

/// Column layout for n-1 feature windows: F1@1..F1@(n-1), then for each
/// i in 2..n-1 the pair features F2@i..F7@i.
std::vector<std::string> feature_column_names(int n);

/// Dense per-entity feature matrix over candidate_set(table, n), rows in
/// lexicographic entity order.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<EntityId> entities,
                std::vector<std::string> column_names,
                std::vector<double> values,
                std::shared_ptr<const EntityPool> pool);

  std::size_t rows() const { return entities_.size(); }
  std::size_t cols() const { return column_names_.size(); }
  double at(std::size_t r, std::size_t c) const {
    return values_[r * cols() + c];
  }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols(), cols()};
  }
  const std::vector<double>& values() const { return values_; }
  const std::vector<EntityId>& entities() const { return entities_; }
  const std::vector<std::string>& column_names() const { return column_names_; }
  const EntityPool& pool() const { return *pool_; }
  std::shared_ptr<const EntityPool> pool_ptr() const { return pool_; }

  bool has_labels() const { return !labels_.empty(); }
  const std::vector<std::uint8_t>& labels() const { return labels_; }
  void set_labels(std::vector<std::uint8_t> labels);
  std::size_t positives() const;

 private:
  std::vector<EntityId> entities_;
  std::vector<std::string> column_names_;
  std::vector<double> values_;  // row-major
  std::vector<std::uint8_t> labels_;
  std::shared_ptr<const EntityPool> pool_;
};

FeatureMatrix build_feature_matrix(const querylog::FrequencyTable& table,
                                   int n, const FeatureParams& params = {});

/// Same, with trend labels for target window n at factor c.
FeatureMatrix build_labeled_feature_matrix(const querylog::FrequencyTable& table,
                                           int n, double c,
                                           const FeatureParams& params = {});

/// Keeps only the columns of one feature family (F<family>@*).
FeatureMatrix select_feature_family(const FeatureMatrix& matrix, int family);

// CSV with header entity,<column names...>[,label].
void write_feature_matrix_csv(std::ostream& os, const FeatureMatrix& matrix);
FeatureMatrix read_feature_matrix_csv(std::istream& is);

}  // namespace trendlm::features
