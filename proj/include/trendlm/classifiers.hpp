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
#include <span>
#include <string>
#include <vector>

#include "trendlm/features.hpp"

namespace trendlm::classifiers {

struct TrainConfig {
  int adaboost_rounds = 50;
  double adam_alpha = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 256;
  double convergence_rel_tol = 1e-5;
  int max_epochs = 500;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Depth-1 decision tree: sign(polarity) if x[feature] > threshold else
/// the opposite sign.
struct Stump {
  int feature = 0;
  double threshold = 0;
  int polarity = 1;  // +1 or -1
  double weight = 0;  // ensemble round weight

  int predict(std::span<const double> row) const {
    return row[static_cast<std::size_t>(feature)] > threshold ? polarity
                                                              : -polarity;
  }
};

class AdaBoostModel {
 public:
  AdaBoostModel() = default;
  AdaBoostModel(std::vector<Stump> stumps, std::vector<double> round_errors,
                std::vector<std::string> columns);

  const std::vector<Stump>& stumps() const { return stumps_; }
  const std::vector<double>& round_errors() const { return round_errors_; }
  const std::vector<std::string>& columns() const { return columns_; }

  /// Signed ensemble margin per row; higher means more likely positive.
  std::vector<double> score(const features::FeatureMatrix& matrix) const;
  double score_row(std::span<const double> row) const;

  std::string serialize() const;
  static AdaBoostModel deserialize(const std::string& json_text);

 private:
  std::vector<Stump> stumps_;
  std::vector<double> round_errors_;
  std::vector<std::string> columns_;
};

/// Result of one round of exhaustive stump search; exposed so the search
/// can be verified against an independent scan.
struct StumpSearchResult {
  Stump stump;
  double weighted_error = 0;
};

/// Best stump over all (feature, midpoint threshold, polarity) candidates
/// under the given nonnegative sample weights (labels are 0/1).
StumpSearchResult best_stump(const features::FeatureMatrix& matrix,
                             std::span<const double> sample_weights);

AdaBoostModel train_adaboost(const features::FeatureMatrix& matrix,
                             const TrainConfig& cfg);

/// Feed-forward net: input -> 128 ReLU -> 128 ReLU -> 1 logistic, with
/// per-column z-score normalization folded into the model.
class MLPModel {
 public:
  static constexpr int kHidden = 128;

  MLPModel() = default;

  int input_dim() const { return input_dim_; }
  std::vector<double> score(const features::FeatureMatrix& matrix) const;
  double score_row(std::span<const double> row) const;

  std::string serialize() const;
  static MLPModel deserialize(const std::string& json_text);

  const std::vector<std::string>& columns() const { return columns_; }

  // Parameters are public to the module's trainer and to gradient checks.
  // Weight matrices are row-major [input][output].
  std::vector<double> w1, b1;  // input_dim x kHidden, kHidden
  std::vector<double> w2, b2;  // kHidden x kHidden, kHidden
  std::vector<double> w3;      // kHidden
  double b3 = 0;
  std::vector<double> mean, stddev;  // per input column
  std::vector<std::string> columns_;
  int input_dim_ = 0;
};

/// Glorot-uniform initialized network with identity normalization.
MLPModel make_mlp(int input_dim, std::uint64_t seed);

struct MLPGradients {
  std::vector<double> w1, b1, w2, b2, w3;
  double b3 = 0;
};

/// Mean binary cross-entropy over the batch and, when `grads` is non-null,
/// its exact gradient. `inputs` must already be normalized, row-major
/// rows x input_dim.
double mlp_loss_and_gradients(const MLPModel& model,
                              std::span<const double> inputs,
                              std::span<const std::uint8_t> labels,
                              std::size_t rows, MLPGradients* grads);

MLPModel train_mlp(const features::FeatureMatrix& matrix,
                   const TrainConfig& cfg);

}  // namespace trendlm::classifiers
