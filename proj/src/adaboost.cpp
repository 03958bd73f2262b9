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

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "trendlm/classifiers.hpp"

namespace trendlm::classifiers {
namespace {

constexpr double kErrorFloor = 1e-12;

void require_both_classes(const features::FeatureMatrix& matrix) {
  if (!matrix.has_labels()) throw std::invalid_argument("matrix has no labels");
  const std::size_t pos = matrix.positives();
  if (pos == 0 || pos == matrix.rows()) {
    throw std::invalid_argument("training labels are degenerate");
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (adaboost_rounds < 1 || batch_size < 1 || max_epochs < 1) {
    throw std::invalid_argument("counts must be positive");
  }
  if (adam_alpha <= 0 || adam_eps <= 0 || convergence_rel_tol <= 0) {
    throw std::invalid_argument("rates must be positive");
  }
  if (adam_beta1 <= 0 || adam_beta1 >= 1 || adam_beta2 <= 0 || adam_beta2 >= 1) {
    throw std::invalid_argument("betas must lie in (0, 1)");
  }
}

AdaBoostModel::AdaBoostModel(std::vector<Stump> stumps,
                             std::vector<double> round_errors,
                             std::vector<std::string> columns)
    : stumps_(std::move(stumps)),
      round_errors_(std::move(round_errors)),
      columns_(std::move(columns)) {}

double AdaBoostModel::score_row(std::span<const double> row) const {
  double margin = 0;
  for (const Stump& s : stumps_) margin += s.weight * s.predict(row);
  return margin;
}

std::vector<double> AdaBoostModel::score(
    const features::FeatureMatrix& matrix) const {
  if (matrix.column_names() != columns_) {
    throw std::invalid_argument("feature columns do not match training layout");
  }
  std::vector<double> out(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out[r] = score_row(matrix.row(r));
  }
  return out;
}

StumpSearchResult best_stump(const features::FeatureMatrix& matrix,
                             std::span<const double> sample_weights) {
  const std::size_t rows = matrix.rows();
  if (sample_weights.size() != rows) {
    throw std::invalid_argument("weight count mismatch");
  }
  double weight_pos = 0, weight_total = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    weight_total += sample_weights[r];
    if (matrix.labels()[r]) weight_pos += sample_weights[r];
  }

  StumpSearchResult best;
  best.weighted_error = weight_total + 1;  // sentinel: worse than anything

  std::vector<std::size_t> order(rows);
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    for (std::size_t r = 0; r < rows; ++r) order[r] = r;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return matrix.at(a, c) < matrix.at(b, c);
    });

    // Scan thresholds at midpoints between distinct consecutive values.
    // With threshold t and polarity +1 the prediction is positive for
    // x > t, so the error is (positive weight below) + (negative weight
    // above).
    double pos_below = 0, neg_below = 0;
    std::size_t r = 0;
    while (r < rows) {
      const double value = matrix.at(order[r], c);
      while (r < rows && matrix.at(order[r], c) == value) {
        if (matrix.labels()[order[r]]) {
          pos_below += sample_weights[order[r]];
        } else {
          neg_below += sample_weights[order[r]];
        }
        ++r;
      }
      if (r == rows) break;  // no gap after the last distinct value
      const double threshold = value / 2 + matrix.at(order[r], c) / 2;
      const double err_plus = pos_below + (weight_total - weight_pos - neg_below);
      for (int polarity : {+1, -1}) {
        const double err = polarity == +1 ? err_plus : weight_total - err_plus;
        if (err < best.weighted_error) {
          best.stump = Stump{static_cast<int>(c), threshold, polarity, 0};
          best.weighted_error = err;
        }
      }
    }
  }
  if (best.weighted_error > weight_total) {
    throw std::runtime_error("no split candidates: all feature columns constant");
  }
  return best;
}

AdaBoostModel train_adaboost(const features::FeatureMatrix& matrix,
                             const TrainConfig& cfg) {
  cfg.validate();
  require_both_classes(matrix);
  const std::size_t rows = matrix.rows();

  std::vector<double> weights(rows, 1.0 / static_cast<double>(rows));
  std::vector<Stump> stumps;
  std::vector<double> round_errors;

  for (int round = 0; round < cfg.adaboost_rounds; ++round) {
    StumpSearchResult found = best_stump(matrix, weights);
    const double eps = found.weighted_error;
    if (eps >= 0.5) break;

    const double alpha =
        0.5 * std::log((1.0 - eps) / std::max(eps, kErrorFloor));
    found.stump.weight = alpha;
    stumps.push_back(found.stump);
    round_errors.push_back(eps);
    if (eps <= kErrorFloor) break;  // perfect split, nothing left to reweight

    double total = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      const int y = matrix.labels()[r] ? +1 : -1;
      const int h = found.stump.predict(matrix.row(r));
      weights[r] *= std::exp(-alpha * y * h);
      total += weights[r];
    }
    for (double& w : weights) w /= total;
  }
  return AdaBoostModel(std::move(stumps), std::move(round_errors),
                       matrix.column_names());
}

std::string AdaBoostModel::serialize() const {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["model"] = "adaboost";
  doc["columns"] = columns_;
  nlohmann::json stump_list = nlohmann::json::array();
  for (const Stump& s : stumps_) {
    stump_list.push_back({{"feature", s.feature},
                          {"threshold", s.threshold},
                          {"polarity", s.polarity},
                          {"weight", s.weight}});
  }
  doc["stumps"] = std::move(stump_list);
  doc["round_errors"] = round_errors_;
  return doc.dump(2);
}

AdaBoostModel AdaBoostModel::deserialize(const std::string& json_text) {
  const nlohmann::json doc = nlohmann::json::parse(json_text);
  if (doc.at("model") != "adaboost") {
    throw std::invalid_argument("not an adaboost model document");
  }
  std::vector<Stump> stumps;
  for (const auto& s : doc.at("stumps")) {
    stumps.push_back(Stump{s.at("feature").get<int>(),
                           s.at("threshold").get<double>(),
                           s.at("polarity").get<int>(),
                           s.at("weight").get<double>()});
  }
  return AdaBoostModel(std::move(stumps),
                       doc.at("round_errors").get<std::vector<double>>(),
                       doc.at("columns").get<std::vector<std::string>>());
}

}  // namespace trendlm::classifiers
