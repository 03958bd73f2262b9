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

#include "trendlm/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace trendlm::features {
namespace {

double relative_frequency(const querylog::FrequencyTable& table, int window,
                          EntityId entity) {
  const double total = static_cast<double>(table.window_total(window));
  if (total <= 0) return 0.0;
  return static_cast<double>(table.count(window, entity)) / total;
}

}  // namespace

double safe_log(double x, const FeatureParams& params) {
  if (x < 0 || std::isnan(x)) {
    throw std::invalid_argument("safe_log requires x >= 0");
  }
  return x == 0 ? params.log_zero : std::log(x);
}

double clip_feature(double x, const FeatureParams& params) {
  if (std::isnan(x)) return 0.0;
  return std::min(x, params.clip_max);
}

double feature_value(int m, const querylog::FrequencyTable& table, int window,
                     EntityId entity, const FeatureParams& params) {
  const int n_windows = table.config().n_windows;
  if (m < 1 || m > 7) throw std::invalid_argument("feature index outside 1..7");
  if (window < 1 || window > n_windows || (m >= 2 && window < 2)) {
    throw std::out_of_range("window index invalid for this feature");
  }

  const auto f_now = static_cast<double>(table.count(window, entity));
  double value = 0;
  switch (m) {
    case 1:
      value = relative_frequency(table, window, entity);
      break;
    case 2:
      value = relative_frequency(table, window, entity) -
              relative_frequency(table, window - 1, entity);
      break;
    case 3:
      value = safe_log(relative_frequency(table, window, entity), params) -
              safe_log(relative_frequency(table, window - 1, entity), params);
      break;
    case 4: {
      const auto f_prev = static_cast<double>(table.count(window - 1, entity));
      value = (f_now - f_prev) / f_prev;
      break;
    }
    case 5: {
      const auto f_prev = static_cast<double>(table.count(window - 1, entity));
      value = (safe_log(f_now, params) - safe_log(f_prev, params)) /
              safe_log(f_prev, params);
      break;
    }
    case 6:
      value = relative_frequency(table, window, entity) *
              (1.0 - relative_frequency(table, window - 1, entity));
      break;
    case 7: {
      const auto f_prev = static_cast<double>(table.count(window - 1, entity));
      value = f_now / f_prev;
      break;
    }
  }
  return clip_feature(value, params);
}

std::vector<std::string> feature_column_names(int n) {
  if (n < 2) throw std::invalid_argument("need n >= 2");
  std::vector<std::string> names;
  for (int i = 1; i < n; ++i) names.push_back("F1@" + std::to_string(i));
  for (int i = 2; i < n; ++i) {
    for (int m = 2; m <= 7; ++m) {
      names.push_back("F" + std::to_string(m) + "@" + std::to_string(i));
    }
  }
  return names;
}

FeatureMatrix::FeatureMatrix(std::vector<EntityId> entities,
                             std::vector<std::string> column_names,
                             std::vector<double> values,
                             std::shared_ptr<const EntityPool> pool)
    : entities_(std::move(entities)),
      column_names_(std::move(column_names)),
      values_(std::move(values)),
      pool_(std::move(pool)) {
  if (values_.size() != entities_.size() * column_names_.size()) {
    throw std::invalid_argument("value buffer does not match matrix shape");
  }
}

void FeatureMatrix::set_labels(std::vector<std::uint8_t> labels) {
  if (labels.size() != entities_.size()) {
    throw std::invalid_argument("label count does not match row count");
  }
  labels_ = std::move(labels);
}

std::size_t FeatureMatrix::positives() const {
  std::size_t n = 0;
  for (std::uint8_t label : labels_) n += label != 0;
  return n;
}

FeatureMatrix build_feature_matrix(const querylog::FrequencyTable& table,
                                   int n, const FeatureParams& params) {
  const std::vector<EntityId> entities = querylog::candidate_set(table, n);
  const std::vector<std::string> names = feature_column_names(n);
  std::vector<double> values;
  values.reserve(entities.size() * names.size());
  for (EntityId e : entities) {
    for (int i = 1; i < n; ++i) {
      values.push_back(feature_value(1, table, i, e, params));
    }
    for (int i = 2; i < n; ++i) {
      for (int m = 2; m <= 7; ++m) {
        values.push_back(feature_value(m, table, i, e, params));
      }
    }
  }
  return FeatureMatrix(entities, names, std::move(values), table.pool_ptr());
}

FeatureMatrix build_labeled_feature_matrix(const querylog::FrequencyTable& table,
                                           int n, double c,
                                           const FeatureParams& params) {
  FeatureMatrix matrix = build_feature_matrix(table, n, params);
  const auto labels = querylog::label_trending(table, n, c);
  std::vector<std::uint8_t> row_labels;
  row_labels.reserve(matrix.rows());
  for (EntityId e : matrix.entities()) {
    row_labels.push_back(labels.at(e) ? 1 : 0);
  }
  matrix.set_labels(std::move(row_labels));
  return matrix;
}

FeatureMatrix select_feature_family(const FeatureMatrix& matrix, int family) {
  if (family < 1 || family > 7) {
    throw std::invalid_argument("feature family outside 1..7");
  }
  const std::string prefix = "F" + std::to_string(family) + "@";
  std::vector<std::size_t> keep;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    if (matrix.column_names()[c].rfind(prefix, 0) == 0) {
      keep.push_back(c);
      names.push_back(matrix.column_names()[c]);
    }
  }
  if (keep.empty()) throw std::invalid_argument("family has no columns");
  std::vector<double> values;
  values.reserve(matrix.rows() * keep.size());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c : keep) values.push_back(matrix.at(r, c));
  }
  FeatureMatrix out(matrix.entities(), std::move(names), std::move(values),
                    matrix.pool_ptr());
  if (matrix.has_labels()) out.set_labels(matrix.labels());
  return out;
}

void write_feature_matrix_csv(std::ostream& os, const FeatureMatrix& matrix) {
  os << "entity";
  for (const std::string& name : matrix.column_names()) os << ',' << name;
  if (matrix.has_labels()) os << ",label";
  os << '\n';
  char buf[32];
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    os << matrix.pool().name(matrix.entities()[r]);
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", matrix.at(r, c));
      os << ',' << buf;
    }
    if (matrix.has_labels()) os << ',' << int(matrix.labels()[r]);
    os << '\n';
  }
}

FeatureMatrix read_feature_matrix_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty feature CSV");
  std::vector<std::string> header;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t comma = line.find(',', pos);
    header.push_back(line.substr(pos, comma == std::string::npos
                                          ? std::string::npos
                                          : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (header.empty() || header[0] != "entity") {
    throw std::runtime_error("bad feature CSV header");
  }
  const bool has_labels = header.back() == "label";
  std::vector<std::string> names(header.begin() + 1,
                                 header.end() - (has_labels ? 1 : 0));

  auto pool = std::make_shared<EntityPool>();
  std::vector<EntityId> entities;
  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      fields.push_back(line.substr(pos, comma == std::string::npos
                                            ? std::string::npos
                                            : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (fields.size() != header.size()) {
      throw std::runtime_error("bad feature CSV row: " + line);
    }
    entities.push_back(pool->intern(fields[0]));
    for (std::size_t c = 0; c < names.size(); ++c) {
      values.push_back(std::stod(fields[1 + c]));
    }
    if (has_labels) {
      labels.push_back(fields.back() == "1" ? 1 : 0);
    }
  }
  FeatureMatrix out(std::move(entities), std::move(names), std::move(values),
                    std::move(pool));
  if (has_labels) out.set_labels(std::move(labels));
  return out;
}

}  // namespace trendlm::features
