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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "trendlm/features.hpp"
#include "trendlm/random.hpp"

using namespace trendlm;
using namespace trendlm::features;
using trendlm::querylog::FrequencyTable;
using trendlm::querylog::WindowConfig;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

FrequencyTable table_from(
    const std::vector<std::vector<std::pair<std::string, std::int64_t>>>& spec,
    std::shared_ptr<EntityPool> pool = nullptr) {
  if (pool == nullptr) pool = std::make_shared<EntityPool>();
  std::vector<FrequencyTable::WindowCounts> counts(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    for (const auto& [name, c] : spec[i]) counts[i][pool->intern(name)] = c;
  }
  return FrequencyTable(WindowConfig{0, 100, static_cast<int>(spec.size())},
                        pool, std::move(counts));
}

FrequencyTable random_table(rng::Rng& r, int n_entities, int n_windows) {
  auto pool = std::make_shared<EntityPool>();
  std::vector<FrequencyTable::WindowCounts> counts(n_windows);
  for (int j = 0; j < n_entities; ++j) {
    const EntityId id = pool->intern("entity " + std::to_string(j));
    for (int i = 0; i < n_windows; ++i) {
      if (r.uniform01() < 0.3) continue;
      counts[i][id] = r.uniform_int(1, 50);
    }
  }
  return FrequencyTable(WindowConfig{0, 100, n_windows}, pool,
                        std::move(counts));
}

// Independent evaluation of the feature definitions, written without the
// library's helpers so matrix cells have a second derivation to agree with.
double oracle_cell(int m, const FrequencyTable& t, int i, EntityId e) {
  auto f = [&](int w) { return static_cast<double>(t.count(w, e)); };
  auto total = [&](int w) { return static_cast<double>(t.window_total(w)); };
  auto rel = [&](int w) { return total(w) > 0 ? f(w) / total(w) : 0.0; };
  auto slog = [](double x) { return x == 0 ? 1e-6 : std::log(x); };
  double v = 0;
  switch (m) {
    case 1: v = rel(i); break;
    case 2: v = rel(i) - rel(i - 1); break;
    case 3: v = slog(rel(i)) - slog(rel(i - 1)); break;
    case 4: v = (f(i) - f(i - 1)) / f(i - 1); break;
    case 5: v = (slog(f(i)) - slog(f(i - 1))) / slog(f(i - 1)); break;
    case 6: v = rel(i) * (1.0 - rel(i - 1)); break;
    case 7: v = f(i) / f(i - 1); break;
  }
  if (std::isnan(v)) return 0.0;
  return std::min(v, 1e3);
}

}  // namespace

TEST_CASE("safe_log handles the zero convention") {
  CHECK(safe_log(0) == doctest::Approx(1e-6));
  CHECK(safe_log(1) == doctest::Approx(0));
  CHECK(safe_log(std::exp(1.0)) == doctest::Approx(1));
  CHECK_THROWS_AS(safe_log(-0.5), std::invalid_argument);
}

TEST_CASE("clip_feature caps values and absorbs artifacts") {
  CHECK(clip_feature(5000) == doctest::Approx(1000));
  CHECK(clip_feature(0.4) == doctest::Approx(0.4));
  CHECK(clip_feature(kInf) == doctest::Approx(1000));
  CHECK(clip_feature(std::nan("")) == doctest::Approx(0));
  CHECK(clip_feature(-17.0) == doctest::Approx(-17.0));  // no lower clip
}

TEST_CASE("feature examples") {
  const FrequencyTable t =
      table_from({{{"a", 2}, {"b", 3}},            // window 1
                  {{"a", 6}, {"b", 3}, {"c", 5}}   // window 2
                 });
  const EntityId a = *t.pool().find("a");
  const EntityId c = *t.pool().find("c");
  CHECK(feature_value(1, t, 1, a) == doctest::Approx(0.4));
  CHECK(feature_value(7, t, 2, a) == doctest::Approx(3.0));
  // division by a zero previous count clips to the cap
  CHECK(feature_value(7, t, 2, c) == doctest::Approx(1000));
  // F6 with zero previous relative frequency = current relative frequency
  CHECK(feature_value(6, t, 2, c) == doctest::Approx(5.0 / 14.0));
}

TEST_CASE("feature_value validates indices") {
  const FrequencyTable t = table_from({{{"a", 1}}, {{"a", 2}}});
  const EntityId a = *t.pool().find("a");
  CHECK_THROWS_AS(feature_value(0, t, 1, a), std::invalid_argument);
  CHECK_THROWS_AS(feature_value(8, t, 1, a), std::invalid_argument);
  CHECK_THROWS_AS(feature_value(2, t, 1, a), std::out_of_range);  // needs i >= 2
  CHECK_THROWS_AS(feature_value(1, t, 3, a), std::out_of_range);
}

TEST_CASE("column count follows the (n-1) + (n-2)*6 law") {
  for (int n = 2; n <= 7; ++n) {
    const auto names = feature_column_names(n);
    CHECK(names.size() == static_cast<std::size_t>((n - 1) + (n - 2) * 6));
  }
  // three feature weeks -> 15 columns
  CHECK(feature_column_names(4).size() == 15);
  // a single feature week -> F1 only
  const auto single = feature_column_names(2);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == "F1@1");
}

TEST_CASE("column ordering is a pure function of n") {
  const auto names = feature_column_names(4);
  const std::vector<std::string> expected{
      "F1@1", "F1@2", "F1@3", "F2@2", "F3@2", "F4@2", "F5@2", "F6@2",
      "F7@2", "F2@3", "F3@3", "F4@3", "F5@3", "F6@3", "F7@3"};
  CHECK(names == expected);
  rng::Rng r(3);
  const FrequencyTable t1 = random_table(r, 10, 4);
  const FrequencyTable t2 = random_table(r, 25, 4);
  CHECK(build_feature_matrix(t1, 4).column_names() ==
        build_feature_matrix(t2, 4).column_names());
}

TEST_CASE("matrix cells equal the independent per-cell oracle") {
  rng::Rng r(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int n_windows = 3 + static_cast<int>(r.below(3));
    const FrequencyTable t = random_table(r, 20, n_windows);
    const int n = n_windows;
    const FeatureMatrix m = build_feature_matrix(t, n);
    REQUIRE(m.entities().size() == querylog::candidate_set(t, n).size());
    for (std::size_t row = 0; row < m.rows(); ++row) {
      const EntityId e = m.entities()[row];
      std::size_t col = 0;
      for (int i = 1; i < n; ++i) {
        CHECK(m.at(row, col++) == oracle_cell(1, t, i, e));
      }
      for (int i = 2; i < n; ++i) {
        for (int f = 2; f <= 7; ++f) {
          CHECK(m.at(row, col++) == oracle_cell(f, t, i, e));
        }
      }
    }
  }
}

TEST_CASE("every cell is finite and bounded by the clip") {
  rng::Rng r(23);
  for (int trial = 0; trial < 20; ++trial) {
    const FrequencyTable t = random_table(r, 30, 4);
    const FeatureMatrix m = build_feature_matrix(t, 4);
    for (double v : m.values()) {
      CHECK(std::isfinite(v));
      CHECK(v <= 1e3);
    }
  }
}

TEST_CASE("F4 and F7 are exactly scale invariant") {
  rng::Rng r(29);
  auto pool = std::make_shared<EntityPool>();
  std::vector<FrequencyTable::WindowCounts> counts(2), scaled(2);
  for (int j = 0; j < 25; ++j) {
    const EntityId id = pool->intern("e" + std::to_string(j));
    for (int i = 0; i < 2; ++i) {
      if (r.uniform01() < 0.3) continue;
      const std::int64_t c = r.uniform_int(1, 30);
      counts[i][id] = c;
      scaled[i][id] = 5 * c;
    }
  }
  const FrequencyTable t(WindowConfig{0, 100, 2}, pool, std::move(counts));
  const FrequencyTable t5(WindowConfig{0, 100, 2}, pool, std::move(scaled));
  const FeatureMatrix m = build_feature_matrix(t, 2);
  for (EntityId e : m.entities()) {
    CHECK(feature_value(4, t, 2, e) == feature_value(4, t5, 2, e));
    CHECK(feature_value(7, t, 2, e) == feature_value(7, t5, 2, e));
    CHECK(feature_value(1, t, 2, e) == feature_value(1, t5, 2, e));
    CHECK(feature_value(2, t, 2, e) == feature_value(2, t5, 2, e));
  }
}

TEST_CASE("F3 equals the log difference of positive relative frequencies") {
  const FrequencyTable t =
      table_from({{{"a", 4}, {"b", 6}}, {{"a", 9}, {"b", 1}}});
  const EntityId a = *t.pool().find("a");
  const double f1_now = feature_value(1, t, 2, a);
  const double f1_prev = feature_value(1, t, 1, a);
  CHECK(feature_value(3, t, 2, a) ==
        doctest::Approx(std::log(f1_now) - std::log(f1_prev)).epsilon(1e-12));
}

TEST_CASE("entities absent from both windows yield zero pair features") {
  // present only in window 1, so it stays a candidate at n = 3
  const FrequencyTable t = table_from(
      {{{"gone", 5}, {"stay", 2}}, {{"stay", 3}}, {{"stay", 4}}});
  const EntityId gone = *t.pool().find("gone");
  CHECK(feature_value(4, t, 3, gone) == 0.0);  // 0/0
  CHECK(feature_value(7, t, 3, gone) == 0.0);
  CHECK(feature_value(2, t, 3, gone) == 0.0);
}

TEST_CASE("labels follow the trend rule") {
  const FrequencyTable t = table_from({{{"a", 2}, {"b", 10}},
                                       {{"a", 2}, {"b", 10}},
                                       {{"a", 6}, {"b", 11}}});
  const FeatureMatrix m = build_labeled_feature_matrix(t, 3, 3.0);
  REQUIRE(m.has_labels());
  REQUIRE(m.rows() == 2);
  // rows are sorted by name: a then b
  CHECK(m.labels()[0] == 1);
  CHECK(m.labels()[1] == 0);
  CHECK(m.positives() == 1);
}

TEST_CASE("select_feature_family keeps the family's columns") {
  rng::Rng r(31);
  const FrequencyTable t = random_table(r, 15, 4);
  const FeatureMatrix m = build_labeled_feature_matrix(t, 4, 3.0);
  const FeatureMatrix f1 = select_feature_family(m, 1);
  CHECK(f1.cols() == 3);
  CHECK(f1.column_names() == std::vector<std::string>{"F1@1", "F1@2", "F1@3"});
  const FeatureMatrix f7 = select_feature_family(m, 7);
  CHECK(f7.cols() == 2);
  for (std::size_t row = 0; row < m.rows(); ++row) {
    CHECK(f1.at(row, 0) == m.at(row, 0));
    CHECK(f7.at(row, 1) == m.at(row, 14));
  }
  CHECK(f7.labels() == m.labels());
  CHECK_THROWS_AS(select_feature_family(m, 8), std::invalid_argument);
}

TEST_CASE("feature matrix csv round-trips exactly") {
  rng::Rng r(37);
  const FrequencyTable t = random_table(r, 12, 4);
  const FeatureMatrix m = build_labeled_feature_matrix(t, 4, 3.0);
  std::stringstream ss;
  write_feature_matrix_csv(ss, m);
  const FeatureMatrix back = read_feature_matrix_csv(ss);
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  CHECK(back.column_names() == m.column_names());
  CHECK(back.labels() == m.labels());
  for (std::size_t row = 0; row < m.rows(); ++row) {
    CHECK(back.pool().name(back.entities()[row]) ==
          m.pool().name(m.entities()[row]));
    for (std::size_t col = 0; col < m.cols(); ++col) {
      CHECK(back.at(row, col) == m.at(row, col));
    }
  }
}
