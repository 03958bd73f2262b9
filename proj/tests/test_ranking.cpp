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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trendlm/ranking.hpp"
#include "trendlm/random.hpp"

using namespace trendlm;
using namespace trendlm::ranking;
using trendlm::querylog::FrequencyTable;
using trendlm::querylog::WindowConfig;

namespace {

struct Labeled {
  RankedList ranked;
  std::unordered_map<EntityId, bool> labels;
};

Labeled random_ranking(rng::Rng& r, int n, double positive_rate) {
  auto pool = std::make_shared<EntityPool>();
  std::vector<ScoredEntity> entries;
  std::unordered_map<EntityId, bool> labels;
  for (int j = 0; j < n; ++j) {
    const EntityId id = pool->intern("item " + std::to_string(j));
    entries.push_back(ScoredEntity{id, r.uniform01()});
    labels[id] = r.uniform01() < positive_rate;
  }
  return Labeled{RankedList(std::move(entries), pool), std::move(labels)};
}

// Direct-definition AP: walk ranks, average precision at relevant ranks
// over all relevant items.
double oracle_ap(const RankedList& ranked,
                 const std::unordered_map<EntityId, bool>& labels) {
  std::size_t positives = 0;
  for (const auto& [_, p] : labels) positives += p;
  double sum = 0;
  std::size_t seen_relevant = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (labels.at(ranked.entries()[i].entity)) {
      ++seen_relevant;
      sum += static_cast<double>(seen_relevant) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(positives);
}

// Student t density for the integration oracle.
double t_pdf(double x, double df) {
  const double c = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) -
                   0.5 * std::log(df * M_PI);
  return std::exp(c - (df + 1) / 2 * std::log1p(x * x / df));
}

// Two-tailed p by composite Simpson integration of the density over
// [-|t|, |t|]; independent of the incomplete-beta route.
double oracle_p_value(double t, double df) {
  const double hi = std::abs(t);
  const int steps = 200000;  // even
  const double h = 2 * hi / steps;
  double integral = t_pdf(-hi, df) + t_pdf(hi, df);
  for (int i = 1; i < steps; ++i) {
    const double x = -hi + h * i;
    integral += t_pdf(x, df) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  integral *= h / 3.0;
  return std::max(0.0, 1.0 - integral);
}

double t_statistic(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double var = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(n - 1);
  return mean / std::sqrt(var / static_cast<double>(n));
}

}  // namespace

TEST_CASE("ranked lists sort by score then name and reject duplicates") {
  auto pool = std::make_shared<EntityPool>();
  const EntityId a = pool->intern("alpha");
  const EntityId b = pool->intern("beta");
  const EntityId c = pool->intern("gamma");
  RankedList ranked({{c, 0.5}, {a, 0.9}, {b, 0.5}}, pool);
  CHECK(ranked.entries()[0].entity == a);
  CHECK(ranked.entries()[1].entity == b);  // tie broken by name
  CHECK(ranked.entries()[2].entity == c);
  CHECK_THROWS_AS(RankedList({{a, 1.0}, {a, 0.5}}, pool),
                  std::invalid_argument);
}

TEST_CASE("re-ranking is idempotent and input-order invariant") {
  rng::Rng r(5);
  for (int trial = 0; trial < 10; ++trial) {
    Labeled made = random_ranking(r, 40, 0.3);
    std::vector<ScoredEntity> shuffled = made.ranked.entries();
    r.shuffle(shuffled);
    const RankedList again(shuffled, made.ranked.pool_ptr());
    for (std::size_t i = 0; i < made.ranked.size(); ++i) {
      CHECK(again.entries()[i].entity == made.ranked.entries()[i].entity);
    }
  }
}

TEST_CASE("average precision on hand-built rankings") {
  auto pool = std::make_shared<EntityPool>();
  std::vector<ScoredEntity> entries;
  std::unordered_map<EntityId, bool> labels;
  for (int j = 0; j < 10; ++j) {
    const EntityId id = pool->intern("e" + std::to_string(j));
    entries.push_back(ScoredEntity{id, 10.0 - j});
    labels[id] = false;
  }
  // single positive at rank 2
  labels.at(entries[1].entity) = true;
  const RankedList ranked(entries, pool);
  CHECK(average_precision(ranked, labels) == doctest::Approx(0.5));

  // all positives ahead of all negatives -> AP 1
  std::unordered_map<EntityId, bool> top_heavy;
  for (int j = 0; j < 10; ++j) top_heavy[entries[j].entity] = j < 4;
  CHECK(average_precision(ranked, top_heavy) == doctest::Approx(1.0));

  std::unordered_map<EntityId, bool> none;
  for (int j = 0; j < 10; ++j) none[entries[j].entity] = false;
  CHECK_THROWS_AS(average_precision(ranked, none), std::invalid_argument);
}

TEST_CASE("average precision matches the direct-definition oracle") {
  rng::Rng r(41);
  for (int trial = 0; trial < 200; ++trial) {
    Labeled made = random_ranking(r, 30, 0.25);
    std::size_t positives = 0;
    for (const auto& [_, p] : made.labels) positives += p;
    if (positives == 0) continue;
    CHECK(average_precision(made.ranked, made.labels) ==
          oracle_ap(made.ranked, made.labels));
  }
}

TEST_CASE("average precision is invariant to monotone score transforms") {
  rng::Rng r(43);
  Labeled made = random_ranking(r, 50, 0.2);
  std::size_t positives = 0;
  for (const auto& [_, p] : made.labels) positives += p;
  REQUIRE(positives > 0);
  std::vector<ScoredEntity> transformed = made.ranked.entries();
  for (ScoredEntity& e : transformed) e.score = std::exp(3 * e.score) + 7;
  const RankedList again(transformed, made.ranked.pool_ptr());
  CHECK(average_precision(again, made.labels) ==
        doctest::Approx(average_precision(made.ranked, made.labels))
            .epsilon(1e-15));
}

TEST_CASE("precision and recall at k") {
  auto pool = std::make_shared<EntityPool>();
  std::vector<ScoredEntity> entries;
  std::unordered_map<EntityId, bool> labels;
  for (int j = 0; j < 6; ++j) {
    const EntityId id = pool->intern("e" + std::to_string(j));
    entries.push_back(ScoredEntity{id, 6.0 - j});
    labels[id] = false;
  }
  labels.at(entries[0].entity) = true;
  labels.at(entries[3].entity) = true;
  labels.at(entries[4].entity) = true;
  labels.at(entries[5].entity) = true;  // 4 positives total
  const RankedList ranked(entries, pool);

  const auto at2 = precision_recall_at_k(ranked, labels, 2);
  CHECK(at2.precision == doctest::Approx(0.5));
  CHECK(at2.recall == doctest::Approx(0.25));

  // k beyond the list: full-list precision, full recall of listed positives
  const auto at100 = precision_recall_at_k(ranked, labels, 100);
  CHECK(at100.precision == doctest::Approx(4.0 / 6.0));
  CHECK(at100.recall == doctest::Approx(1.0));
}

TEST_CASE("precision and recall match the set-count oracle") {
  rng::Rng r(47);
  for (int trial = 0; trial < 100; ++trial) {
    Labeled made = random_ranking(r, 25, 0.3);
    std::size_t positives = 0;
    for (const auto& [_, p] : made.labels) positives += p;
    if (positives == 0) continue;
    const std::size_t k = 1 + r.below(30);
    const std::size_t cut = std::min<std::size_t>(k, made.ranked.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < cut; ++i) {
      hits += made.labels.at(made.ranked.entries()[i].entity);
    }
    const auto pr = precision_recall_at_k(made.ranked, made.labels, k);
    CHECK(pr.precision * static_cast<double>(cut) ==
          doctest::Approx(static_cast<double>(hits)).epsilon(1e-12));
    CHECK(pr.recall * static_cast<double>(positives) ==
          doctest::Approx(static_cast<double>(hits)).epsilon(1e-12));
  }
}

TEST_CASE("paired t-test conventions") {
  const std::vector<double> a{1, 2, 3, 4};
  CHECK(paired_t_test(a, a) == doctest::Approx(1.0));
  const std::vector<double> b{2, 1, 4, 2};
  CHECK(paired_t_test(a, b) == doctest::Approx(paired_t_test(b, a)));
  CHECK_THROWS_AS(paired_t_test(a, std::vector<double>{1.0}),
                  std::invalid_argument);
}

TEST_CASE("paired t-test matches the integration oracle") {
  const std::vector<double> a{3, 5, 1, 4, 4, 6, 2, 5, 3, 4};
  const std::vector<double> b{2, 4, 2, 2, 4, 5, 1, 3, 3, 2};
  const double p = paired_t_test(a, b);
  const double t = t_statistic(a, b);
  CHECK(p == doctest::Approx(oracle_p_value(t, 9)).epsilon(1e-8));

  rng::Rng r(53);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> x, y;
    const int n = 5 + static_cast<int>(r.below(20));
    for (int i = 0; i < n; ++i) {
      x.push_back(r.uniform_int(0, 6));
      y.push_back(r.uniform_int(0, 6));
    }
    bool all_equal = true;
    for (int i = 0; i < n; ++i) all_equal &= x[i] == y[i];
    if (all_equal) continue;
    double var = 0, mean = 0;
    for (int i = 0; i < n; ++i) mean += x[i] - y[i];
    mean /= n;
    for (int i = 0; i < n; ++i) {
      var += (x[i] - y[i] - mean) * (x[i] - y[i] - mean);
    }
    if (var == 0) continue;
    const double expect = oracle_p_value(t_statistic(x, y), n - 1);
    CHECK(paired_t_test(x, y) == doctest::Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("heuristic scorers rank by their feature") {
  auto make_table = [](std::vector<std::vector<std::pair<std::string, std::int64_t>>>
                           spec) {
    auto pool = std::make_shared<EntityPool>();
    std::vector<FrequencyTable::WindowCounts> counts(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
      for (const auto& [name, c] : spec[i]) counts[i][pool->intern(name)] = c;
    }
    return FrequencyTable(WindowConfig{0, 100, static_cast<int>(spec.size())},
                          pool, std::move(counts));
  };

  // popular_last_week: larger relative frequency in the last history window
  {
    const FrequencyTable t =
        make_table({{{"a", 1}, {"b", 1}}, {{"a", 9}, {"b", 1}}, {{"a", 1}}});
    const RankedList ranked =
        heuristic_score(Heuristic::kPopularLastWeek, t, 3, 1);
    CHECK(t.pool().name(ranked.entries()[0].entity) == "a");
  }
  // trending_last_week: ratio 3 beats ratio 1.5
  {
    const FrequencyTable t = make_table(
        {{{"a", 2}, {"b", 100}}, {{"a", 6}, {"b", 150}}, {{"a", 1}}});
    const RankedList ranked =
        heuristic_score(Heuristic::kTrendingLastWeek, t, 3, 1);
    CHECK(t.pool().name(ranked.entries()[0].entity) == "a");
  }
  // random: deterministic under a fixed seed
  {
    const FrequencyTable t =
        make_table({{{"a", 1}, {"b", 2}, {"c", 3}}, {{"a", 1}}});
    const RankedList r1 = heuristic_score(Heuristic::kRandom, t, 2, 77);
    const RankedList r2 = heuristic_score(Heuristic::kRandom, t, 2, 77);
    for (std::size_t i = 0; i < r1.size(); ++i) {
      CHECK(r1.entries()[i].entity == r2.entries()[i].entity);
      CHECK(r1.entries()[i].score == r2.entries()[i].score);
    }
  }
  CHECK_THROWS_AS(heuristic_from_name("bogus"), std::invalid_argument);
  CHECK(heuristic_name(heuristic_from_name("suddenly_popular")) ==
        "suddenly_popular");
}

TEST_CASE("ranked list csv round-trips") {
  auto pool = std::make_shared<EntityPool>();
  RankedList ranked({{pool->intern("first thing"), 0.75},
                     {pool->intern("second"), 0.25}},
                    pool);
  std::stringstream ss;
  write_ranked_list_csv(ss, ranked);
  const RankedList back = read_ranked_list_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back.pool().name(back.entries()[0].entity) == "first thing");
  CHECK(back.entries()[0].score == 0.75);
  CHECK(back.pool().name(back.entries()[1].entity) == "second");
}
