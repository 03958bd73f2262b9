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

#include "trendlm/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "trendlm/random.hpp"

namespace trendlm::ranking {
namespace {

// Regularized incomplete beta I_x(a, b) via the continued fraction of
// Lentz's method, with the usual symmetry switch for convergence.
double betacf(double a, double b, double x) {
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double reg_incomplete_beta(double a, double b, double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1) / (a + b + 2)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

RankedList::RankedList(std::vector<ScoredEntity> entries,
                       std::shared_ptr<const EntityPool> pool)
    : entries_(std::move(entries)), pool_(std::move(pool)) {
  std::unordered_set<std::uint32_t> seen;
  for (const ScoredEntity& e : entries_) {
    if (!seen.insert(e.entity.value).second) {
      throw std::invalid_argument("duplicate entity in ranked list");
    }
  }
  std::sort(entries_.begin(), entries_.end(),
            [this](const ScoredEntity& a, const ScoredEntity& b) {
              if (a.score != b.score) return a.score > b.score;
              return pool_->name(a.entity) < pool_->name(b.entity);
            });
}

Heuristic heuristic_from_name(std::string_view name) {
  if (name == "random") return Heuristic::kRandom;
  if (name == "popular_last_week") return Heuristic::kPopularLastWeek;
  if (name == "suddenly_popular") return Heuristic::kSuddenlyPopular;
  if (name == "trending_last_week") return Heuristic::kTrendingLastWeek;
  throw std::invalid_argument("unknown heuristic: " + std::string(name));
}

std::string_view heuristic_name(Heuristic h) {
  switch (h) {
    case Heuristic::kRandom:
      return "random";
    case Heuristic::kPopularLastWeek:
      return "popular_last_week";
    case Heuristic::kSuddenlyPopular:
      return "suddenly_popular";
    case Heuristic::kTrendingLastWeek:
      return "trending_last_week";
  }
  throw std::invalid_argument("unknown heuristic");
}

RankedList heuristic_score(Heuristic h, const querylog::FrequencyTable& table,
                           int n, std::uint64_t seed,
                           const features::FeatureParams& params) {
  const std::vector<EntityId> candidates = querylog::candidate_set(table, n);
  std::vector<ScoredEntity> scored;
  scored.reserve(candidates.size());
  rng::Rng r(rng::mix_seed(seed, 0x4a9d));
  for (EntityId e : candidates) {
    double score = 0;
    switch (h) {
      case Heuristic::kRandom:
        score = r.uniform01();
        break;
      case Heuristic::kPopularLastWeek:
        score = features::feature_value(1, table, n - 1, e, params);
        break;
      case Heuristic::kSuddenlyPopular:
        score = features::feature_value(6, table, n - 1, e, params);
        break;
      case Heuristic::kTrendingLastWeek:
        score = features::feature_value(7, table, n - 1, e, params);
        break;
    }
    scored.push_back(ScoredEntity{e, score});
  }
  return RankedList(std::move(scored), table.pool_ptr());
}

double average_precision(const RankedList& ranked,
                         const std::unordered_map<EntityId, bool>& labels) {
  std::size_t total_positives = 0;
  for (const auto& [_, positive] : labels) total_positives += positive;
  if (total_positives == 0) {
    throw std::invalid_argument("average precision needs at least one positive");
  }
  double sum = 0;
  std::size_t hits = 0, rank = 0;
  for (const ScoredEntity& e : ranked.entries()) {
    ++rank;
    auto it = labels.find(e.entity);
    if (it == labels.end()) {
      throw std::invalid_argument("ranked entity without a label");
    }
    if (it->second) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank);
    }
  }
  return sum / static_cast<double>(total_positives);
}

PrecisionRecall precision_recall_at_k(
    const RankedList& ranked, const std::unordered_map<EntityId, bool>& labels,
    std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  std::size_t total_positives = 0;
  for (const auto& [_, positive] : labels) total_positives += positive;
  if (total_positives == 0) {
    throw std::invalid_argument("metrics need at least one positive");
  }
  const std::size_t cut = std::min(k, ranked.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < cut; ++i) {
    auto it = labels.find(ranked.entries()[i].entity);
    if (it == labels.end()) {
      throw std::invalid_argument("ranked entity without a label");
    }
    hits += it->second;
  }
  PrecisionRecall out;
  out.precision = cut == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(cut);
  out.recall = static_cast<double>(hits) / static_cast<double>(total_positives);
  return out;
}

double paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("paired t-test needs two equal samples, n >= 2");
  }
  const std::size_t n = a.size();
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double var = 0;
  bool any_nonzero = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    if (d != 0) any_nonzero = true;
    var += (d - mean) * (d - mean);
  }
  if (!any_nonzero) return 1.0;
  var /= static_cast<double>(n - 1);
  if (var == 0) return 0.0;  // identical nonzero shift everywhere

  const double t = mean / std::sqrt(var / static_cast<double>(n));
  const double df = static_cast<double>(n - 1);
  return reg_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

void write_ranked_list_csv(std::ostream& os, const RankedList& ranked) {
  os << "rank,entity,score\n";
  char buf[32];
  std::size_t rank = 0;
  for (const ScoredEntity& e : ranked.entries()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.score);
    os << ++rank << ',' << ranked.pool().name(e.entity) << ',' << buf << '\n';
  }
}

RankedList read_ranked_list_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("rank,entity,score", 0) != 0) {
    throw std::runtime_error("bad ranked list header");
  }
  auto pool = std::make_shared<EntityPool>();
  std::vector<ScoredEntity> entries;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.rfind(',');
    if (c1 == std::string::npos || c2 == c1) {
      throw std::runtime_error("bad ranked list row: " + line);
    }
    entries.push_back(ScoredEntity{pool->intern(line.substr(c1 + 1, c2 - c1 - 1)),
                                   std::stod(line.substr(c2 + 1))});
  }
  return RankedList(std::move(entries), std::move(pool));
}

}  // namespace trendlm::ranking
