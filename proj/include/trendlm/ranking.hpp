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
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "trendlm/features.hpp"
#include "trendlm/querylog.hpp"

namespace trendlm::ranking {

struct ScoredEntity {
  EntityId entity;
  double score = 0;
};

/// Entities ordered by (score desc, name asc). Duplicate entities are
/// rejected, so the order is total and re-ranking is idempotent.
class RankedList {
 public:
  RankedList() = default;
  RankedList(std::vector<ScoredEntity> entries,
             std::shared_ptr<const EntityPool> pool);

  const std::vector<ScoredEntity>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const EntityPool& pool() const { return *pool_; }
  std::shared_ptr<const EntityPool> pool_ptr() const { return pool_; }

 private:
  std::vector<ScoredEntity> entries_;
  std::shared_ptr<const EntityPool> pool_;
};

enum class Heuristic {
  kRandom,
  kPopularLastWeek,
  kSuddenlyPopular,
  kTrendingLastWeek,
};

Heuristic heuristic_from_name(std::string_view name);
std::string_view heuristic_name(Heuristic h);

/// Ranks the candidate set of `table` at horizon n by one of the naive
/// scorers: seeded random scores, or the F1/F6/F7 value at the last
/// observed window (same clip/log conventions as the feature matrix).
RankedList heuristic_score(Heuristic h, const querylog::FrequencyTable& table,
                           int n, std::uint64_t seed,
                           const features::FeatureParams& params = {});

/// Mean precision at positive-bearing ranks, divided by the total number
/// of positives in `labels` (positives missing from the list count as
/// unretrieved). Every ranked entity must be labeled; at least one label
/// must be positive.
double average_precision(const RankedList& ranked,
                         const std::unordered_map<EntityId, bool>& labels);

struct PrecisionRecall {
  double precision = 0;
  double recall = 0;
};

PrecisionRecall precision_recall_at_k(
    const RankedList& ranked, const std::unordered_map<EntityId, bool>& labels,
    std::size_t k);

/// Two-tailed paired Student t-test over per-observation differences.
/// Returns 1.0 when every difference is zero.
double paired_t_test(std::span<const double> a, std::span<const double> b);

struct KMetrics {
  double precision = 0;
  double recall = 0;
  double wer = 0;
};

struct EvalReport {
  double ap = 0;
  std::map<int, KMetrics> per_k;
  std::optional<double> p_value;
};

// CSV with header rank,entity,score.
void write_ranked_list_csv(std::ostream& os, const RankedList& ranked);
RankedList read_ranked_list_csv(std::istream& is);

}  // namespace trendlm::ranking
