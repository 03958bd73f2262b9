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
#include <string>
#include <unordered_map>
#include <vector>

#include "trendlm/entity.hpp"

namespace trendlm::querylog {

struct QueryRecord {
  std::int64_t timestamp = 0;  // seconds since epoch
  EntityId entity;
};

/// Consecutive, equi-length, half-open time windows [t_i, t_{i+1}),
/// indexed 1..n_windows.
struct WindowConfig {
  std::int64_t start = 0;
  std::int64_t window_len = 604800;  // one week
  int n_windows = 0;

  void validate() const;
  std::int64_t window_start(int window) const {
    return start + static_cast<std::int64_t>(window - 1) * window_len;
  }
  // 1-based window index, or nullopt for out-of-range timestamps.
  std::optional<int> window_of(std::int64_t ts) const;
};

/// A time-stamped entity query stream plus the pool its ids live in.
class QueryLog {
 public:
  QueryLog() : pool_(std::make_shared<EntityPool>()) {}
  explicit QueryLog(std::shared_ptr<EntityPool> pool)
      : pool_(std::move(pool)) {}

  EntityPool& pool() { return *pool_; }
  const EntityPool& pool() const { return *pool_; }
  std::shared_ptr<const EntityPool> pool_ptr() const { return pool_; }

  void add(std::int64_t timestamp, std::string_view name);
  void add(QueryRecord rec) { records_.push_back(rec); }
  const std::vector<QueryRecord>& records() const { return records_; }
  std::vector<QueryRecord>& records() { return records_; }

 private:
  std::shared_ptr<EntityPool> pool_;
  std::vector<QueryRecord> records_;
};

/// Per-window entity frequency counts. Zero counts are never stored;
/// lookups for absent pairs read as 0. Immutable after construction.
class FrequencyTable {
 public:
  using WindowCounts = std::unordered_map<EntityId, std::int64_t>;

  FrequencyTable(WindowConfig config, std::shared_ptr<const EntityPool> pool,
                 std::vector<WindowCounts> counts);

  const WindowConfig& config() const { return config_; }
  const EntityPool& pool() const { return *pool_; }
  std::shared_ptr<const EntityPool> pool_ptr() const { return pool_; }

  std::int64_t count(int window, EntityId entity) const;
  std::int64_t window_total(int window) const;
  const WindowCounts& window_counts(int window) const;
  std::int64_t total() const;

  /// Re-indexed view [first..last] -> windows 1..(last-first+1), sharing the
  /// entity pool. Used to evaluate a target window with a fixed amount of
  /// history.
  FrequencyTable slice(int first, int last) const;

 private:
  void check_window(int window) const;

  WindowConfig config_;
  std::shared_ptr<const EntityPool> pool_;
  std::vector<WindowCounts> counts_;  // [0] holds window 1
  std::vector<std::int64_t> totals_;
};

struct SynthConfig {
  int n_entities = 20000;
  int n_windows = 8;
  double zipf_exponent = 0.8;
  double base_volume = 800000;  // expected queries per window
  double trend_fraction = 0.08;
  double trend_multiplier_low = 4.0;
  double trend_multiplier_high = 12.0;
  std::int64_t sample_threshold = 0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrendEvent {
  EntityId entity;
  int onset_window = 0;
  double multiplier = 1.0;
};

struct SyntheticLog {
  QueryLog log;
  std::vector<TrendEvent> events;  // sorted by entity id
};

/// Seeded Zipf+Poisson query-log generator with injected trend events.
/// Deterministic: identical configs produce byte-identical record streams
/// and metadata.
SyntheticLog generate_synthetic_log(const SynthConfig& cfg);

/// Buckets records into windows and drops any (window, entity) count below
/// sample_threshold. Records outside the configured span are ignored.
FrequencyTable aggregate(const QueryLog& log, const WindowConfig& cfg,
                         std::int64_t sample_threshold);

/// Entities observed in any of windows 1..n-1, sorted lexicographically by
/// name. Entities seen only in window n are excluded.
std::vector<EntityId> candidate_set(const FrequencyTable& table, int n);

/// True iff f(T_n) >= c * f(T_{n-1}) and the entity actually appears in
/// window n. Domain is candidate_set(table, n).
std::unordered_map<EntityId, bool> label_trending(const FrequencyTable& table,
                                                  int n, double c);

// --- file formats ---

// JSON Lines, one {"ts": <int>, "entity": <string>} per record.
void write_query_log_jsonl(std::ostream& os, const QueryLog& log);
QueryLog read_query_log_jsonl(std::istream& is);

// JSON Lines, one {"entity", "onset_window", "multiplier"} per event.
void write_trend_events_jsonl(std::ostream& os,
                              const std::vector<TrendEvent>& events,
                              const EntityPool& pool);
std::vector<TrendEvent> read_trend_events_jsonl(std::istream& is,
                                                EntityPool& pool);

// CSV with header window,entity,count; rows sorted by window then name.
void write_frequency_table_csv(std::ostream& os, const FrequencyTable& table);
FrequencyTable read_frequency_table_csv(std::istream& is, WindowConfig cfg);

}  // namespace trendlm::querylog
