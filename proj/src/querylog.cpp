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

#include "trendlm/querylog.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace trendlm::querylog {

void WindowConfig::validate() const {
  if (window_len <= 0) throw std::invalid_argument("window_len must be > 0");
  if (n_windows < 2) throw std::invalid_argument("need at least 2 windows");
}

std::optional<int> WindowConfig::window_of(std::int64_t ts) const {
  if (ts < start) return std::nullopt;
  const std::int64_t idx = (ts - start) / window_len;
  if (idx >= n_windows) return std::nullopt;
  return static_cast<int>(idx) + 1;
}

void QueryLog::add(std::int64_t timestamp, std::string_view name) {
  if (timestamp < 0) throw std::invalid_argument("timestamp must be >= 0");
  records_.push_back(QueryRecord{timestamp, pool_->intern(name)});
}

FrequencyTable::FrequencyTable(WindowConfig config,
                               std::shared_ptr<const EntityPool> pool,
                               std::vector<WindowCounts> counts)
    : config_(config), pool_(std::move(pool)), counts_(std::move(counts)) {
  config_.validate();
  if (static_cast<int>(counts_.size()) != config_.n_windows) {
    throw std::invalid_argument("count vector does not match window count");
  }
  totals_.reserve(counts_.size());
  for (const auto& window : counts_) {
    std::int64_t total = 0;
    for (const auto& [entity, c] : window) {
      if (c < 1) throw std::invalid_argument("zero counts must not be stored");
      total += c;
    }
    totals_.push_back(total);
  }
}

void FrequencyTable::check_window(int window) const {
  if (window < 1 || window > config_.n_windows) {
    throw std::out_of_range("window index out of range");
  }
}

std::int64_t FrequencyTable::count(int window, EntityId entity) const {
  check_window(window);
  const auto& m = counts_[window - 1];
  auto it = m.find(entity);
  return it == m.end() ? 0 : it->second;
}

std::int64_t FrequencyTable::window_total(int window) const {
  check_window(window);
  return totals_[window - 1];
}

const FrequencyTable::WindowCounts& FrequencyTable::window_counts(
    int window) const {
  check_window(window);
  return counts_[window - 1];
}

std::int64_t FrequencyTable::total() const {
  std::int64_t sum = 0;
  for (std::int64_t t : totals_) sum += t;
  return sum;
}

FrequencyTable FrequencyTable::slice(int first, int last) const {
  check_window(first);
  check_window(last);
  if (first > last) throw std::invalid_argument("slice bounds reversed");
  WindowConfig cfg = config_;
  cfg.start = config_.window_start(first);
  cfg.n_windows = last - first + 1;
  std::vector<WindowCounts> counts(counts_.begin() + (first - 1),
                                   counts_.begin() + last);
  return FrequencyTable(cfg, pool_, std::move(counts));
}

void SynthConfig::validate() const {
  if (n_entities < 1) throw std::invalid_argument("n_entities must be >= 1");
  if (n_windows < 2) throw std::invalid_argument("n_windows must be >= 2");
  if (zipf_exponent <= 0) throw std::invalid_argument("zipf_exponent <= 0");
  if (base_volume <= 0) throw std::invalid_argument("base_volume <= 0");
  if (trend_fraction < 0 || trend_fraction >= 1) {
    throw std::invalid_argument("trend_fraction outside [0, 1)");
  }
  if (trend_multiplier_low < 1 ||
      trend_multiplier_high < trend_multiplier_low) {
    throw std::invalid_argument("bad trend multiplier range");
  }
  if (sample_threshold < 0) throw std::invalid_argument("sample_threshold < 0");
}

FrequencyTable aggregate(const QueryLog& log, const WindowConfig& cfg,
                         std::int64_t sample_threshold) {
  cfg.validate();
  std::vector<FrequencyTable::WindowCounts> counts(cfg.n_windows);
  for (const QueryRecord& rec : log.records()) {
    if (auto window = cfg.window_of(rec.timestamp)) {
      ++counts[*window - 1][rec.entity];
    }
  }
  if (sample_threshold > 1) {
    for (auto& window : counts) {
      std::erase_if(window,
                    [&](const auto& kv) { return kv.second < sample_threshold; });
    }
  }
  return FrequencyTable(cfg, log.pool_ptr(), std::move(counts));
}

std::vector<EntityId> candidate_set(const FrequencyTable& table, int n) {
  if (n < 2 || n > table.config().n_windows) {
    throw std::out_of_range("n outside [2, n_windows]");
  }
  std::unordered_map<EntityId, bool> seen;
  for (int i = 1; i < n; ++i) {
    for (const auto& [entity, c] : table.window_counts(i)) {
      seen.emplace(entity, true);
    }
  }
  std::vector<EntityId> out;
  out.reserve(seen.size());
  for (const auto& [entity, _] : seen) out.push_back(entity);
  std::sort(out.begin(), out.end(), [&](EntityId a, EntityId b) {
    return table.pool().name(a) < table.pool().name(b);
  });
  return out;
}

std::unordered_map<EntityId, bool> label_trending(const FrequencyTable& table,
                                                  int n, double c) {
  if (c <= 0) throw std::invalid_argument("c must be > 0");
  std::unordered_map<EntityId, bool> labels;
  for (EntityId e : candidate_set(table, n)) {
    const auto f_now = static_cast<double>(table.count(n, e));
    const auto f_prev = static_cast<double>(table.count(n - 1, e));
    labels[e] = f_now > 0 && f_now >= c * f_prev;
  }
  return labels;
}

void write_query_log_jsonl(std::ostream& os, const QueryLog& log) {
  for (const QueryRecord& rec : log.records()) {
    nlohmann::json line;
    line["ts"] = rec.timestamp;
    line["entity"] = log.pool().name(rec.entity);
    os << line.dump() << '\n';
  }
}

QueryLog read_query_log_jsonl(std::istream& is) {
  QueryLog log;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const nlohmann::json doc = nlohmann::json::parse(line);
    log.add(doc.at("ts").get<std::int64_t>(),
            doc.at("entity").get<std::string>());
  }
  return log;
}

void write_trend_events_jsonl(std::ostream& os,
                              const std::vector<TrendEvent>& events,
                              const EntityPool& pool) {
  for (const TrendEvent& ev : events) {
    nlohmann::json line;
    line["entity"] = pool.name(ev.entity);
    line["onset_window"] = ev.onset_window;
    line["multiplier"] = ev.multiplier;
    os << line.dump() << '\n';
  }
}

std::vector<TrendEvent> read_trend_events_jsonl(std::istream& is,
                                                EntityPool& pool) {
  std::vector<TrendEvent> events;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const nlohmann::json doc = nlohmann::json::parse(line);
    events.push_back(TrendEvent{pool.intern(doc.at("entity").get<std::string>()),
                                doc.at("onset_window").get<int>(),
                                doc.at("multiplier").get<double>()});
  }
  return events;
}

void write_frequency_table_csv(std::ostream& os, const FrequencyTable& table) {
  os << "window,entity,count\n";
  for (int i = 1; i <= table.config().n_windows; ++i) {
    std::vector<std::pair<std::string, std::int64_t>> rows;
    rows.reserve(table.window_counts(i).size());
    for (const auto& [entity, c] : table.window_counts(i)) {
      rows.emplace_back(table.pool().name(entity), c);
    }
    std::sort(rows.begin(), rows.end());
    for (const auto& [name, c] : rows) {
      os << i << ',' << name << ',' << c << '\n';
    }
  }
}

FrequencyTable read_frequency_table_csv(std::istream& is, WindowConfig cfg) {
  cfg.validate();
  auto pool = std::make_shared<EntityPool>();
  std::vector<FrequencyTable::WindowCounts> counts(cfg.n_windows);
  std::string line;
  if (!std::getline(is, line) || line.rfind("window,entity,count", 0) != 0) {
    throw std::runtime_error("bad frequency table header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.rfind(',');
    if (c1 == std::string::npos || c2 == c1) {
      throw std::runtime_error("bad frequency table row: " + line);
    }
    const int window = std::stoi(line.substr(0, c1));
    if (window < 1 || window > cfg.n_windows) {
      throw std::runtime_error("window index out of range in CSV");
    }
    const EntityId entity = pool->intern(line.substr(c1 + 1, c2 - c1 - 1));
    counts[window - 1][entity] = std::stoll(line.substr(c2 + 1));
  }
  return FrequencyTable(cfg, std::move(pool), std::move(counts));
}

}  // namespace trendlm::querylog
