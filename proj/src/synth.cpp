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
#include <string>
#include <unordered_set>
#include <vector>

#include "trendlm/querylog.hpp"
#include "trendlm/random.hpp"

namespace trendlm::querylog {
namespace {

// Trend events are not pure step functions: real emerging entities show a
// rise before the surge, and that precursor is what makes the forecasting
// task learnable at all. The two windows before the onset are scaled by
// 1 + gamma * (multiplier - 1): stronger surges build up more. With
// gamma = 0.1 the onset ratio against the ramped previous window still
// clears a factor-3 threshold whenever the multiplier exceeds ~3.86. The
// two gammas stay in that regime; raising them starts to break the
// factor-3 inequality at the onset for small multipliers.
constexpr double kPreOnsetGamma[2] = {0.05, 0.10};  // onset-2, onset-1

// Most trend events land on mid-tail entities (by Zipf rank); emerging
// entities are rarely already at the head and rarely invisible. The band
// is wide, so rank alone is a weak predictor.
constexpr double kBandLowFrac = 0.05;
constexpr double kBandHighFrac = 0.70;
constexpr double kBandShare = 0.60;

// Head entities carry bursty week-to-week volume (news cycles), which
// moves every entity's relative frequency denominator between windows.
constexpr int kVolatileHeadCount = 60;
constexpr double kHeadSwingLow = 0.2;
constexpr double kHeadSwingHigh = 4.5;

const char* const kOnsets[] = {"b",  "br", "ch", "cl", "d",  "dr", "f",
                               "fl", "g",  "gr", "h",  "j",  "k",  "l",
                               "m",  "n",  "p",  "pr", "r",  "s",  "sh",
                               "sl", "st", "t",  "tr", "v",  "w",  "z"};
const char* const kVowels[] = {"a", "e", "i", "o", "u", "ai", "ea", "ee",
                               "oa", "ou"};
const char* const kCodas[] = {"", "n", "r", "s", "t", "l", "m", "nd", "st",
                              "rk"};

std::string make_word(rng::Rng& r) {
  std::string w;
  const int syllables = 2 + static_cast<int>(r.below(2));
  for (int s = 0; s < syllables; ++s) {
    w += kOnsets[r.below(std::size(kOnsets))];
    w += kVowels[r.below(std::size(kVowels))];
    if (s + 1 == syllables || r.uniform01() < 0.4) {
      w += kCodas[r.below(std::size(kCodas))];
    }
  }
  return w;
}

std::vector<std::string> make_lexicon(rng::Rng& r, std::size_t size) {
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  words.reserve(size);
  while (words.size() < size) {
    std::string w = make_word(r);
    if (seen.insert(w).second) words.push_back(std::move(w));
  }
  return words;
}

std::vector<std::string> make_entity_names(rng::Rng& r, int n,
                                           const std::vector<std::string>& lex) {
  std::vector<std::string> names;
  std::unordered_set<std::string> seen;
  names.reserve(n);
  while (static_cast<int>(names.size()) < n) {
    const double p = r.uniform01();
    const int n_words = p < 0.35 ? 1 : (p < 0.80 ? 2 : 3);
    std::string name;
    for (int w = 0; w < n_words; ++w) {
      if (w > 0) name += ' ';
      name += lex[r.below(lex.size())];
    }
    if (seen.insert(name).second) names.push_back(std::move(name));
  }
  return names;
}

}  // namespace

SyntheticLog generate_synthetic_log(const SynthConfig& cfg) {
  cfg.validate();
  rng::Rng r(rng::mix_seed(cfg.seed, 0x5e1f));

  const std::size_t lexicon_size = std::clamp<std::size_t>(
      static_cast<std::size_t>(cfg.n_entities) / 4, 64, 6000);
  const std::vector<std::string> lexicon = make_lexicon(r, lexicon_size);
  const std::vector<std::string> names =
      make_entity_names(r, cfg.n_entities, lexicon);

  SyntheticLog out;
  std::vector<EntityId> ids;
  ids.reserve(names.size());
  for (const std::string& name : names) ids.push_back(out.log.pool().intern(name));

  // Zipf base rates over entity rank (rank = generation order).
  double harmonic = 0;
  for (int j = 1; j <= cfg.n_entities; ++j) {
    harmonic += std::pow(static_cast<double>(j), -cfg.zipf_exponent);
  }
  std::vector<double> rates(cfg.n_entities);
  for (int j = 0; j < cfg.n_entities; ++j) {
    rates[j] = cfg.base_volume *
               std::pow(static_cast<double>(j + 1), -cfg.zipf_exponent) /
               harmonic;
  }

  // Pick trend entities: kBandShare of them from the mid-tail rank band,
  // the rest anywhere.
  const int n_trend =
      static_cast<int>(std::llround(cfg.trend_fraction * cfg.n_entities));
  const int band_lo = static_cast<int>(kBandLowFrac * cfg.n_entities);
  const int band_hi =
      std::max(band_lo + 1, static_cast<int>(kBandHighFrac * cfg.n_entities));
  std::vector<int> band_pool, full_pool;
  for (int j = band_lo; j < std::min(band_hi, cfg.n_entities); ++j) {
    band_pool.push_back(j);
  }
  for (int j = 0; j < cfg.n_entities; ++j) full_pool.push_back(j);
  r.shuffle(band_pool);
  r.shuffle(full_pool);

  std::vector<char> is_trend(cfg.n_entities, 0);
  std::vector<int> trend_entities;
  const int want_band = std::min<int>(
      static_cast<int>(std::llround(kBandShare * n_trend)),
      static_cast<int>(band_pool.size()));
  for (int i = 0; i < want_band; ++i) {
    is_trend[band_pool[i]] = 1;
    trend_entities.push_back(band_pool[i]);
  }
  for (int idx : full_pool) {
    if (static_cast<int>(trend_entities.size()) >= n_trend) break;
    if (!is_trend[idx]) {
      is_trend[idx] = 1;
      trend_entities.push_back(idx);
    }
  }
  std::sort(trend_entities.begin(), trend_entities.end());

  std::vector<int> onset(cfg.n_entities, 0);
  std::vector<double> multiplier(cfg.n_entities, 1.0);
  for (int j : trend_entities) {
    onset[j] = static_cast<int>(r.uniform_int(2, cfg.n_windows));
    multiplier[j] = r.uniform(cfg.trend_multiplier_low, cfg.trend_multiplier_high);
    out.events.push_back(TrendEvent{ids[j], onset[j], multiplier[j]});
  }

  const int volatile_heads = std::min(kVolatileHeadCount, cfg.n_entities);
  std::vector<double> head_swing(
      static_cast<std::size_t>(volatile_heads) * cfg.n_windows);
  for (double& s : head_swing) {
    s = std::exp(r.uniform(std::log(kHeadSwingLow), std::log(kHeadSwingHigh)));
  }

  WindowConfig windows{0, 604800, cfg.n_windows};
  auto& records = out.log.records();
  for (int i = 1; i <= cfg.n_windows; ++i) {
    const std::int64_t w_start = windows.window_start(i);
    for (int j = 0; j < cfg.n_entities; ++j) {
      double factor = 1.0;
      if (is_trend[j]) {
        if (i >= onset[j]) {
          factor = multiplier[j];
        } else if (i == onset[j] - 1) {
          factor = 1.0 + kPreOnsetGamma[1] * (multiplier[j] - 1.0);
        } else if (i == onset[j] - 2) {
          factor = 1.0 + kPreOnsetGamma[0] * (multiplier[j] - 1.0);
        }
      }
      if (j < volatile_heads && !is_trend[j]) {
        factor *= head_swing[static_cast<std::size_t>(j) * cfg.n_windows +
                             (i - 1)];
      }
      const std::int64_t n_queries = r.poisson(rates[j] * factor);
      for (std::int64_t q = 0; q < n_queries; ++q) {
        const std::int64_t ts =
            w_start + static_cast<std::int64_t>(
                          r.below(static_cast<std::uint64_t>(windows.window_len)));
        records.push_back(QueryRecord{ts, ids[j]});
      }
    }
  }
  std::sort(records.begin(), records.end(),
            [](const QueryRecord& a, const QueryRecord& b) {
              return a.timestamp != b.timestamp
                         ? a.timestamp < b.timestamp
                         : a.entity.value < b.entity.value;
            });
  return out;
}

}  // namespace trendlm::querylog
