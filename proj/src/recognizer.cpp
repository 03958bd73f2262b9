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

#include "trendlm/recognizer.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "trendlm/text.hpp"

namespace trendlm::recognizer {
namespace {

constexpr std::size_t kFallbackCandidates = 512;
constexpr std::size_t kSnapDistanceCap = 5;
constexpr char kLetters[] = "abcdefghijklmnopqrstuvwxyz";

std::uint32_t bucket_key(char first, std::size_t len) {
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(first)) << 8) |
         static_cast<std::uint32_t>(std::min<std::size_t>(len, 0xff));
}

// Levenshtein distance with early exit once every value in a row exceeds
// the cap; returns cap + 1 in that case.
std::size_t bounded_edit_distance(std::string_view a, std::string_view b,
                                  std::size_t cap) {
  if (a.size() > b.size()) std::swap(a, b);
  if (b.size() - a.size() > cap) return cap + 1;
  std::vector<std::size_t> prev(a.size() + 1), cur(a.size() + 1);
  for (std::size_t i = 0; i <= a.size(); ++i) prev[i] = i;
  for (std::size_t j = 1; j <= b.size(); ++j) {
    cur[0] = j;
    std::size_t row_min = cur[0];
    for (std::size_t i = 1; i <= a.size(); ++i) {
      const std::size_t sub = prev[i - 1] + (a[i - 1] != b[j - 1]);
      cur[i] = std::min({sub, prev[i] + 1, cur[i - 1] + 1});
      row_min = std::min(row_min, cur[i]);
    }
    if (row_min > cap) return cap + 1;
    std::swap(prev, cur);
  }
  return prev[a.size()];
}

}  // namespace

void DecodeConfig::validate() const {
  if (lm_weight < 0) throw std::invalid_argument("lm_weight must be >= 0");
  if (confusion_count < 1) throw std::invalid_argument("confusion_count < 1");
  if (confusion_strength <= 0) {
    throw std::invalid_argument("confusion_strength must be > 0");
  }
}

WordPool::WordPool(std::vector<std::pair<std::string, double>> word_weights) {
  if (word_weights.empty()) throw std::invalid_argument("empty word pool");
  std::sort(word_weights.begin(), word_weights.end());
  for (auto& [word, weight] : word_weights) {
    if (word.empty()) throw std::invalid_argument("empty word in pool");
    if (!words_.empty() && words_.back() == word) {
      weights_.back() += weight;
      continue;
    }
    words_.push_back(std::move(word));
    weights_.push_back(weight);
  }
  double running = 0;
  cumulative_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    index_.emplace(words_[i], i);
    buckets_[bucket_key(words_[i][0], words_[i].size())].push_back(i);
    running += std::max(weights_[i], 0.0);
    cumulative_.push_back(running);
  }

  std::vector<std::size_t> by_weight(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) by_weight[i] = i;
  std::sort(by_weight.begin(), by_weight.end(), [this](std::size_t a, std::size_t b) {
    if (weights_[a] != weights_[b]) return weights_[a] > weights_[b];
    return words_[a] < words_[b];
  });
  by_weight.resize(std::min(by_weight.size(), kFallbackCandidates));
  frequent_ = std::move(by_weight);
}

bool WordPool::contains(const std::string& word) const {
  return index_.contains(word);
}

double WordPool::weight(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? 0.0 : weights_[it->second];
}

const std::string& WordPool::snap(const std::string& word) const {
  auto hit = index_.find(word);
  if (hit != index_.end()) return words_[hit->second];
  auto cached = snap_cache_.find(word);
  if (cached != snap_cache_.end()) return words_[cached->second];

  std::size_t best_index = frequent_.front();
  std::size_t best_dist = SIZE_MAX;
  auto consider = [&](std::size_t i) {
    const std::size_t d =
        bounded_edit_distance(word, words_[i], kSnapDistanceCap);
    if (d < best_dist ||
        (d == best_dist && (weights_[i] > weights_[best_index] ||
                            (weights_[i] == weights_[best_index] &&
                             words_[i] < words_[best_index])))) {
      best_dist = d;
      best_index = i;
    }
  };
  if (!word.empty()) {
    const std::size_t len = word.size();
    const std::size_t lo = len > 2 ? len - 2 : 1;
    for (std::size_t l = lo; l <= len + 2; ++l) {
      auto it = buckets_.find(bucket_key(word[0], l));
      if (it == buckets_.end()) continue;
      for (std::size_t i : it->second) consider(i);
    }
  }
  if (best_dist > kSnapDistanceCap) {
    for (std::size_t i : frequent_) consider(i);
  }
  snap_cache_.emplace(word, best_index);
  return words_[best_index];
}

const std::string& WordPool::sample_weighted(rng::Rng& r) const {
  const double target = r.uniform01() * cumulative_.back();
  const auto it =
      std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  const std::size_t i = std::min<std::size_t>(
      static_cast<std::size_t>(it - cumulative_.begin()), words_.size() - 1);
  return words_[i];
}

std::size_t char_edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] != b[j - 1]);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t word_edit_distance(std::span<const std::string> a,
                               std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] != b[j - 1]);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

FrequentSentences::FrequentSentences(
    std::vector<std::pair<std::string, double>> weighted_sentences,
    std::size_t cap) {
  std::sort(weighted_sentences.begin(), weighted_sentences.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  if (weighted_sentences.size() > cap) weighted_sentences.resize(cap);
  for (auto& [sentence, _] : weighted_sentences) {
    words_.push_back(text::split_words(sentence));
    joined_.push_back(text::join_words(words_.back()));
  }
}

ConfusionChannel::ConfusionChannel(WordPool pool, DecodeConfig cfg)
    : pool_(std::move(pool)), cfg_(cfg) {
  cfg_.validate();
}

ConfusionChannel::ConfusionChannel(WordPool pool, FrequentSentences frequent,
                                   DecodeConfig cfg)
    : pool_(std::move(pool)), frequent_(std::move(frequent)), cfg_(cfg) {
  cfg_.validate();
}

const HypothesisSet& ConfusionChannel::hypotheses(
    std::span<const std::string> reference) {
  const std::string key = text::join_words(reference);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  return cache_
      .emplace(key, generate_confusions(reference, pool_, cfg_, &frequent_))
      .first->second;
}

HypothesisSet generate_confusions(std::span<const std::string> reference,
                                  const WordPool& pool, const DecodeConfig& cfg,
                                  const FrequentSentences* frequent) {
  cfg.validate();
  if (reference.empty()) throw std::invalid_argument("empty reference");
  if (pool.size() == 0) throw std::invalid_argument("empty vocabulary");

  const std::string ref_joined = text::join_words(reference);
  rng::Rng r(rng::mix_seed(cfg.seed, rng::fnv1a64(ref_joined)));

  HypothesisSet out;
  out.reference.assign(reference.begin(), reference.end());
  out.candidates.push_back(
      Hypothesis{std::vector<std::string>(reference.begin(), reference.end()), 0.0});

  std::unordered_set<std::string> seen{ref_joined};
  const std::size_t want = static_cast<std::size_t>(cfg.confusion_count);
  const std::size_t max_attempts = 40 * want;

  // A few slots go to the nearest high-traffic utterances.
  if (frequent != nullptr && frequent->size() > 0) {
    constexpr std::size_t kNearbySlots = 3;
    const std::size_t distance_cap = ref_joined.size() + 4;
    std::vector<std::pair<std::size_t, std::size_t>> near;  // (distance, idx)
    for (std::size_t i = 0; i < frequent->size(); ++i) {
      const std::size_t d =
          bounded_edit_distance(ref_joined, frequent->joined(i), distance_cap);
      if (d == 0 || d > distance_cap) continue;
      near.emplace_back(d, i);
    }
    std::sort(near.begin(), near.end());
    for (const auto& [d, i] :
         std::span(near).first(std::min(kNearbySlots, near.size()))) {
      if (out.candidates.size() >= want + 1) break;
      if (!seen.insert(frequent->joined(i)).second) continue;
      out.candidates.push_back(Hypothesis{
          frequent->words(i),
          -cfg.confusion_strength * static_cast<double>(d)});
    }
  }

  for (std::size_t attempt = 0;
       attempt < max_attempts && out.candidates.size() < want + 1; ++attempt) {
    std::vector<std::string> words(reference.begin(), reference.end());
    std::vector<char> dirty(words.size(), 0);
    const int n_edits = 1 + static_cast<int>(r.below(3) == 0);
    for (int e = 0; e < n_edits; ++e) {
      const std::size_t wi = r.below(words.size());
      std::string& w = words[wi];
      switch (r.below(5)) {
        case 0:  // substitute
          w[r.below(w.size())] = kLetters[r.below(26)];
          dirty[wi] = 1;
          break;
        case 1:  // delete
          if (w.size() >= 2) {
            w.erase(r.below(w.size()), 1);
            dirty[wi] = 1;
          }
          break;
        case 2:  // insert
          w.insert(w.begin() + static_cast<std::ptrdiff_t>(r.below(w.size() + 1)),
                   kLetters[r.below(26)]);
          dirty[wi] = 1;
          break;
        case 3:  // split
          if (w.size() >= 4) {
            const std::size_t cut = 2 + r.below(w.size() - 3);
            const std::string tail = w.substr(cut);
            w.resize(cut);
            words.insert(words.begin() + static_cast<std::ptrdiff_t>(wi) + 1,
                         tail);
            dirty[wi] = 1;
            dirty.insert(dirty.begin() + static_cast<std::ptrdiff_t>(wi) + 1, 1);
          }
          break;
        case 4:  // merge
          if (words.size() >= 2) {
            const std::size_t at = std::min(wi, words.size() - 2);
            words[at] += words[at + 1];
            words.erase(words.begin() + static_cast<std::ptrdiff_t>(at) + 1);
            dirty.erase(dirty.begin() + static_cast<std::ptrdiff_t>(at) + 1);
            dirty[at] = 1;
          }
          break;
      }
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (dirty[i]) words[i] = pool.snap(words[i]);
    }
    const std::string joined = text::join_words(words);
    if (!seen.insert(joined).second) continue;
    const std::size_t dist = char_edit_distance(joined, ref_joined);
    if (dist == 0) continue;
    out.candidates.push_back(Hypothesis{
        std::move(words), -cfg.confusion_strength * static_cast<double>(dist)});
  }

  // Rarely the edit loop cannot reach the quota (tiny pools); fill with
  // frequency-weighted draws so the set size stays fixed.
  std::size_t guard = 0;
  while (out.candidates.size() < want + 1 && guard++ < max_attempts) {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < reference.size(); ++i) {
      words.push_back(pool.sample_weighted(r));
    }
    const std::string joined = text::join_words(words);
    if (!seen.insert(joined).second) continue;
    const std::size_t dist = char_edit_distance(joined, ref_joined);
    if (dist == 0) continue;
    out.candidates.push_back(Hypothesis{
        std::move(words), -cfg.confusion_strength * static_cast<double>(dist)});
  }
  return out;
}

Hypothesis decode(const HypothesisSet& hset, const lm::LanguageModel& model,
                  const DecodeConfig& cfg) {
  if (hset.candidates.empty()) throw std::invalid_argument("empty hypothesis set");
  const Hypothesis* best = nullptr;
  double best_score = 0;
  std::string best_joined;
  for (const Hypothesis& h : hset.candidates) {
    const double score =
        h.acoustic_logscore + cfg.lm_weight * model.sentence_logprob(h.words);
    std::string joined = text::join_words(h.words);
    if (best == nullptr || score > best_score ||
        (score == best_score && joined < best_joined)) {
      best = &h;
      best_score = score;
      best_joined = std::move(joined);
    }
  }
  return *best;
}

WerResult word_error_rate(
    std::span<const std::pair<std::vector<std::string>, std::vector<std::string>>>
        pairs) {
  if (pairs.empty()) throw std::invalid_argument("no utterances");
  WerResult out;
  std::int64_t edits = 0, length = 0;
  for (const auto& [ref, hyp] : pairs) {
    if (ref.empty()) throw std::invalid_argument("empty reference");
    const auto d = static_cast<std::int64_t>(word_edit_distance(ref, hyp));
    out.per_utterance.emplace_back(d, static_cast<std::int64_t>(ref.size()));
    edits += d;
    length += static_cast<std::int64_t>(ref.size());
  }
  out.wer = static_cast<double>(edits) / static_cast<double>(length);
  return out;
}

std::vector<std::string> feedback_filter(
    const ranking::RankedList& ranked, const lm::LanguageModel& base_lm,
    ConfusionChannel& channel, const DecodeConfig& cfg, std::size_t budget,
    std::unordered_map<std::string, bool>* recognized_cache) {
  std::vector<std::string> boosted;
  for (const ranking::ScoredEntity& entry : ranked.entries()) {
    if (boosted.size() >= budget) break;
    const std::string& name = ranked.pool().name(entry.entity);
    bool recognized = false;
    bool known = false;
    if (recognized_cache != nullptr) {
      auto it = recognized_cache->find(name);
      if (it != recognized_cache->end()) {
        recognized = it->second;
        known = true;
      }
    }
    if (!known) {
      const std::vector<std::string> words = text::split_words(name);
      const HypothesisSet& hset = channel.hypotheses(words);
      recognized = decode(hset, base_lm, cfg).words == words;
      if (recognized_cache != nullptr) {
        recognized_cache->emplace(name, recognized);
      }
    }
    if (!recognized) boosted.push_back(name);
  }
  return boosted;
}

}  // namespace trendlm::recognizer
