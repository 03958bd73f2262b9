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
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "trendlm/lm.hpp"
#include "trendlm/random.hpp"
#include "trendlm/ranking.hpp"

namespace trendlm::recognizer {

/// One candidate transcription with its acoustic-channel score proxy
/// (0 for the true transcription, -strength * character edits otherwise).
struct Hypothesis {
  std::vector<std::string> words;
  double acoustic_logscore = 0;
};

struct HypothesisSet {
  std::vector<std::string> reference;
  std::vector<Hypothesis> candidates;  // reference first, then confusions
};

struct DecodeConfig {
  double lm_weight = 1.0;
  int confusion_count = 9;  // confusions per utterance
  // Acoustic penalty per character edit. The default is calibrated so the
  // unboosted system misrecognizes roughly 15% of trending-name utterances
  // on the default synthetic setup.
  double confusion_strength = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Weighted word inventory with a nearest-word lookup. Words that fall out
/// of an edit are snapped back to in-vocabulary words, preferring frequent
/// ones among equally close matches — the channel's popularity bias.
class WordPool {
 public:
  explicit WordPool(std::vector<std::pair<std::string, double>> word_weights);

  bool contains(const std::string& word) const;
  double weight(const std::string& word) const;
  const std::string& snap(const std::string& word) const;
  const std::string& sample_weighted(rng::Rng& r) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::vector<std::string> words_;   // sorted, unique
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  std::unordered_map<std::string, std::size_t> index_;
  // (first char, length) -> word indexes, for cheap nearest-word scans
  std::unordered_map<std::uint32_t, std::vector<std::size_t>> buckets_;
  std::vector<std::size_t> frequent_;  // fallback candidates
  mutable std::unordered_map<std::string, std::size_t> snap_cache_;
};

std::size_t char_edit_distance(std::string_view a, std::string_view b);
std::size_t word_edit_distance(std::span<const std::string> a,
                               std::span<const std::string> b);

/// High-traffic full utterances (frequent entity names and common carrier
/// phrases). The channel offers the closest of these as hypotheses, the
/// way a beam keeps popular alternatives alive next to a rare name.
class FrequentSentences {
 public:
  FrequentSentences() = default;
  explicit FrequentSentences(
      std::vector<std::pair<std::string, double>> weighted_sentences,
      std::size_t cap = 400);

  std::size_t size() const { return joined_.size(); }
  const std::vector<std::string>& words(std::size_t i) const {
    return words_[i];
  }
  const std::string& joined(std::size_t i) const { return joined_[i]; }

 private:
  std::vector<std::vector<std::string>> words_;  // sorted by weight desc
  std::vector<std::string> joined_;
};

/// Deterministic confusion generator: seeded per reference string, edits
/// characters (substitute/delete/insert/split/merge) and snaps the touched
/// words back into the pool; optionally mixes in the nearest frequent
/// utterances. Memoizes per reference.
class ConfusionChannel {
 public:
  ConfusionChannel(WordPool pool, DecodeConfig cfg);
  ConfusionChannel(WordPool pool, FrequentSentences frequent,
                   DecodeConfig cfg);

  const HypothesisSet& hypotheses(std::span<const std::string> reference);
  const WordPool& pool() const { return pool_; }

 private:
  WordPool pool_;
  FrequentSentences frequent_;
  DecodeConfig cfg_;
  std::unordered_map<std::string, HypothesisSet> cache_;
};

HypothesisSet generate_confusions(std::span<const std::string> reference,
                                  const WordPool& pool, const DecodeConfig& cfg,
                                  const FrequentSentences* frequent = nullptr);

/// argmax of acoustic + lm_weight * sentence log-probability; ties broken
/// toward the lexicographically smaller word sequence.
Hypothesis decode(const HypothesisSet& hset, const lm::LanguageModel& model,
                  const DecodeConfig& cfg);

struct WerResult {
  double wer = 0;
  // per-utterance (word edits, reference length), for paired significance
  std::vector<std::pair<std::int64_t, std::int64_t>> per_utterance;
};

WerResult word_error_rate(
    std::span<const std::pair<std::vector<std::string>, std::vector<std::string>>>
        pairs);

/// Walks the ranking in order, keeps entities the unboosted system gets
/// wrong, and stops once `budget` names are collected. `recognized_cache`
/// (optional) memoizes the per-entity base decode across calls.
std::vector<std::string> feedback_filter(
    const ranking::RankedList& ranked, const lm::LanguageModel& base_lm,
    ConfusionChannel& channel, const DecodeConfig& cfg, std::size_t budget,
    std::unordered_map<std::string, bool>* recognized_cache = nullptr);

}  // namespace trendlm::recognizer
