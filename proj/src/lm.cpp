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

#include "trendlm/lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "trendlm/text.hpp"

namespace trendlm::lm {
namespace {

constexpr std::string_view kBosSurface = "<s>";
constexpr std::string_view kEosSurface = "</s>";
constexpr std::string_view kUnkSurface = "<unk>";
constexpr std::string_view kEntitySurface = "<entity>";

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (!std::isfinite(m)) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

Vocabulary::Vocabulary() {
  words_ = {std::string(kBosSurface), std::string(kEosSurface),
            std::string(kUnkSurface), std::string(kEntitySurface)};
  for (TokenId id = 0; id < words_.size(); ++id) index_[words_[id]] = id;
}

bool Vocabulary::is_special_surface(std::string_view word) {
  return word == kBosSurface || word == kEosSurface || word == kUnkSurface ||
         word == kEntitySurface;
}

TokenId Vocabulary::add(std::string_view word) {
  if (word.empty()) throw std::invalid_argument("empty token");
  if (is_special_surface(word)) {
    if (word == kEntitySurface) return kEntity;
    throw std::invalid_argument("reserved token in corpus: " +
                                std::string(word));
  }
  auto it = index_.find(std::string(word));
  if (it != index_.end()) return it->second;
  const TokenId id = static_cast<TokenId>(words_.size());
  words_.emplace_back(word);
  index_.emplace(words_.back(), id);
  return id;
}

std::uint32_t Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? UINT32_MAX : it->second;
}

TokenId Vocabulary::token_or_unk(std::string_view word) const {
  const std::uint32_t id = find(word);
  return id == UINT32_MAX ? kUnk : id;
}

double WeightedCorpus::total_weight() const {
  double total = 0;
  for (const WeightedSentence& s : sentences) total += s.weight;
  return total;
}

WeightedCorpus inject_entity_token(WeightedCorpus corpus, double alpha) {
  if (alpha <= 0 || alpha >= 1) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  if (corpus.sentences.empty()) {
    throw std::invalid_argument("cannot inject into empty corpus");
  }
  const double total = corpus.total_weight();
  corpus.sentences.push_back(WeightedSentence{
      alpha * total / (1.0 - alpha), {std::string(kEntitySurface)}});
  return corpus;
}

std::size_t NGramLM::VectorHash::operator()(
    const std::vector<TokenId>& v) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (TokenId t : v) {
    h ^= t;
    h *= 0x100000001b3ULL;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

NGramLM NGramLM::train(const WeightedCorpus& corpus, int order) {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  if (corpus.sentences.empty() || corpus.total_weight() <= 0) {
    throw std::invalid_argument("cannot train on an empty corpus");
  }
  NGramLM lm;
  lm.order_ = order;
  lm.contexts_.resize(order);

  std::vector<TokenId> padded;
  for (const WeightedSentence& sentence : corpus.sentences) {
    if (sentence.words.empty()) {
      throw std::invalid_argument("empty sentence in corpus");
    }
    if (sentence.weight <= 0) {
      throw std::invalid_argument("sentence weight must be positive");
    }
    padded.assign(static_cast<std::size_t>(order - 1), Vocabulary::kBos);
    for (const std::string& word : sentence.words) {
      padded.push_back(lm.vocab_.add(word));
    }
    padded.push_back(Vocabulary::kEos);

    const std::size_t first_predicted = static_cast<std::size_t>(order - 1);
    for (std::size_t pos = first_predicted; pos < padded.size(); ++pos) {
      for (int k = 0; k < order; ++k) {
        std::vector<TokenId> context(padded.begin() + (pos - k),
                                     padded.begin() + pos);
        ContextCounts& cc = lm.contexts_[k][std::move(context)];
        cc.counts[padded[pos]] += sentence.weight;
        cc.total += sentence.weight;
      }
    }
  }
  lm.predictable_vocab_ = static_cast<double>(lm.vocab_.size() - 1);
  return lm;
}

double NGramLM::cond_prob(std::span<const TokenId> context, TokenId w) const {
  if (static_cast<int>(context.size()) >= order_) {
    context = context.subspan(context.size() - (order_ - 1));
  }
  if (context.empty()) {
    const ContextCounts& uni = contexts_[0].begin()->second;
    auto it = uni.counts.find(w);
    const double count = it == uni.counts.end() ? 0.0 : it->second;
    const double types = static_cast<double>(uni.counts.size());
    return (count + types / predictable_vocab_) / (uni.total + types);
  }
  const std::vector<TokenId> key(context.begin(), context.end());
  auto it = contexts_[context.size()].find(key);
  const std::span<const TokenId> shorter = context.subspan(1);
  if (it == contexts_[context.size()].end()) {
    return cond_prob(shorter, w);
  }
  const ContextCounts& cc = it->second;
  auto cit = cc.counts.find(w);
  const double count = cit == cc.counts.end() ? 0.0 : cit->second;
  const double types = static_cast<double>(cc.counts.size());
  return (count + types * cond_prob(shorter, w)) / (cc.total + types);
}

double NGramLM::sentence_logprob(std::span<const std::string> words) const {
  if (words.empty()) throw std::invalid_argument("empty utterance");
  std::vector<TokenId> tokens(static_cast<std::size_t>(order_ - 1),
                              Vocabulary::kBos);
  for (const std::string& word : words) {
    if (Vocabulary::is_special_surface(word)) {
      throw std::invalid_argument("special token in utterance: " + word);
    }
    tokens.push_back(vocab_.token_or_unk(word));
  }
  tokens.push_back(Vocabulary::kEos);

  double lp = 0;
  const std::size_t first = static_cast<std::size_t>(order_ - 1);
  for (std::size_t pos = first; pos < tokens.size(); ++pos) {
    const std::span<const TokenId> history(tokens.data() + (pos - first),
                                           first);
    lp += std::log(cond_prob(history, tokens[pos]));
  }
  return lp;
}

double NGramLM::entity_sentence_logprob() const {
  std::vector<TokenId> tokens(static_cast<std::size_t>(order_ - 1),
                              Vocabulary::kBos);
  tokens.push_back(Vocabulary::kEntity);
  tokens.push_back(Vocabulary::kEos);
  double lp = 0;
  const std::size_t first = static_cast<std::size_t>(order_ - 1);
  for (std::size_t pos = first; pos < tokens.size(); ++pos) {
    const std::span<const TokenId> history(tokens.data() + (pos - first),
                                           first);
    lp += std::log(cond_prob(history, tokens[pos]));
  }
  return lp;
}

BoostedLM::BoostedLM(std::shared_ptr<const NGramLM> base, BoostConfig cfg)
    : base_(std::move(base)) {
  if (cfg.boosted.empty()) {
    throw std::invalid_argument("boosted name list is empty");
  }
  const double share = 1.0 / static_cast<double>(cfg.boosted.size());
  for (const std::string& name : cfg.boosted) {
    const std::string key = text::normalize_text(name);
    if (key.empty()) throw std::invalid_argument("empty boosted name");
    for (const std::string& word : text::split_words(key)) {
      if (Vocabulary::is_special_surface(word)) {
        throw std::invalid_argument("special token in boosted name: " + name);
      }
    }
    q_[key] += share;  // duplicate names accumulate their shares
  }
  entity_prob_ = std::exp(base_->entity_sentence_logprob());
}

double BoostedLM::base_sentence_logprob(
    std::span<const std::string> words) const {
  return base_->sentence_logprob(words);
}

double BoostedLM::sentence_logprob(std::span<const std::string> words) const {
  const double base_lp = base_->sentence_logprob(words);
  const std::string key = text::normalize_text(text::join_words(words));
  auto it = q_.find(key);
  if (it == q_.end()) return base_lp;
  return log_sum_exp(base_lp, std::log(entity_prob_ * it->second));
}

double BoostedLM::sentence_prob(std::span<const std::string> words) const {
  const double base_p = std::exp(base_->sentence_logprob(words));
  const std::string key = text::normalize_text(text::join_words(words));
  auto it = q_.find(key);
  if (it == q_.end()) return base_p;
  return base_p + entity_prob_ * it->second;
}

BoostedLM splice_entity_distribution(std::shared_ptr<const NGramLM> base,
                                     BoostConfig cfg) {
  return BoostedLM(std::move(base), std::move(cfg));
}

WeightedCorpus read_corpus_text(std::istream& is) {
  WeightedCorpus corpus;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double weight = 1.0;
    std::string_view body = line;
    const std::size_t tab = line.find('\t');
    if (tab != std::string::npos) {
      try {
        std::size_t used = 0;
        weight = std::stod(line.substr(0, tab), &used);
        if (used == tab) {
          body = std::string_view(line).substr(tab + 1);
        } else {
          weight = 1.0;
        }
      } catch (const std::exception&) {
        weight = 1.0;
      }
    }
    std::vector<std::string> words =
        text::split_words(text::to_lower_ascii(body));
    if (words.empty()) continue;
    corpus.sentences.push_back(WeightedSentence{weight, std::move(words)});
  }
  return corpus;
}

void write_corpus_text(std::ostream& os, const WeightedCorpus& corpus) {
  char buf[32];
  for (const WeightedSentence& s : corpus.sentences) {
    std::snprintf(buf, sizeof buf, "%.17g", s.weight);
    os << buf << '\t' << text::join_words(s.words) << '\n';
  }
}

}  // namespace trendlm::lm
