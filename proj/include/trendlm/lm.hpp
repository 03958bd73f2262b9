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
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace trendlm::lm {

using TokenId = std::uint32_t;

/// Token table with four reserved specials. Sentence-start is never
/// predicted; unknown query words map to the <unk> token; <entity> is the
/// runtime-substitutable class token.
class Vocabulary {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kUnk = 2;
  static constexpr TokenId kEntity = 3;

  Vocabulary();

  static bool is_special_surface(std::string_view word);

  TokenId add(std::string_view word);  // rejects special surfaces except <entity>
  std::uint32_t find(std::string_view word) const;  // UINT32_MAX if absent
  TokenId token_or_unk(std::string_view word) const;
  const std::string& word(TokenId id) const { return words_[id]; }
  std::size_t size() const { return words_.size(); }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> index_;
};

struct WeightedSentence {
  double weight = 1.0;
  std::vector<std::string> words;
};

struct WeightedCorpus {
  std::vector<WeightedSentence> sentences;
  double total_weight() const;
};

/// Appends the one-token class sentence "<entity>" with weight chosen so
/// that its share of total sentence weight equals alpha. Existing weights
/// are untouched.
WeightedCorpus inject_entity_token(WeightedCorpus corpus, double alpha);

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  /// log P(<s> words </s>) under the model, natural log. Words must be
  /// nonempty and must not contain special surfaces.
  virtual double sentence_logprob(std::span<const std::string> words) const = 0;
};

/// Count-based n-gram model with recursive Witten-Bell interpolation down
/// to a uniform floor over the predictable vocabulary. Immutable once
/// trained; safe for concurrent scoring.
class NGramLM : public LanguageModel {
 public:
  struct ContextCounts {
    std::unordered_map<TokenId, double> counts;
    double total = 0;
  };
  struct VectorHash {
    std::size_t operator()(const std::vector<TokenId>& v) const noexcept;
  };
  using ContextTable =
      std::unordered_map<std::vector<TokenId>, ContextCounts, VectorHash>;

  static NGramLM train(const WeightedCorpus& corpus, int order);

  int order() const { return order_; }
  const Vocabulary& vocab() const { return vocab_; }
  /// Number of predictable token types (everything except <s>).
  double predictable_vocab() const { return predictable_vocab_; }

  /// Interpolated P(w | context); context length must be < order. Unseen
  /// contexts defer entirely to the next-shorter context.
  double cond_prob(std::span<const TokenId> context, TokenId w) const;

  double sentence_logprob(std::span<const std::string> words) const override;

  /// log P(<s> <entity> </s>): the probability mass available for runtime
  /// class substitution.
  double entity_sentence_logprob() const;

  /// Observed contexts of length k (0 <= k < order). k = 0 holds the
  /// unigram distribution under the empty context.
  const ContextTable& contexts(int k) const { return contexts_[k]; }

 private:
  NGramLM() = default;

  int order_ = 0;
  Vocabulary vocab_;
  std::vector<ContextTable> contexts_;
  double predictable_vocab_ = 0;
};

struct BoostConfig {
  double alpha = 0.01;  // training share of the class sentence
  std::vector<std::string> boosted;  // entity names, normalized
};

/// Base model plus a uniform runtime distribution over a boosted name
/// list. A boosted utterance is scored as the sum of its direct word-path
/// probability and its share of the class-path mass; everything else
/// scores exactly as the base model. The base model is never modified.
class BoostedLM : public LanguageModel {
 public:
  BoostedLM(std::shared_ptr<const NGramLM> base, BoostConfig cfg);

  double sentence_logprob(std::span<const std::string> words) const override;
  double sentence_prob(std::span<const std::string> words) const;
  double base_sentence_logprob(std::span<const std::string> words) const;

  const std::unordered_map<std::string, double>& q() const { return q_; }
  double entity_sentence_prob() const { return entity_prob_; }
  const NGramLM& base() const { return *base_; }

 private:
  std::shared_ptr<const NGramLM> base_;
  std::unordered_map<std::string, double> q_;
  double entity_prob_ = 0;
};

BoostedLM splice_entity_distribution(std::shared_ptr<const NGramLM> base,
                                     BoostConfig cfg);

/// Backoff model read back from ARPA text; reproduces the exporting
/// model's sentence scores.
class ArpaLM : public LanguageModel {
 public:
  struct Entry {
    double log10_prob = 0;
    double log10_bow = 0;
    bool has_bow = false;
  };
  using Table =
      std::unordered_map<std::vector<TokenId>, Entry, NGramLM::VectorHash>;

  int order() const { return order_; }
  const Vocabulary& vocab() const { return vocab_; }
  double cond_prob(std::span<const TokenId> context, TokenId w) const;
  double sentence_logprob(std::span<const std::string> words) const override;

  friend ArpaLM import_arpa(std::istream& is);

 private:
  int order_ = 0;
  Vocabulary vocab_;
  std::vector<Table> tables_;  // tables_[k]: (k+1)-grams
};

/// Standard ARPA listing (log10). Context-only n-grams carry the usual -99
/// dummy probability. Round-trips through import_arpa to within 1e-6
/// natural-log sentence scores.
void export_arpa(const NGramLM& lm, std::ostream& os);
ArpaLM import_arpa(std::istream& is);

// Plain text corpus: one sentence per line, optional leading
// "<weight>\t". Tokens are case-folded on read.
WeightedCorpus read_corpus_text(std::istream& is);
void write_corpus_text(std::ostream& os, const WeightedCorpus& corpus);

}  // namespace trendlm::lm
