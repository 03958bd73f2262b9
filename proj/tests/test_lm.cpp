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

#include "trendlm/lm.hpp"
#include "trendlm/random.hpp"
#include "trendlm/text.hpp"

using namespace trendlm;
using namespace trendlm::lm;

namespace {

WeightedCorpus corpus_from(const std::vector<std::string>& lines) {
  WeightedCorpus corpus;
  for (const std::string& line : lines) {
    corpus.sentences.push_back(WeightedSentence{1.0, text::split_words(line)});
  }
  return corpus;
}

WeightedCorpus random_corpus(rng::Rng& r, int n_sentences, int vocab_size) {
  WeightedCorpus corpus;
  for (int s = 0; s < n_sentences; ++s) {
    WeightedSentence sentence;
    sentence.weight = 1.0 + r.below(4);
    const std::size_t len = 1 + r.below(6);
    for (std::size_t i = 0; i < len; ++i) {
      sentence.words.push_back("w" + std::to_string(r.below(vocab_size)));
    }
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

std::vector<std::string> random_sentence(rng::Rng& r, int vocab_size) {
  std::vector<std::string> words;
  const std::size_t len = 1 + r.below(6);
  for (std::size_t i = 0; i < len; ++i) {
    // occasionally out-of-vocabulary
    if (r.uniform01() < 0.1) {
      words.push_back("oov" + std::to_string(r.below(5)));
    } else {
      words.push_back("w" + std::to_string(r.below(vocab_size)));
    }
  }
  return words;
}

double sum_over_predictables(const NGramLM& lm,
                             std::span<const TokenId> context) {
  double sum = 0;
  for (TokenId w = 0; w < lm.vocab().size(); ++w) {
    if (w == Vocabulary::kBos) continue;
    sum += lm.cond_prob(context, w);
  }
  return sum;
}

}  // namespace

TEST_CASE("hand-computed witten-bell values on a one-sentence corpus") {
  const NGramLM lm = NGramLM::train(corpus_from({"a"}), 2);
  // predictable vocabulary: a, </s>, <unk>, <entity>
  CHECK(lm.predictable_vocab() == doctest::Approx(4.0));
  const TokenId a = lm.vocab().find("a");
  REQUIRE(a != UINT32_MAX);

  // unigrams: counts {a:1, </s>:1}, 2 types, floor 1/4 each
  const double p0_a = (1.0 + 2.0 * 0.25) / (2.0 + 2.0);  // 3/8
  CHECK(lm.cond_prob({}, a) == doctest::Approx(p0_a).epsilon(1e-12));
  CHECK(lm.cond_prob({}, Vocabulary::kEos) ==
        doctest::Approx(3.0 / 8.0).epsilon(1e-12));

  // P(a | <s>) = (1 + P0(a)) / 2 = 11/16, same for P(</s> | a)
  const std::vector<TokenId> bos{Vocabulary::kBos};
  CHECK(lm.cond_prob(bos, a) == doctest::Approx(11.0 / 16.0).epsilon(1e-12));
  const std::vector<TokenId> ctx_a{a};
  CHECK(lm.cond_prob(ctx_a, Vocabulary::kEos) ==
        doctest::Approx(11.0 / 16.0).epsilon(1e-12));

  const std::vector<std::string> sentence{"a"};
  CHECK(lm.sentence_logprob(sentence) ==
        doctest::Approx(std::log(121.0 / 256.0)).epsilon(1e-12));
  CHECK(std::exp(lm.sentence_logprob(sentence)) > 0.25);
}

TEST_CASE("conditional distributions normalize over the vocabulary") {
  rng::Rng r(7);
  const WeightedCorpus corpus = random_corpus(r, 60, 12);
  const NGramLM lm = NGramLM::train(corpus, 4);
  int checked = 0;
  // observed contexts of every length
  for (int k = 0; k < lm.order() && checked < 60; ++k) {
    for (const auto& [context, _] : lm.contexts(k)) {
      CHECK(sum_over_predictables(lm, context) ==
            doctest::Approx(1.0).epsilon(1e-9));
      if (++checked >= 60) break;
    }
  }
  // random (mostly unseen) contexts
  for (int i = 0; i < 40; ++i) {
    std::vector<TokenId> context;
    const std::size_t len = r.below(4);
    for (std::size_t j = 0; j < len; ++j) {
      context.push_back(static_cast<TokenId>(r.below(lm.vocab().size())));
    }
    CHECK(sum_over_predictables(lm, context) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("unseen words score through <unk> with nonzero probability") {
  const NGramLM lm = NGramLM::train(corpus_from({"a b", "b c"}), 3);
  const std::vector<std::string> sentence{"never", "seen"};
  const double lp = lm.sentence_logprob(sentence);
  CHECK(std::isfinite(lp));
  CHECK(std::exp(lp) > 0);
}

TEST_CASE("sentence_logprob equals the stepwise chain-rule sum") {
  rng::Rng r(11);
  const WeightedCorpus corpus = random_corpus(r, 50, 10);
  const NGramLM lm = NGramLM::train(corpus, 4);
  for (int trial = 0; trial < 40; ++trial) {
    const std::vector<std::string> words = random_sentence(r, 10);
    std::vector<TokenId> tokens(3, Vocabulary::kBos);
    for (const std::string& w : words) {
      tokens.push_back(lm.vocab().token_or_unk(w));
    }
    tokens.push_back(Vocabulary::kEos);
    double stepwise = 0;
    for (std::size_t pos = 3; pos < tokens.size(); ++pos) {
      const std::span<const TokenId> history(tokens.data() + pos - 3, 3);
      stepwise += std::log(lm.cond_prob(history, tokens[pos]));
    }
    CHECK(lm.sentence_logprob(words) ==
          doctest::Approx(stepwise).epsilon(1e-10));
  }
}

TEST_CASE("order-1 scores are permutation invariant") {
  rng::Rng r(13);
  const WeightedCorpus corpus = random_corpus(r, 40, 8);
  const NGramLM lm = NGramLM::train(corpus, 1);
  std::vector<std::string> words{"w1", "w3", "w2", "w5"};
  const double before = lm.sentence_logprob(words);
  std::reverse(words.begin(), words.end());
  CHECK(lm.sentence_logprob(words) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("sentence_logprob rejects specials and empty input") {
  const NGramLM lm = NGramLM::train(corpus_from({"a b"}), 2);
  CHECK_THROWS_AS(lm.sentence_logprob(std::vector<std::string>{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(lm.sentence_logprob(std::vector<std::string>{"<s>", "a"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(lm.sentence_logprob(std::vector<std::string>{"<entity>"}),
                  std::invalid_argument);
}

TEST_CASE("training rejects empty and malformed corpora") {
  CHECK_THROWS_AS(NGramLM::train(WeightedCorpus{}, 2), std::invalid_argument);
  CHECK_THROWS_AS(NGramLM::train(corpus_from({"a"}), 0), std::invalid_argument);
  WeightedCorpus bad;
  bad.sentences.push_back(WeightedSentence{1.0, {"<s>", "x"}});
  CHECK_THROWS_AS(NGramLM::train(bad, 2), std::invalid_argument);
}

TEST_CASE("entity injection hits the configured share exactly") {
  WeightedCorpus corpus;
  for (int i = 0; i < 33; ++i) {
    corpus.sentences.push_back(WeightedSentence{3.0, {"q" + std::to_string(i)}});
  }
  // total 99, alpha 0.01 -> injected weight 1
  const WeightedCorpus injected = inject_entity_token(corpus, 0.01);
  REQUIRE(injected.sentences.size() == corpus.sentences.size() + 1);
  const WeightedSentence& extra = injected.sentences.back();
  REQUIRE(extra.words == std::vector<std::string>{"<entity>"});
  CHECK(extra.weight == doctest::Approx(1.0).epsilon(1e-12));

  // recount: the class sentence's share of total weight equals alpha
  for (double alpha : {1e-4, 0.01, 0.37}) {
    const WeightedCorpus again = inject_entity_token(corpus, alpha);
    const double share = again.sentences.back().weight / again.total_weight();
    CHECK(share == doctest::Approx(alpha).epsilon(1e-12));
  }
  CHECK_THROWS_AS(inject_entity_token(corpus, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(inject_entity_token(corpus, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(inject_entity_token(WeightedCorpus{}, 0.1),
                  std::invalid_argument);
}

TEST_CASE("class sentence probability grows with alpha") {
  rng::Rng r(17);
  const WeightedCorpus corpus = random_corpus(r, 80, 15);
  double prev = 0;
  for (double alpha : {1e-3, 1e-2, 1e-1}) {
    const NGramLM lm = NGramLM::train(inject_entity_token(corpus, alpha), 4);
    const double p = std::exp(lm.entity_sentence_logprob());
    CHECK(p > prev);
    prev = p;
  }
}

TEST_CASE("splicing adds exactly the per-name class mass") {
  rng::Rng r(19);
  WeightedCorpus corpus = random_corpus(r, 100, 20);
  auto base = std::make_shared<NGramLM>(
      NGramLM::train(inject_entity_token(corpus, 0.01), 4));
  const double entity_mass = std::exp(base->entity_sentence_logprob());

  BoostConfig cfg;
  cfg.alpha = 0.01;
  cfg.boosted = {"w1 w2", "w3", "unseen name", "w0 w0 w4"};
  const BoostedLM boosted = splice_entity_distribution(base, cfg);

  for (const auto& [name, share] : boosted.q()) {
    CHECK(share == doctest::Approx(0.25).epsilon(1e-12));
    const std::vector<std::string> words = text::split_words(name);
    const double p_base = std::exp(base->sentence_logprob(words));
    const double p_boosted = boosted.sentence_prob(words);
    const double delta = p_boosted - p_base;
    CHECK(delta == doctest::Approx(entity_mass / 4.0).epsilon(1e-9));
    CHECK(boosted.sentence_logprob(words) > base->sentence_logprob(words));
  }

  // non-boosted utterances score exactly as the base model
  const std::vector<std::string> other{"w5", "w6"};
  CHECK(boosted.sentence_logprob(other) == base->sentence_logprob(other));

  // splicing is non-destructive: a second list coexists over the same base
  BoostConfig cfg2;
  cfg2.boosted = {"w1 w2", "w3"};
  const BoostedLM halved = splice_entity_distribution(base, cfg2);
  const std::vector<std::string> name{"w1", "w2"};
  const double boost_full =
      boosted.sentence_prob(name) - std::exp(base->sentence_logprob(name));
  const double boost_half =
      halved.sentence_prob(name) - std::exp(base->sentence_logprob(name));
  CHECK(boost_half > boost_full);  // smaller list, larger share
  CHECK_THROWS_AS(splice_entity_distribution(base, BoostConfig{}),
                  std::invalid_argument);
}

TEST_CASE("arpa export round-trips sentence scores") {
  rng::Rng r(23);
  WeightedCorpus corpus = random_corpus(r, 120, 25);
  const NGramLM lm = NGramLM::train(inject_entity_token(corpus, 0.02), 4);
  std::stringstream ss;
  export_arpa(lm, ss);

  // header counts match the listed sections
  {
    std::stringstream verify(ss.str());
    std::string line;
    std::vector<std::size_t> declared;
    while (std::getline(verify, line)) {
      if (line.rfind("ngram ", 0) == 0) {
        declared.push_back(std::stoull(line.substr(line.find('=') + 1)));
      }
      if (line.empty() && !declared.empty()) break;
    }
    REQUIRE(declared.size() == 4);
    std::vector<std::size_t> counted(4, 0);
    int section = 0;
    while (std::getline(verify, line)) {
      if (line.empty() || line == "\\end\\") continue;
      if (line.front() == '\\') {
        section = std::stoi(line.substr(1));
        continue;
      }
      if (section >= 1) ++counted[section - 1];
    }
    for (int k = 0; k < 4; ++k) CHECK(declared[k] == counted[k]);
  }

  std::stringstream in(ss.str());
  const ArpaLM back = import_arpa(in);
  CHECK(back.order() == 4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<std::string> words = random_sentence(r, 25);
    CHECK(back.sentence_logprob(words) ==
          doctest::Approx(lm.sentence_logprob(words)).epsilon(1e-6));
  }
}

TEST_CASE("corpus text round-trips weights and casing") {
  std::stringstream ss("2.5\tHello World\nplain sentence\n\n0.125\tx y z\n");
  const WeightedCorpus corpus = read_corpus_text(ss);
  REQUIRE(corpus.sentences.size() == 3);
  CHECK(corpus.sentences[0].weight == 2.5);
  CHECK(corpus.sentences[0].words ==
        std::vector<std::string>{"hello", "world"});
  CHECK(corpus.sentences[1].weight == 1.0);
  CHECK(corpus.sentences[2].weight == 0.125);

  std::stringstream out;
  write_corpus_text(out, corpus);
  const WeightedCorpus again = read_corpus_text(out);
  REQUIRE(again.sentences.size() == corpus.sentences.size());
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    CHECK(again.sentences[i].weight == corpus.sentences[i].weight);
    CHECK(again.sentences[i].words == corpus.sentences[i].words);
  }
}
