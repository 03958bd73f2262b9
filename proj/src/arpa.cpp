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
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "trendlm/lm.hpp"
#include "trendlm/text.hpp"

namespace trendlm::lm {
namespace {

constexpr double kDummyLogProb = -99.0;

struct Line {
  double log10_prob = 0;
  bool has_bow = false;
  double log10_bow = 0;
};

std::string gram_to_string(const std::vector<TokenId>& gram,
                           const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < gram.size(); ++i) {
    if (i > 0) out += ' ';
    out += vocab.word(gram[i]);
  }
  return out;
}

// Interpolation weight of an observed context: the share of probability
// routed to the shorter context. This is exactly the ARPA backoff weight
// that reproduces the interpolated model.
double context_lambda(const NGramLM::ContextCounts& cc) {
  const double types = static_cast<double>(cc.counts.size());
  return types / (cc.total + types);
}

}  // namespace

void export_arpa(const NGramLM& lm, std::ostream& os) {
  const int order = lm.order();
  const Vocabulary& vocab = lm.vocab();

  // Ordered map keyed by the token sequence so output is deterministic.
  std::vector<std::map<std::vector<TokenId>, Line>> sections(order);

  // Unigrams: the whole vocabulary is listed so every backoff chain
  // terminates. <s> is never predicted and carries the dummy probability.
  for (TokenId id = 0; id < vocab.size(); ++id) {
    Line line;
    if (id == Vocabulary::kBos) {
      line.log10_prob = kDummyLogProb;
    } else {
      line.log10_prob = std::log10(lm.cond_prob({}, id));
    }
    sections[0][{id}] = line;
  }

  // Predicted k-grams carry their interpolated probability.
  for (int k = 2; k <= order; ++k) {
    for (const auto& [context, cc] : lm.contexts(k - 1)) {
      std::vector<std::uint32_t> gram = context;
      gram.push_back(0);
      for (const auto& [word, _] : cc.counts) {
        gram.back() = word;
        Line line;
        line.log10_prob = std::log10(lm.cond_prob(context, word));
        sections[k - 1][gram] = line;
      }
    }
  }

  // Every observed context needs a backoff weight; contexts that never
  // occur as predicted n-grams (leading <s> chains) become dummy entries.
  for (int k = 1; k < order; ++k) {
    for (const auto& [context, cc] : lm.contexts(k)) {
      auto [it, inserted] =
          sections[k - 1].try_emplace(context, Line{kDummyLogProb, false, 0});
      it->second.has_bow = true;
      it->second.log10_bow = std::log10(context_lambda(cc));
    }
  }

  os << "\\data\\\n";
  for (int k = 1; k <= order; ++k) {
    os << "ngram " << k << '=' << sections[k - 1].size() << '\n';
  }
  char buf[64];
  for (int k = 1; k <= order; ++k) {
    os << "\n\\" << k << "-grams:\n";
    for (const auto& [gram, line] : sections[k - 1]) {
      std::snprintf(buf, sizeof buf, "%.9f", line.log10_prob);
      os << buf << '\t' << gram_to_string(gram, vocab);
      if (line.has_bow) {
        std::snprintf(buf, sizeof buf, "%.9f", line.log10_bow);
        os << '\t' << buf;
      }
      os << '\n';
    }
  }
  os << "\n\\end\\\n";
}

ArpaLM import_arpa(std::istream& is) {
  ArpaLM lm;
  std::string line;
  std::vector<std::size_t> declared;

  while (std::getline(is, line) && line != "\\data\\") {
  }
  if (line != "\\data\\") throw std::runtime_error("missing \\data\\ section");
  while (std::getline(is, line)) {
    if (line.empty()) break;
    if (line.rfind("ngram ", 0) != 0) break;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad ngram count line");
    declared.push_back(std::stoull(line.substr(eq + 1)));
  }
  if (declared.empty()) throw std::runtime_error("no ngram counts declared");
  lm.order_ = static_cast<int>(declared.size());
  lm.tables_.resize(declared.size());

  int current = 0;  // 1-based section order, 0 = outside a section
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line == "\\end\\") break;
    if (line.size() > 2 && line.front() == '\\' && line.back() == ':') {
      current = std::stoi(line.substr(1));
      if (current < 1 || current > lm.order_) {
        throw std::runtime_error("bad section header: " + line);
      }
      continue;
    }
    if (current == 0) continue;
    const std::vector<std::string> fields = text::split_words(line);
    const std::size_t want = static_cast<std::size_t>(current) + 1;
    if (fields.size() != want && fields.size() != want + 1) {
      throw std::runtime_error("bad arpa line: " + line);
    }
    ArpaLM::Entry entry;
    entry.log10_prob = std::stod(fields[0]);
    std::vector<TokenId> gram;
    for (int i = 0; i < current; ++i) {
      const std::string& word = fields[1 + static_cast<std::size_t>(i)];
      const std::uint32_t existing = lm.vocab_.find(word);
      gram.push_back(existing != UINT32_MAX ? existing : lm.vocab_.add(word));
    }
    if (fields.size() == want + 1) {
      entry.has_bow = true;
      entry.log10_bow = std::stod(fields.back());
    }
    lm.tables_[static_cast<std::size_t>(current) - 1].emplace(std::move(gram),
                                                              entry);
  }
  for (int k = 0; k < lm.order_; ++k) {
    if (lm.tables_[k].size() != declared[k]) {
      throw std::runtime_error("ngram section size does not match header");
    }
  }
  return lm;
}

double ArpaLM::cond_prob(std::span<const TokenId> context, TokenId w) const {
  if (static_cast<int>(context.size()) >= order_) {
    context = context.subspan(context.size() - (order_ - 1));
  }
  std::vector<TokenId> gram(context.begin(), context.end());
  gram.push_back(w);
  auto it = tables_[gram.size() - 1].find(gram);
  if (it != tables_[gram.size() - 1].end()) {
    return std::pow(10.0, it->second.log10_prob);
  }
  if (context.empty()) {
    throw std::runtime_error("token missing from unigram section");
  }
  double bow = 1.0;
  const std::vector<TokenId> ctx_key(context.begin(), context.end());
  auto cit = tables_[ctx_key.size() - 1].find(ctx_key);
  if (cit != tables_[ctx_key.size() - 1].end() && cit->second.has_bow) {
    bow = std::pow(10.0, cit->second.log10_bow);
  }
  return bow * cond_prob(context.subspan(1), w);
}

double ArpaLM::sentence_logprob(std::span<const std::string> words) const {
  if (words.empty()) throw std::invalid_argument("empty utterance");
  std::vector<TokenId> tokens(static_cast<std::size_t>(order_ - 1),
                              Vocabulary::kBos);
  for (const std::string& word : words) {
    if (Vocabulary::is_special_surface(word)) {
      throw std::invalid_argument("special token in utterance: " + word);
    }
    const std::uint32_t id = vocab_.find(word);
    tokens.push_back(id == UINT32_MAX ? Vocabulary::kUnk : id);
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

}  // namespace trendlm::lm
