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

#include "trendlm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <optional>
#include <unordered_set>

#include <json.hpp>

#include "trendlm/random.hpp"
#include "trendlm/text.hpp"

namespace trendlm::experiment {
namespace {

using nlohmann::json;

// Streams of the experiment seed, one per randomized stage.
constexpr std::uint64_t kStreamSynth = 1;
constexpr std::uint64_t kStreamDecode = 2;
constexpr std::uint64_t kStreamTrain = 3;
constexpr std::uint64_t kStreamRandomHeuristic = 4;
constexpr std::uint64_t kStreamFiller = 5;
constexpr std::uint64_t kStreamHeldout = 6;

// General-traffic carrier phrases; filler sentences are a carrier plus a
// slot word. Held-out sentences reuse the carriers with fresh slots, so
// they stay plausible under the trained model the way unseen-but-ordinary
// requests are.
const char* const kCarrierPatterns[] = {
    "what is",    "who is",     "play",          "call",
    "show me",    "weather in", "news about",    "time in",
    "how to fix", "find",       "open",          "tell me about",
    "set a timer for", "turn on", "remind me about", "stop"};

constexpr std::size_t kSlotVocabulary = 300;

class StageTimer {
 public:
  StageTimer(std::map<std::string, double>& sink, std::string name)
      : sink_(sink), name_(std::move(name)),
        start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    sink_[name_] +=
        std::chrono::duration_cast<std::chrono::duration<double>>(elapsed)
            .count();
  }

 private:
  std::map<std::string, double>& sink_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void check_known_keys(const json& obj, std::initializer_list<const char*> keys,
                      const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) {
          return key == k;
        }) == keys.end()) {
      throw ConfigError("unknown config key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    synth.validate();
    window.validate();
    decode.validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  require(window.n_windows == synth.n_windows,
          "window.n_windows must match synth.n_windows");
  require(trend_factor > 0, "trend factor c must be > 0");
  require(synth.trend_multiplier_low >= trend_factor,
          "trend_multiplier_range.low must be >= c");
  require(!k_cuts.empty(), "k_cuts must not be empty");
  for (std::size_t i = 0; i < k_cuts.size(); ++i) {
    require(k_cuts[i] > 0, "k cuts must be positive");
    require(i == 0 || k_cuts[i] > k_cuts[i - 1], "k cuts must be ascending");
  }
  require(std::find(k_cuts.begin(), k_cuts.end(), primary_k) != k_cuts.end(),
          "primary_k must be one of k_cuts");
  require(test_target_window == train_target_window + 1,
          "test target must directly follow the train target");
  require(test_target_window <= synth.n_windows,
          "test target beyond available windows");
  require(feature_weeks >= 1, "feature_weeks must be >= 1");
  require(feature_weeks <= train_target_window - 1,
          "feature_weeks must leave at least one history window");
  require(boost_alpha > 0 && boost_alpha < 1, "boost_alpha outside (0, 1)");
  require(lm_order >= 1, "lm_order must be >= 1");
  require(filler_sentences >= 0 && heldout_sentences >= 0,
          "sentence counts must be >= 0");
  require(filler_weight_fraction >= 0, "filler_weight_fraction must be >= 0");
}

ExperimentConfig config_from_json_text(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    check_known_keys(doc,
                     {"seed", "synth", "window", "c", "k_cuts", "primary_k",
                      "train_target_window", "test_target_window",
                      "feature_weeks", "boost_alpha", "decode", "train",
                      "lm_order", "filler_sentences", "filler_weight_fraction",
                      "heldout_sentences"},
                     "config");
    read_field(doc, "seed", cfg.seed);
    if (doc.contains("synth")) {
      const json& s = doc.at("synth");
      check_known_keys(s,
                       {"n_entities", "n_windows", "zipf_exponent",
                        "base_volume", "trend_fraction",
                        "trend_multiplier_range", "sample_threshold"},
                       "synth");
      read_field(s, "n_entities", cfg.synth.n_entities);
      read_field(s, "n_windows", cfg.synth.n_windows);
      read_field(s, "zipf_exponent", cfg.synth.zipf_exponent);
      read_field(s, "base_volume", cfg.synth.base_volume);
      read_field(s, "trend_fraction", cfg.synth.trend_fraction);
      if (s.contains("trend_multiplier_range")) {
        const auto range = s.at("trend_multiplier_range");
        if (!range.is_array() || range.size() != 2) {
          throw ConfigError("trend_multiplier_range must be [low, high]");
        }
        cfg.synth.trend_multiplier_low = range[0].get<double>();
        cfg.synth.trend_multiplier_high = range[1].get<double>();
      }
      read_field(s, "sample_threshold", cfg.synth.sample_threshold);
      cfg.window.n_windows = cfg.synth.n_windows;
    }
    if (doc.contains("window")) {
      const json& w = doc.at("window");
      check_known_keys(w, {"start", "window_len", "n_windows"}, "window");
      read_field(w, "start", cfg.window.start);
      read_field(w, "window_len", cfg.window.window_len);
      read_field(w, "n_windows", cfg.window.n_windows);
    }
    read_field(doc, "c", cfg.trend_factor);
    read_field(doc, "k_cuts", cfg.k_cuts);
    read_field(doc, "primary_k", cfg.primary_k);
    read_field(doc, "train_target_window", cfg.train_target_window);
    read_field(doc, "test_target_window", cfg.test_target_window);
    read_field(doc, "feature_weeks", cfg.feature_weeks);
    read_field(doc, "boost_alpha", cfg.boost_alpha);
    if (doc.contains("decode")) {
      const json& d = doc.at("decode");
      check_known_keys(
          d, {"lm_weight", "confusion_count", "confusion_strength"}, "decode");
      read_field(d, "lm_weight", cfg.decode.lm_weight);
      read_field(d, "confusion_count", cfg.decode.confusion_count);
      read_field(d, "confusion_strength", cfg.decode.confusion_strength);
    }
    if (doc.contains("train")) {
      const json& t = doc.at("train");
      check_known_keys(t,
                       {"adaboost_rounds", "adam_alpha", "adam_beta1",
                        "adam_beta2", "adam_eps", "batch_size",
                        "convergence_rel_tol", "max_epochs"},
                       "train");
      read_field(t, "adaboost_rounds", cfg.train.adaboost_rounds);
      read_field(t, "adam_alpha", cfg.train.adam_alpha);
      read_field(t, "adam_beta1", cfg.train.adam_beta1);
      read_field(t, "adam_beta2", cfg.train.adam_beta2);
      read_field(t, "adam_eps", cfg.train.adam_eps);
      read_field(t, "batch_size", cfg.train.batch_size);
      read_field(t, "convergence_rel_tol", cfg.train.convergence_rel_tol);
      read_field(t, "max_epochs", cfg.train.max_epochs);
    }
    read_field(doc, "lm_order", cfg.lm_order);
    read_field(doc, "filler_sentences", cfg.filler_sentences);
    read_field(doc, "filler_weight_fraction", cfg.filler_weight_fraction);
    read_field(doc, "heldout_sentences", cfg.heldout_sentences);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
  json doc;
  doc["seed"] = cfg.seed;
  doc["synth"] = {
      {"n_entities", cfg.synth.n_entities},
      {"n_windows", cfg.synth.n_windows},
      {"zipf_exponent", cfg.synth.zipf_exponent},
      {"base_volume", cfg.synth.base_volume},
      {"trend_fraction", cfg.synth.trend_fraction},
      {"trend_multiplier_range",
       json::array({cfg.synth.trend_multiplier_low, cfg.synth.trend_multiplier_high})},
      {"sample_threshold", cfg.synth.sample_threshold}};
  doc["window"] = {{"start", cfg.window.start},
                   {"window_len", cfg.window.window_len},
                   {"n_windows", cfg.window.n_windows}};
  doc["c"] = cfg.trend_factor;
  doc["k_cuts"] = cfg.k_cuts;
  doc["primary_k"] = cfg.primary_k;
  doc["train_target_window"] = cfg.train_target_window;
  doc["test_target_window"] = cfg.test_target_window;
  doc["feature_weeks"] = cfg.feature_weeks;
  doc["boost_alpha"] = cfg.boost_alpha;
  doc["decode"] = {{"lm_weight", cfg.decode.lm_weight},
                   {"confusion_count", cfg.decode.confusion_count},
                   {"confusion_strength", cfg.decode.confusion_strength}};
  doc["train"] = {{"adaboost_rounds", cfg.train.adaboost_rounds},
                  {"adam_alpha", cfg.train.adam_alpha},
                  {"adam_beta1", cfg.train.adam_beta1},
                  {"adam_beta2", cfg.train.adam_beta2},
                  {"adam_eps", cfg.train.adam_eps},
                  {"batch_size", cfg.train.batch_size},
                  {"convergence_rel_tol", cfg.train.convergence_rel_tol},
                  {"max_epochs", cfg.train.max_epochs}};
  doc["lm_order"] = cfg.lm_order;
  doc["filler_sentences"] = cfg.filler_sentences;
  doc["filler_weight_fraction"] = cfg.filler_weight_fraction;
  doc["heldout_sentences"] = cfg.heldout_sentences;
  return doc.dump(2);
}

lm::WeightedCorpus build_entity_corpus(const querylog::FrequencyTable& table,
                                       int last_window) {
  std::unordered_map<EntityId, double> totals;
  for (int i = 1; i <= last_window; ++i) {
    for (const auto& [entity, count] : table.window_counts(i)) {
      totals[entity] += static_cast<double>(count);
    }
  }
  std::vector<std::pair<std::string, double>> rows;
  rows.reserve(totals.size());
  for (const auto& [entity, weight] : totals) {
    rows.emplace_back(table.pool().name(entity), weight);
  }
  std::sort(rows.begin(), rows.end());
  lm::WeightedCorpus corpus;
  corpus.sentences.reserve(rows.size());
  for (auto& [name, weight] : rows) {
    corpus.sentences.push_back(
        lm::WeightedSentence{weight, text::split_words(name)});
  }
  return corpus;
}

std::vector<std::vector<std::string>> make_filler_sentences(
    const lm::WeightedCorpus& entity_corpus, std::size_t count,
    std::uint64_t seed) {
  // Slot vocabulary: the heaviest words of the entity traffic.
  std::vector<std::string> slots;
  std::vector<double> cumulative;
  {
    std::map<std::string, double> weights;
    for (const lm::WeightedSentence& s : entity_corpus.sentences) {
      for (const std::string& w : s.words) weights[w] += s.weight;
    }
    std::vector<std::pair<std::string, double>> rows(weights.begin(),
                                                     weights.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (rows.size() > kSlotVocabulary) rows.resize(kSlotVocabulary);
    double running = 0;
    for (const auto& [w, weight] : rows) {
      slots.push_back(w);
      running += weight;
      cumulative.push_back(running);
    }
  }

  std::vector<std::vector<std::string>> patterns;
  for (const char* p : kCarrierPatterns) {
    patterns.push_back(text::split_words(p));
  }

  rng::Rng r(seed);
  auto draw_slot = [&]() -> const std::string& {
    const double target = r.uniform01() * cumulative.back();
    const auto it =
        std::upper_bound(cumulative.begin(), cumulative.end(), target);
    return slots[std::min<std::size_t>(
        static_cast<std::size_t>(it - cumulative.begin()), slots.size() - 1)];
  };

  std::vector<std::vector<std::string>> out;
  std::unordered_set<std::string> seen;
  std::size_t guard = 0;
  const std::size_t max_attempts = 50 * count + 1000;
  while (out.size() < count && guard++ < max_attempts) {
    // popular carriers occur more often
    const std::size_t p_idx =
        static_cast<std::size_t>(static_cast<double>(patterns.size()) *
                                 r.uniform01() * r.uniform01());
    std::vector<std::string> sentence =
        patterns[std::min(p_idx, patterns.size() - 1)];
    if (!slots.empty()) {
      sentence.push_back(draw_slot());
      if (r.uniform01() < 0.2) sentence.push_back(draw_slot());
    }
    std::string joined = text::join_words(sentence);
    if (!seen.insert(std::move(joined)).second) continue;
    out.push_back(std::move(sentence));
  }
  return out;
}

std::vector<std::vector<std::string>> sample_sentences(
    const lm::WeightedCorpus& corpus, std::size_t first, std::size_t count,
    std::uint64_t seed) {
  rng::Rng r(seed);
  // weighted order without replacement: sort by u^(1/w) descending
  std::vector<std::pair<double, std::size_t>> keys;
  for (std::size_t i = first; i < corpus.sentences.size(); ++i) {
    const double w = std::max(corpus.sentences[i].weight, 1e-12);
    keys.emplace_back(std::pow(r.uniform01(), 1.0 / w), i);
  }
  std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < keys.size() && out.size() < count; ++i) {
    out.push_back(corpus.sentences[keys[i].second].words);
  }
  return out;
}

lm::WeightedCorpus build_lm_corpus(const querylog::FrequencyTable& table,
                                   const ExperimentConfig& cfg) {
  lm::WeightedCorpus corpus =
      build_entity_corpus(table, cfg.train_target_window);
  if (cfg.filler_sentences > 0) {
    const double entity_weight = corpus.total_weight();
    const auto filler = make_filler_sentences(
        corpus, static_cast<std::size_t>(cfg.filler_sentences),
        rng::mix_seed(cfg.seed, kStreamFiller));
    // Zipf-like weights over filler sentences, scaled to the configured
    // share of the entity traffic.
    std::vector<double> raw(filler.size());
    double raw_total = 0;
    for (std::size_t i = 0; i < filler.size(); ++i) {
      raw[i] = std::pow(static_cast<double>(i + 1), -0.7);
      raw_total += raw[i];
    }
    const double scale =
        raw_total > 0
            ? cfg.filler_weight_fraction * entity_weight / raw_total
            : 0;
    for (std::size_t i = 0; i < filler.size(); ++i) {
      corpus.sentences.push_back(
          lm::WeightedSentence{raw[i] * scale, filler[i]});
    }
  }
  return corpus;
}

struct Pipeline::Impl {
  explicit Impl(const ExperimentConfig& config) : cfg(config) {
    cfg.validate();
    decode_cfg = cfg.decode;
    decode_cfg.seed = rng::mix_seed(cfg.seed, kStreamDecode);
    train_cfg = cfg.train;
    train_cfg.seed = rng::mix_seed(cfg.seed, kStreamTrain);

    {
      StageTimer t(timings, "generate");
      querylog::SynthConfig synth_cfg = cfg.synth;
      synth_cfg.seed = rng::mix_seed(cfg.seed, kStreamSynth);
      synth = querylog::generate_synthetic_log(synth_cfg);
    }
    {
      StageTimer t(timings, "aggregate");
      table.emplace(querylog::aggregate(synth.log, cfg.window,
                                        cfg.synth.sample_threshold));
    }
    {
      StageTimer t(timings, "featurize");
      build_matrices(cfg.feature_weeks, train_matrix, test_matrix, test_labels);
    }
    {
      StageTimer t(timings, "language_model");
      corpus = build_lm_corpus(*table, cfg);
      base_lm = std::make_shared<lm::NGramLM>(lm::NGramLM::train(
          lm::inject_entity_token(corpus, cfg.boost_alpha), cfg.lm_order));
    }
    {
      StageTimer t(timings, "channel");
      std::map<std::string, double> weights;
      std::vector<std::pair<std::string, double>> sentence_weights;
      for (const lm::WeightedSentence& s : corpus.sentences) {
        for (const std::string& w : s.words) weights[w] += s.weight;
        sentence_weights.emplace_back(text::join_words(s.words), s.weight);
      }
      std::vector<std::pair<std::string, double>> pool_words(weights.begin(),
                                                             weights.end());
      channel.emplace(recognizer::WordPool(std::move(pool_words)),
                      recognizer::FrequentSentences(std::move(sentence_weights)),
                      decode_cfg);
    }
    {
      StageTimer t(timings, "test_set");
      for (std::size_t r = 0; r < test_matrix.rows(); ++r) {
        if (test_matrix.labels()[r]) {
          utterances.push_back(text::split_words(
              test_matrix.pool().name(test_matrix.entities()[r])));
        }
      }
      const auto baseline = decode_all(utterances, *base_lm);
      baseline_per_utt = baseline.per_utterance;
      baseline_wer = baseline.wer;
    }
    {
      StageTimer t(timings, "heldout");
      const std::size_t filler_begin =
          build_entity_corpus(*table, cfg.train_target_window).sentences.size();
      heldout = sample_sentences(corpus, filler_begin,
                                 static_cast<std::size_t>(cfg.heldout_sentences),
                                 rng::mix_seed(cfg.seed, kStreamHeldout));
    }
  }

  void build_matrices(int weeks, features::FeatureMatrix& train_out,
                      features::FeatureMatrix& test_out,
                      std::unordered_map<EntityId, bool>& labels_out) {
    const int n = weeks + 1;
    const querylog::FrequencyTable train_slice =
        table->slice(cfg.train_target_window - weeks, cfg.train_target_window);
    const querylog::FrequencyTable test_slice =
        table->slice(cfg.test_target_window - weeks, cfg.test_target_window);
    train_out =
        features::build_labeled_feature_matrix(train_slice, n, cfg.trend_factor);
    test_out =
        features::build_labeled_feature_matrix(test_slice, n, cfg.trend_factor);
    labels_out = querylog::label_trending(test_slice, n, cfg.trend_factor);
  }

  recognizer::WerResult decode_all(
      const std::vector<std::vector<std::string>>& refs,
      const lm::LanguageModel& model) {
    std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>
        pairs;
    pairs.reserve(refs.size());
    for (const auto& ref : refs) {
      const recognizer::HypothesisSet& hset = channel->hypotheses(ref);
      pairs.emplace_back(ref, recognizer::decode(hset, model, decode_cfg).words);
    }
    return recognizer::word_error_rate(pairs);
  }

  ranking::RankedList scores_to_ranking(const features::FeatureMatrix& matrix,
                                        const std::vector<double>& scores) {
    std::vector<ranking::ScoredEntity> entries;
    entries.reserve(matrix.rows());
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
      entries.push_back(ranking::ScoredEntity{matrix.entities()[r], scores[r]});
    }
    return ranking::RankedList(std::move(entries), matrix.pool_ptr());
  }

  struct BoostedEval {
    double wer = 0;
    double p_value = 1;
    std::optional<lm::BoostedLM> boosted_lm;
    std::size_t boosted_names = 0;
  };

  BoostedEval boost_and_decode(const ranking::RankedList& ranked,
                               std::size_t budget) {
    BoostedEval out;
    const std::vector<std::string> names = recognizer::feedback_filter(
        ranked, *base_lm, *channel, decode_cfg, budget, &recognized_cache);
    out.boosted_names = names.size();
    recognizer::WerResult wer;
    if (names.empty()) {
      wer = decode_all(utterances, *base_lm);
    } else {
      out.boosted_lm.emplace(lm::splice_entity_distribution(
          base_lm, lm::BoostConfig{cfg.boost_alpha, names}));
      wer = decode_all(utterances, *out.boosted_lm);
    }
    out.wer = wer.wer;
    std::vector<double> base_edits, boosted_edits;
    base_edits.reserve(baseline_per_utt.size());
    boosted_edits.reserve(wer.per_utterance.size());
    for (const auto& [e, _] : baseline_per_utt) {
      base_edits.push_back(static_cast<double>(e));
    }
    for (const auto& [e, _] : wer.per_utterance) {
      boosted_edits.push_back(static_cast<double>(e));
    }
    out.p_value = ranking::paired_t_test(boosted_edits, base_edits);
    return out;
  }

  struct MethodOutcome {
    ranking::EvalReport eval;
    std::optional<lm::BoostedLM> primary_boosted;
  };

  MethodOutcome evaluate_method(const ranking::RankedList& ranked) {
    MethodOutcome out;
    out.eval.ap = ranking::average_precision(ranked, test_labels);
    for (int k : cfg.k_cuts) {
      const auto pr = ranking::precision_recall_at_k(
          ranked, test_labels, static_cast<std::size_t>(k));
      BoostedEval boosted = boost_and_decode(ranked, static_cast<std::size_t>(k));
      out.eval.per_k[k] =
          ranking::KMetrics{pr.precision, pr.recall, boosted.wer};
      if (k == cfg.primary_k) {
        out.eval.p_value = boosted.p_value;
        out.primary_boosted = std::move(boosted.boosted_lm);
      }
    }
    return out;
  }

  ranking::RankedList ranked_for(const std::string& method) {
    if (method == "adaboost") {
      if (!adaboost) {
        StageTimer t(timings, "train_adaboost");
        adaboost = classifiers::train_adaboost(train_matrix, train_cfg);
      }
      return scores_to_ranking(test_matrix, adaboost->score(test_matrix));
    }
    if (method == "mlp") {
      if (!mlp) {
        StageTimer t(timings, "train_mlp");
        mlp = classifiers::train_mlp(train_matrix, train_cfg);
      }
      return scores_to_ranking(test_matrix, mlp->score(test_matrix));
    }
    if (method == "oracle") {
      std::vector<double> scores(test_matrix.rows());
      for (std::size_t r = 0; r < test_matrix.rows(); ++r) {
        scores[r] = test_matrix.labels()[r] ? 1.0 : 0.0;
      }
      return scores_to_ranking(test_matrix, scores);
    }
    const int n = cfg.feature_weeks + 1;
    const querylog::FrequencyTable test_slice = table->slice(
        cfg.test_target_window - cfg.feature_weeks, cfg.test_target_window);
    return ranking::heuristic_score(ranking::heuristic_from_name(method),
                                    test_slice, n,
                                    rng::mix_seed(cfg.seed, kStreamRandomHeuristic));
  }

  ExperimentConfig cfg;
  recognizer::DecodeConfig decode_cfg;
  classifiers::TrainConfig train_cfg;

  querylog::SyntheticLog synth;
  std::optional<querylog::FrequencyTable> table;
  features::FeatureMatrix train_matrix, test_matrix;
  std::unordered_map<EntityId, bool> test_labels;
  lm::WeightedCorpus corpus;
  std::shared_ptr<const lm::NGramLM> base_lm;
  std::optional<recognizer::ConfusionChannel> channel;
  std::unordered_map<std::string, bool> recognized_cache;
  std::vector<std::vector<std::string>> utterances;
  std::vector<std::pair<std::int64_t, std::int64_t>> baseline_per_utt;
  double baseline_wer = 0;
  std::vector<std::vector<std::string>> heldout;
  std::optional<classifiers::AdaBoostModel> adaboost;
  std::optional<classifiers::MLPModel> mlp;
  std::map<std::string, double> timings;
};

Pipeline::Pipeline(const ExperimentConfig& cfg)
    : impl_(std::make_unique<Impl>(cfg)) {}
Pipeline::~Pipeline() = default;

const querylog::SyntheticLog& Pipeline::synthetic() const {
  return impl_->synth;
}
const querylog::FrequencyTable& Pipeline::table() const {
  return *impl_->table;
}
const lm::NGramLM& Pipeline::base_lm() const { return *impl_->base_lm; }
const features::FeatureMatrix& Pipeline::train_matrix() const {
  return impl_->train_matrix;
}
const features::FeatureMatrix& Pipeline::test_matrix() const {
  return impl_->test_matrix;
}
double Pipeline::baseline_wer() const { return impl_->baseline_wer; }

RunReport Pipeline::run() {
  Impl& im = *impl_;
  RunReport report;
  report.config_json = config_to_json_text(im.cfg);
  report.no_boost_wer = im.baseline_wer;
  report.n_candidates = im.test_matrix.rows();
  report.n_positives = im.test_matrix.positives();
  report.n_utterances = im.utterances.size();

  std::map<std::string, std::optional<lm::BoostedLM>> primary_boosted;
  for (std::string_view method : kMethods) {
    const std::string name(method);
    StageTimer t(im.timings, "evaluate_" + name);
    const ranking::RankedList ranked = im.ranked_for(name);
    Impl::MethodOutcome outcome = im.evaluate_method(ranked);
    report.methods[name] = outcome.eval;
    if (name == "adaboost" || name == "mlp") {
      primary_boosted[name] = std::move(outcome.primary_boosted);
    }
  }

  {
    StageTimer t(im.timings, "non_regression");
    if (!im.heldout.empty()) {
      report.non_regression.base_wer = im.decode_all(im.heldout, *im.base_lm).wer;
      for (auto& [name, blm] : primary_boosted) {
        const double wer = blm ? im.decode_all(im.heldout, *blm).wer
                               : report.non_regression.base_wer;
        report.non_regression.boosted_wer[name] = wer;
        const double base = report.non_regression.base_wer;
        report.non_regression.relative_change[name] =
            base > 0 ? std::abs(wer - base) / base : (wer > 0 ? 1.0 : 0.0);
      }
    }
  }
  report.timings_sec = im.timings;
  return report;
}

std::vector<HistoryPoint> Pipeline::history_sweep(
    const std::vector<int>& weeks) {
  Impl& im = *impl_;
  std::vector<HistoryPoint> out;
  for (int w : weeks) {
    if (w < 1 || w > im.cfg.train_target_window - 1) {
      throw ConfigError("history sweep weeks outside available history");
    }
    StageTimer t(im.timings, "sweep_history_w" + std::to_string(w));
    features::FeatureMatrix tr, te;
    std::unordered_map<EntityId, bool> labels;
    im.build_matrices(w, tr, te, labels);

    const classifiers::AdaBoostModel ada =
        classifiers::train_adaboost(tr, im.train_cfg);
    const classifiers::MLPModel mlp = classifiers::train_mlp(tr, im.train_cfg);
    for (const auto& [name, scores] :
         std::initializer_list<std::pair<std::string, std::vector<double>>>{
             {"adaboost", ada.score(te)}, {"mlp", mlp.score(te)}}) {
      ranking::RankedList ranked = im.scores_to_ranking(te, scores);
      HistoryPoint point;
      point.weeks = w;
      point.model = name;
      point.ap = ranking::average_precision(ranked, labels);
      const Impl::BoostedEval boosted = im.boost_and_decode(
          ranked, static_cast<std::size_t>(im.cfg.primary_k));
      point.wer = boosted.wer;
      point.p_value = boosted.p_value;
      out.push_back(std::move(point));
    }
  }
  return out;
}

std::vector<FeaturePoint> Pipeline::feature_sweep() {
  Impl& im = *impl_;
  if (im.cfg.feature_weeks < 3) {
    throw ConfigError("feature sweep needs feature_weeks >= 3");
  }
  std::vector<FeaturePoint> out;
  for (int family = 1; family <= 7; ++family) {
    StageTimer t(im.timings, "sweep_feature_f" + std::to_string(family));
    const features::FeatureMatrix tr =
        features::select_feature_family(im.train_matrix, family);
    const features::FeatureMatrix te =
        features::select_feature_family(im.test_matrix, family);
    const classifiers::AdaBoostModel ada =
        classifiers::train_adaboost(tr, im.train_cfg);
    const classifiers::MLPModel mlp = classifiers::train_mlp(tr, im.train_cfg);
    for (const auto& [name, scores] :
         std::initializer_list<std::pair<std::string, std::vector<double>>>{
             {"adaboost", ada.score(te)}, {"mlp", mlp.score(te)}}) {
      ranking::RankedList ranked = im.scores_to_ranking(te, scores);
      out.push_back(FeaturePoint{
          family, name, ranking::average_precision(ranked, im.test_labels)});
    }
  }
  return out;
}

RunReport run_end_to_end(const ExperimentConfig& cfg) {
  return Pipeline(cfg).run();
}

std::vector<HistoryPoint> sweep_history(const ExperimentConfig& cfg,
                                        const std::vector<int>& weeks) {
  return Pipeline(cfg).history_sweep(weeks);
}

std::vector<FeaturePoint> sweep_individual_features(
    const ExperimentConfig& cfg) {
  return Pipeline(cfg).feature_sweep();
}

std::string RunReport::to_json_text(bool include_timings) const {
  json doc;
  doc["config"] = json::parse(config_json);
  json methods_doc = json::object();
  for (const auto& [name, eval] : methods) {
    json m;
    m["ap"] = eval.ap;
    json per_k = json::object();
    for (const auto& [k, metrics] : eval.per_k) {
      per_k[std::to_string(k)] = {{"precision", metrics.precision},
                                  {"recall", metrics.recall},
                                  {"wer", metrics.wer}};
    }
    m["per_k"] = std::move(per_k);
    if (eval.p_value) {
      m["p_value"] = *eval.p_value;
    } else {
      m["p_value"] = nullptr;
    }
    methods_doc[name] = std::move(m);
  }
  doc["methods"] = std::move(methods_doc);
  doc["no_boost"] = {{"wer", no_boost_wer}};
  doc["test"] = {{"n_candidates", n_candidates},
                 {"n_positives", n_positives},
                 {"n_utterances", n_utterances}};
  doc["non_regression"] = {
      {"base_wer", non_regression.base_wer},
      {"boosted_wer", non_regression.boosted_wer},
      {"relative_change", non_regression.relative_change}};
  if (include_timings) doc["timings_sec"] = timings_sec;
  return doc.dump(2);
}

std::string history_sweep_csv(const std::vector<HistoryPoint>& points) {
  std::string out = "weeks,model,ap,wer,p_value\n";
  char buf[128];
  for (const HistoryPoint& p : points) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g\n", p.weeks,
                  p.model.c_str(), p.ap, p.wer, p.p_value);
    out += buf;
  }
  return out;
}

std::string feature_sweep_csv(const std::vector<FeaturePoint>& points) {
  std::string out = "family,model,ap\n";
  char buf[96];
  for (const FeaturePoint& p : points) {
    std::snprintf(buf, sizeof buf, "F%d,%s,%.17g\n", p.family, p.model.c_str(),
                  p.ap);
    out += buf;
  }
  return out;
}

}  // namespace trendlm::experiment
