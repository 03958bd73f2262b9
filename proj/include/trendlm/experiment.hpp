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

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "trendlm/classifiers.hpp"
#include "trendlm/lm.hpp"
#include "trendlm/querylog.hpp"
#include "trendlm/ranking.hpp"
#include "trendlm/recognizer.hpp"

namespace trendlm::experiment {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Experiment-scale training budget: a tighter epoch cap than the model
/// default keeps a full run with both sweeps inside a desk-scale time
/// budget; convergence quality was checked against longer runs.
inline classifiers::TrainConfig default_experiment_train() {
  classifiers::TrainConfig t;
  t.convergence_rel_tol = 1e-4;
  t.max_epochs = 40;
  return t;
}

/// End-to-end pipeline settings. One seed drives every stage; the per-stage
/// seeds in the nested configs are derived from it.
struct ExperimentConfig {
  querylog::SynthConfig synth;
  querylog::WindowConfig window{0, 604800, 8};
  double trend_factor = 3.0;
  std::vector<int> k_cuts{250, 500, 1000};
  int primary_k = 500;
  int train_target_window = 7;
  int test_target_window = 8;
  int feature_weeks = 3;
  // Class-sentence share of the training mix. Higher than the model-side
  // default so the per-name splice mass can outbid frequent confusable
  // utterances at the default budget.
  double boost_alpha = 0.05;
  recognizer::DecodeConfig decode;
  classifiers::TrainConfig train = default_experiment_train();
  int lm_order = 4;
  int filler_sentences = 3000;
  double filler_weight_fraction = 0.5;
  int heldout_sentences = 1000;
  std::uint64_t seed = 42;

  void validate() const;  // throws ConfigError
};

ExperimentConfig config_from_json_text(const std::string& json_text);
std::string config_to_json_text(const ExperimentConfig& cfg);

/// Method roster of a full run. "oracle" ranks by the true test labels and
/// bounds what boosting can achieve.
inline constexpr std::array<std::string_view, 7> kMethods = {
    "random",   "popular_last_week", "suddenly_popular", "trending_last_week",
    "adaboost", "mlp",               "oracle"};

struct NonRegression {
  double base_wer = 0;
  std::map<std::string, double> boosted_wer;       // per ML method
  std::map<std::string, double> relative_change;   // |boosted-base|/base
};

struct RunReport {
  std::string config_json;
  std::map<std::string, ranking::EvalReport> methods;
  double no_boost_wer = 0;
  std::size_t n_candidates = 0;
  std::size_t n_positives = 0;
  std::size_t n_utterances = 0;
  NonRegression non_regression;
  std::map<std::string, double> timings_sec;

  std::string to_json_text(bool include_timings = true) const;
};

struct HistoryPoint {
  int weeks = 0;
  std::string model;
  double ap = 0;
  double wer = 0;
  double p_value = 1;
};

struct FeaturePoint {
  int family = 0;
  std::string model;
  double ap = 0;
};

/// Shared state of one experiment: synthetic log, frequency table, base
/// language model and confusion channel. Building it once lets the main
/// run and the sweeps reuse the expensive stages.
class Pipeline {
 public:
  explicit Pipeline(const ExperimentConfig& cfg);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  RunReport run();
  std::vector<HistoryPoint> history_sweep(const std::vector<int>& weeks);
  std::vector<FeaturePoint> feature_sweep();

  const querylog::SyntheticLog& synthetic() const;
  const querylog::FrequencyTable& table() const;
  const lm::NGramLM& base_lm() const;
  const features::FeatureMatrix& train_matrix() const;
  const features::FeatureMatrix& test_matrix() const;
  double baseline_wer() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunReport run_end_to_end(const ExperimentConfig& cfg);
std::vector<HistoryPoint> sweep_history(const ExperimentConfig& cfg,
                                        const std::vector<int>& weeks);
std::vector<FeaturePoint> sweep_individual_features(const ExperimentConfig& cfg);

// Deterministic corpus assembly shared by the pipeline and the CLI stages.
lm::WeightedCorpus build_entity_corpus(const querylog::FrequencyTable& table,
                                       int last_window);
std::vector<std::vector<std::string>> make_filler_sentences(
    const lm::WeightedCorpus& entity_corpus, std::size_t count,
    std::uint64_t seed);
lm::WeightedCorpus build_lm_corpus(const querylog::FrequencyTable& table,
                                   const ExperimentConfig& cfg);

/// Weighted sample (without replacement) of the corpus tail starting at
/// `first`; used to draw the general-traffic evaluation set from the
/// non-entity part of the training mix.
std::vector<std::vector<std::string>> sample_sentences(
    const lm::WeightedCorpus& corpus, std::size_t first, std::size_t count,
    std::uint64_t seed);

std::string history_sweep_csv(const std::vector<HistoryPoint>& points);
std::string feature_sweep_csv(const std::vector<FeaturePoint>& points);

}  // namespace trendlm::experiment
