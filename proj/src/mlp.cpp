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

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "trendlm/classifiers.hpp"
#include "trendlm/random.hpp"

namespace trendlm::classifiers {
namespace {

constexpr int kH = MLPModel::kHidden;

double logistic(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                : std::exp(z) / (1.0 + std::exp(z));
}

// log(1 + e^z) without overflow.
double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// Weight matrices use [input][output] layout so the innermost loops below
// run over contiguous memory.
void forward(const MLPModel& m, std::span<const double> inputs,
             std::size_t rows, std::vector<double>& a1, std::vector<double>& a2,
             std::vector<double>& z3) {
  const std::size_t dim = static_cast<std::size_t>(m.input_dim());
  a1.assign(rows * kH, 0.0);
  a2.assign(rows * kH, 0.0);
  z3.assign(rows, m.b3);
  for (std::size_t r = 0; r < rows; ++r) {
    double* h1 = a1.data() + r * kH;
    for (int j = 0; j < kH; ++j) h1[j] = m.b1[j];
    const double* x = inputs.data() + r * dim;
    for (std::size_t k = 0; k < dim; ++k) {
      const double xk = x[k];
      const double* w = m.w1.data() + k * kH;
      for (int j = 0; j < kH; ++j) h1[j] += xk * w[j];
    }
    for (int j = 0; j < kH; ++j) h1[j] = h1[j] > 0 ? h1[j] : 0.0;

    double* h2 = a2.data() + r * kH;
    for (int j = 0; j < kH; ++j) h2[j] = m.b2[j];
    for (int k = 0; k < kH; ++k) {
      const double hk = h1[k];
      if (hk == 0.0) continue;
      const double* w = m.w2.data() + k * kH;
      for (int j = 0; j < kH; ++j) h2[j] += hk * w[j];
    }
    double out = z3[r];
    for (int j = 0; j < kH; ++j) {
      h2[j] = h2[j] > 0 ? h2[j] : 0.0;
      out += h2[j] * m.w3[j];
    }
    z3[r] = out;
  }
}

std::vector<double> normalize_rows(const MLPModel& m,
                                   const features::FeatureMatrix& matrix) {
  const std::size_t dim = static_cast<std::size_t>(m.input_dim());
  std::vector<double> out(matrix.rows() * dim);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      out[r * dim + c] = (matrix.at(r, c) - m.mean[c]) / m.stddev[c];
    }
  }
  return out;
}

struct AdamState {
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
  std::vector<double> m, v;
};

void adam_step(std::vector<double>& param, const std::vector<double>& grad,
               AdamState& state, const TrainConfig& cfg, double bias1,
               double bias2) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    state.m[i] = cfg.adam_beta1 * state.m[i] + (1 - cfg.adam_beta1) * grad[i];
    state.v[i] =
        cfg.adam_beta2 * state.v[i] + (1 - cfg.adam_beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / bias1;
    const double v_hat = state.v[i] / bias2;
    param[i] -= cfg.adam_alpha * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
  }
}

}  // namespace

MLPModel make_mlp(int input_dim, std::uint64_t seed) {
  if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  MLPModel m;
  m.input_dim_ = input_dim;
  m.w1.resize(static_cast<std::size_t>(input_dim) * kH);
  m.b1.assign(kH, 0.0);
  m.w2.resize(static_cast<std::size_t>(kH) * kH);
  m.b2.assign(kH, 0.0);
  m.w3.resize(kH);
  m.b3 = 0.0;
  m.mean.assign(input_dim, 0.0);
  m.stddev.assign(input_dim, 1.0);

  rng::Rng r(rng::mix_seed(seed, 0x91f0));
  auto glorot_fill = [&](std::vector<double>& w, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& x : w) x = r.uniform(-limit, limit);
  };
  glorot_fill(m.w1, input_dim, kH);
  glorot_fill(m.w2, kH, kH);
  glorot_fill(m.w3, kH, 1);
  return m;
}

double mlp_loss_and_gradients(const MLPModel& model,
                              std::span<const double> inputs,
                              std::span<const std::uint8_t> labels,
                              std::size_t rows, MLPGradients* grads) {
  const std::size_t dim = static_cast<std::size_t>(model.input_dim());
  if (inputs.size() != rows * dim || labels.size() != rows || rows == 0) {
    throw std::invalid_argument("batch shape mismatch");
  }
  static thread_local std::vector<double> a1, a2, z3;
  forward(model, inputs, rows, a1, a2, z3);

  double loss = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    // BCE of the logistic output, written in terms of the logit.
    loss += softplus(z3[r]) - (labels[r] ? z3[r] : 0.0);
  }
  loss /= static_cast<double>(rows);

  if (grads != nullptr) {
    grads->w1.assign(model.w1.size(), 0.0);
    grads->b1.assign(kH, 0.0);
    grads->w2.assign(model.w2.size(), 0.0);
    grads->b2.assign(kH, 0.0);
    grads->w3.assign(kH, 0.0);
    grads->b3 = 0.0;
    std::vector<double> dz2(kH), dz1(kH);
    for (std::size_t r = 0; r < rows; ++r) {
      const double dz3 =
          (logistic(z3[r]) - (labels[r] ? 1.0 : 0.0)) / static_cast<double>(rows);
      const double* h1 = a1.data() + r * kH;
      const double* h2 = a2.data() + r * kH;
      grads->b3 += dz3;
      for (int j = 0; j < kH; ++j) {
        grads->w3[j] += h2[j] * dz3;
        dz2[j] = h2[j] > 0 ? model.w3[j] * dz3 : 0.0;
        grads->b2[j] += dz2[j];
      }
      for (int k = 0; k < kH; ++k) dz1[k] = 0.0;
      for (int k = 0; k < kH; ++k) {
        const double hk = h1[k];
        double* gw = grads->w2.data() + k * kH;
        const double* w = model.w2.data() + k * kH;
        double acc = 0;
        for (int j = 0; j < kH; ++j) {
          gw[j] += hk * dz2[j];
          acc += w[j] * dz2[j];
        }
        dz1[k] = hk > 0 ? acc : 0.0;
        grads->b1[k] += dz1[k];
      }
      const double* x = inputs.data() + r * dim;
      for (std::size_t k = 0; k < dim; ++k) {
        const double xk = x[k];
        double* gw = grads->w1.data() + k * kH;
        for (int j = 0; j < kH; ++j) gw[j] += xk * dz1[j];
      }
    }
  }
  return loss;
}

MLPModel train_mlp(const features::FeatureMatrix& matrix,
                   const TrainConfig& cfg) {
  cfg.validate();
  if (!matrix.has_labels()) throw std::invalid_argument("matrix has no labels");
  const std::size_t pos = matrix.positives();
  if (pos == 0 || pos == matrix.rows()) {
    throw std::invalid_argument("training labels are degenerate");
  }

  const std::size_t rows = matrix.rows();
  const std::size_t dim = matrix.cols();
  MLPModel model = make_mlp(static_cast<int>(dim), cfg.seed);
  model.columns_ = matrix.column_names();

  for (std::size_t c = 0; c < dim; ++c) {
    double sum = 0;
    for (std::size_t r = 0; r < rows; ++r) sum += matrix.at(r, c);
    const double mean = sum / static_cast<double>(rows);
    double var = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      const double d = matrix.at(r, c) - mean;
      var += d * d;
    }
    const double stddev = std::sqrt(var / static_cast<double>(rows));
    model.mean[c] = mean;
    model.stddev[c] = stddev < 1e-12 ? 1.0 : stddev;
  }

  const std::vector<double> inputs = normalize_rows(model, matrix);
  const std::vector<std::uint8_t>& labels = matrix.labels();

  AdamState s_w1(model.w1.size()), s_b1(kH), s_w2(model.w2.size()), s_b2(kH),
      s_w3(kH), s_b3(1);
  std::vector<double> b3_param(1, 0.0), b3_grad(1, 0.0);
  MLPGradients grads;

  rng::Rng shuffler(rng::mix_seed(cfg.seed, 0x5f1e));
  std::vector<std::size_t> index(rows);
  for (std::size_t i = 0; i < rows; ++i) index[i] = i;

  std::vector<double> batch_inputs;
  std::vector<std::uint8_t> batch_labels;
  double prev_loss = mlp_loss_and_gradients(model, inputs, labels, rows, nullptr);
  long step = 0;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    shuffler.shuffle(index);
    for (std::size_t start = 0; start < rows;
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(rows, start + static_cast<std::size_t>(cfg.batch_size));
      const std::size_t batch = end - start;
      batch_inputs.resize(batch * dim);
      batch_labels.resize(batch);
      for (std::size_t i = 0; i < batch; ++i) {
        const std::size_t r = index[start + i];
        std::copy_n(inputs.data() + r * dim, dim, batch_inputs.data() + i * dim);
        batch_labels[i] = labels[r];
      }
      mlp_loss_and_gradients(model, batch_inputs, batch_labels, batch, &grads);
      ++step;
      const double bias1 = 1.0 - std::pow(cfg.adam_beta1, step);
      const double bias2 = 1.0 - std::pow(cfg.adam_beta2, step);
      adam_step(model.w1, grads.w1, s_w1, cfg, bias1, bias2);
      adam_step(model.b1, grads.b1, s_b1, cfg, bias1, bias2);
      adam_step(model.w2, grads.w2, s_w2, cfg, bias1, bias2);
      adam_step(model.b2, grads.b2, s_b2, cfg, bias1, bias2);
      adam_step(model.w3, grads.w3, s_w3, cfg, bias1, bias2);
      b3_param[0] = model.b3;
      b3_grad[0] = grads.b3;
      adam_step(b3_param, b3_grad, s_b3, cfg, bias1, bias2);
      model.b3 = b3_param[0];
    }
    const double loss =
        mlp_loss_and_gradients(model, inputs, labels, rows, nullptr);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("training diverged: non-finite loss at epoch " +
                               std::to_string(epoch));
    }
    const double rel_change =
        std::abs(prev_loss - loss) / std::max(std::abs(prev_loss), 1e-12);
    prev_loss = loss;
    if (rel_change < cfg.convergence_rel_tol) break;
  }
  return model;
}

double MLPModel::score_row(std::span<const double> row) const {
  const std::size_t dim = static_cast<std::size_t>(input_dim_);
  if (row.size() != dim) throw std::invalid_argument("row width mismatch");
  std::vector<double> normalized(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    normalized[c] = (row[c] - mean[c]) / stddev[c];
  }
  static thread_local std::vector<double> a1, a2, z3;
  forward(*this, normalized, 1, a1, a2, z3);
  return logistic(z3[0]);
}

std::vector<double> MLPModel::score(
    const features::FeatureMatrix& matrix) const {
  if (matrix.column_names() != columns_) {
    throw std::invalid_argument("feature columns do not match training layout");
  }
  const std::vector<double> inputs = normalize_rows(*this, matrix);
  static thread_local std::vector<double> a1, a2, z3;
  forward(*this, inputs, matrix.rows(), a1, a2, z3);
  std::vector<double> out(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) out[r] = logistic(z3[r]);
  return out;
}

std::string MLPModel::serialize() const {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["model"] = "mlp";
  doc["input_dim"] = input_dim_;
  doc["hidden"] = kH;
  doc["columns"] = columns_;
  doc["w1"] = w1;  // [input][hidden], row-major
  doc["b1"] = b1;
  doc["w2"] = w2;  // [hidden][hidden], row-major
  doc["b2"] = b2;
  doc["w3"] = w3;
  doc["b3"] = b3;
  doc["mean"] = mean;
  doc["stddev"] = stddev;
  return doc.dump();
}

MLPModel MLPModel::deserialize(const std::string& json_text) {
  const nlohmann::json doc = nlohmann::json::parse(json_text);
  if (doc.at("model") != "mlp") {
    throw std::invalid_argument("not an mlp model document");
  }
  if (doc.at("hidden").get<int>() != kH) {
    throw std::invalid_argument("unsupported hidden width");
  }
  MLPModel m;
  m.input_dim_ = doc.at("input_dim").get<int>();
  m.columns_ = doc.at("columns").get<std::vector<std::string>>();
  m.w1 = doc.at("w1").get<std::vector<double>>();
  m.b1 = doc.at("b1").get<std::vector<double>>();
  m.w2 = doc.at("w2").get<std::vector<double>>();
  m.b2 = doc.at("b2").get<std::vector<double>>();
  m.w3 = doc.at("w3").get<std::vector<double>>();
  m.b3 = doc.at("b3").get<double>();
  m.mean = doc.at("mean").get<std::vector<double>>();
  m.stddev = doc.at("stddev").get<std::vector<double>>();
  return m;
}

}  // namespace trendlm::classifiers
