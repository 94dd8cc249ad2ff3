#include "grain/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "grain/errors.hpp"
#include "grain/kernels.hpp"
#include "grain/metrics.hpp"
#include "grain/serialize.hpp"

namespace grain {

std::vector<int> ModelConfig::layer_widths() const {
  std::vector<int> widths = hidden_sizes;
  if (extra_layer) {
    widths.push_back(widths.empty() ? input_dim : widths.back());
  }
  return widths;
}

void ModelConfig::validate() const {
  if (input_dim <= 0) {
    throw Error("model config: input_dim must be positive");
  }
  if (num_classes <= 0) {
    throw Error("model config: num_classes must be positive");
  }
  for (int w : hidden_sizes) {
    if (w <= 0) {
      throw Error("model config: hidden widths must be positive");
    }
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw Error("model config: dropout_rate must be in [0, 1)");
  }
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const Matrix& w : weights) {
    n += w.values.size();
  }
  for (const auto& b : biases) {
    n += b.size();
  }
  return n;
}

Model init_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Model m;
  m.config = config;
  std::vector<int> dims;
  dims.push_back(config.input_dim);
  for (int w : config.layer_widths()) {
    dims.push_back(w);
  }
  dims.push_back(config.num_classes);

  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    Matrix w(fan_in, fan_out);
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : w.values) {
      v = scale * rng.normal();
    }
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(fan_out, 0.0);
  }
  return m;
}

ForwardTrace forward(const Model& m, const Matrix& x, Rng* dropout_rng) {
  if (x.cols != static_cast<std::size_t>(m.config.input_dim)) {
    throw Error("forward: feature dimension differs from model input_dim");
  }
  ForwardTrace t;
  const std::size_t layers = m.weights.size();
  t.activations.reserve(layers);
  t.activations.push_back(x);
  for (std::size_t l = 0; l < layers; ++l) {
    if (l + 1 == layers && dropout_rng != nullptr && m.config.dropout_rate > 0.0) {
      // Mask the tensor feeding the output layer. activations owns a copy of
      // the input, so masking in place never touches the caller's batch.
      const double p = m.config.dropout_rate;
      const double keep_scale = 1.0 / (1.0 - p);
      Matrix& a = t.activations.back();
      t.dropout_mask = Matrix(a.rows, a.cols);
      for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double factor = dropout_rng->uniform() < p ? 0.0 : keep_scale;
        t.dropout_mask.values[i] = factor;
        a.values[i] *= factor;
      }
    }
    Matrix z;
    kernels::affine(t.activations.back(), m.weights[l], m.biases[l], z);
    if (l + 1 == layers) {
      t.logits = std::move(z);
    } else {
      kernels::relu(z);
      t.activations.push_back(std::move(z));
    }
  }
  return t;
}

Matrix predict_proba(const Model& m, const Matrix& x) {
  ForwardTrace t = forward(m, x, nullptr);
  kernels::softmax_rows(t.logits);
  return std::move(t.logits);
}

std::vector<int> predict(const Model& m, const Matrix& x) {
  const Matrix probs = predict_proba(m, x);
  return kernels::argmax_rows(probs);
}

Matrix extract_features(const Model& m, const Matrix& x) {
  if (m.config.layer_widths().empty()) {
    throw Error("extract_features: model has no hidden layer");
  }
  ForwardTrace t = forward(m, x, nullptr);
  return std::move(t.activations.back());
}

double loss_and_gradients(const Model& m, const Matrix& x,
                          const std::vector<int>& labels, Rng* dropout_rng,
                          Gradients& out) {
  if (x.rows == 0) {
    throw Error("loss_and_gradients: empty batch");
  }
  if (labels.size() != x.rows) {
    throw Error("loss_and_gradients: label count differs from batch rows");
  }
  ForwardTrace t = forward(m, x, dropout_rng);

  Matrix probs = t.logits;
  kernels::softmax_rows(probs);

  const double n = static_cast<double>(x.rows);
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.rows; ++i) {
    const int y = labels[i];
    if (y < 0 || y >= m.config.num_classes) {
      throw Error("loss_and_gradients: label outside the model's class space");
    }
    // The max-shifted softmax keeps the true-class probability far above the
    // denormal range for any realistic logit spread; the floor only stops
    // pathological inputs from producing -inf.
    loss -= std::log(std::max(probs(i, y), 1e-300));
  }
  loss /= n;

  // dL/dlogits = (probs - onehot) / n
  Matrix dz = std::move(probs);
  for (std::size_t i = 0; i < dz.rows; ++i) {
    dz(i, labels[i]) -= 1.0;
  }
  for (double& v : dz.values) {
    v /= n;
  }

  const std::size_t layers = m.weights.size();
  out.weights.resize(layers);
  out.biases.resize(layers);
  for (std::size_t l = layers; l-- > 0;) {
    kernels::matmul_at_b(t.activations[l], dz, out.weights[l]);
    out.biases[l].assign(m.biases[l].size(), 0.0);
    kernels::col_sums(dz, out.biases[l]);
    if (l == 0) {
      break;
    }
    Matrix da;
    kernels::matmul_a_bt(dz, m.weights[l], da);
    if (l == layers - 1 && t.dropout_mask.rows > 0) {
      for (std::size_t i = 0; i < da.values.size(); ++i) {
        da.values[i] *= t.dropout_mask.values[i];
      }
    }
    // Stored activations are post-dropout, but a zeroed unit has zero
    // gradient through both gates, so one mask pass plus the ReLU gate is
    // exact.
    kernels::relu_backward(t.activations[l], da);
    dz = std::move(da);
  }
  return loss;
}

void TrainConfig::validate() const {
  if (epochs <= 0) {
    throw Error("train config: epochs must be positive");
  }
  if (batch_size <= 0) {
    throw Error("train config: batch_size must be positive");
  }
  if (!(base_lr > 0.0)) {
    throw Error("train config: base_lr must be positive");
  }
  if (momentum < 0.0 || momentum >= 1.0) {
    throw Error("train config: momentum must be in [0, 1)");
  }
  if (weight_decay < 0.0) {
    throw Error("train config: weight_decay must be non-negative");
  }
  if (plateau_patience <= 0) {
    throw Error("train config: plateau_patience must be positive");
  }
  if (!(lr_decay_factor > 0.0) || lr_decay_factor >= 1.0) {
    throw Error("train config: lr_decay_factor must be in (0, 1)");
  }
  if (min_improvement < 0.0) {
    throw Error("train config: min_improvement must be non-negative");
  }
}

double evaluate_coarse(const Model& m, const Dataset& ds, const LabelHierarchy& h) {
  const std::vector<int> preds = predict(m, ds.features);
  return coarse_accuracy(ds.fine_labels, preds, h);
}

double evaluate_fine(const Model& m, const Dataset& ds) {
  const std::vector<int> preds = predict(m, ds.features);
  return fine_accuracy(ds.fine_labels, preds);
}

namespace {

Matrix gather_rows(const Matrix& x, const std::vector<int>& rows, std::size_t begin,
                   std::size_t end) {
  Matrix out(end - begin, x.cols);
  for (std::size_t i = begin; i < end; ++i) {
    std::copy_n(x.row(rows[i]), x.cols, out.row(i - begin));
  }
  return out;
}

}  // namespace

TrainResult train(const Model& init, const Dataset& train_ds, const Dataset& test_ds,
                  const LabelHierarchy& h, const TrainConfig& tc) {
  tc.validate();
  if (train_ds.size() == 0 || test_ds.size() == 0) {
    throw Error("train: datasets must be non-empty");
  }
  if (train_ds.dim() != static_cast<std::size_t>(init.config.input_dim)) {
    throw Error("train: dataset dimension differs from model input_dim");
  }

  TrainResult result;
  result.model = init;
  Model& m = result.model;

  Rng order_rng(derive_seed(tc.seed, "order"));
  Rng dropout_rng(derive_seed(tc.seed, "dropout"));

  std::vector<Matrix> vel_w;
  std::vector<std::vector<double>> vel_b;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    vel_w.emplace_back(m.weights[l].rows, m.weights[l].cols, 0.0);
    vel_b.emplace_back(m.biases[l].size(), 0.0);
  }

  const std::size_t n = train_ds.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  double lr = tc.base_lr;
  double best_loss = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;
  int decays = 0;
  Gradients grads;

  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < n; begin += tc.batch_size) {
      const std::size_t end = std::min(n, begin + tc.batch_size);
      const Matrix bx = gather_rows(train_ds.features, order, begin, end);
      std::vector<int> by(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        by[i - begin] = train_ds.fine_labels[order[i]];
      }
      const double batch_loss = loss_and_gradients(m, bx, by, &dropout_rng, grads);
      if (!std::isfinite(batch_loss)) {
        throw Error("train: loss diverged at epoch " + std::to_string(epoch) +
                    ", step " + std::to_string(begin / tc.batch_size));
      }
      loss_sum += batch_loss * static_cast<double>(end - begin);

      for (std::size_t l = 0; l < m.weights.size(); ++l) {
        Matrix& w = m.weights[l];
        Matrix& vw = vel_w[l];
        const Matrix& gw = grads.weights[l];
        for (std::size_t i = 0; i < w.values.size(); ++i) {
          vw.values[i] = tc.momentum * vw.values[i] -
                         lr * (gw.values[i] + tc.weight_decay * w.values[i]);
          w.values[i] += vw.values[i];
        }
        auto& b = m.biases[l];
        auto& vb = vel_b[l];
        const auto& gb = grads.biases[l];
        for (std::size_t i = 0; i < b.size(); ++i) {
          vb[i] = tc.momentum * vb[i] - lr * gb[i];
          b[i] += vb[i];
        }
      }
    }
    const double epoch_loss = loss_sum / static_cast<double>(n);

    result.curves.train_loss.push_back(epoch_loss);
    result.curves.learning_rate.push_back(lr);
    result.curves.train_accuracy.push_back(evaluate_coarse(m, train_ds, h));
    result.curves.test_accuracy_fine.push_back(evaluate_fine(m, test_ds));
    result.curves.test_accuracy_coarse.push_back(evaluate_coarse(m, test_ds, h));

    // Plateau bookkeeping. The best-seen loss survives a decay, matching the
    // usual reduce-on-plateau behavior.
    if (epoch_loss < best_loss * (1.0 - tc.min_improvement)) {
      best_loss = epoch_loss;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs >= tc.plateau_patience && decays < kMaxLrDecays) {
        lr *= tc.lr_decay_factor;
        ++decays;
        bad_epochs = 0;
      }
    }
  }
  return result;
}

void save_curves_csv(const TrainingCurves& c, std::ostream& out) {
  out << "epoch,lr,train_loss,train_acc,test_acc_fine,test_acc_coarse\n";
  char buf[32];
  auto fmt = [&buf](double v) {
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
  };
  for (std::size_t e = 0; e < c.train_loss.size(); ++e) {
    out << e << ',' << fmt(c.learning_rate[e]) << ',' << fmt(c.train_loss[e]) << ','
        << fmt(c.train_accuracy[e]) << ',' << fmt(c.test_accuracy_fine[e]) << ','
        << fmt(c.test_accuracy_coarse[e]) << '\n';
  }
}

std::string checkpoint_json(const Model& m, std::uint64_t train_seed) {
  nlohmann::ordered_json doc;
  doc["format"] = "labelgrain-model-v1";
  doc["config"] = model_config_to_json(m.config);
  doc["train_seed"] = train_seed;
  doc["layers"] = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    const Matrix& w = m.weights[l];
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < w.rows; ++i) {
      rows.push_back(std::vector<double>(w.row(i), w.row(i) + w.cols));
    }
    doc["layers"].push_back({{"weights", std::move(rows)}, {"bias", m.biases[l]}});
  }
  return doc.dump(2) + "\n";
}

LoadedCheckpoint load_checkpoint(const std::string& json_text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  if (doc.value("format", "") != "labelgrain-model-v1") {
    throw Error("checkpoint: unrecognized format marker");
  }
  LoadedCheckpoint ck;
  ck.model.config = model_config_from_json(doc.at("config"));
  ck.model.config.validate();
  ck.train_seed = doc.at("train_seed").get<std::uint64_t>();
  for (const auto& layer : doc.at("layers")) {
    const auto& rows = layer.at("weights");
    if (rows.empty()) {
      throw Error("checkpoint: empty weight matrix");
    }
    Matrix w(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < w.rows; ++i) {
      const auto row = rows.at(i).get<std::vector<double>>();
      if (row.size() != w.cols) {
        throw Error("checkpoint: ragged weight matrix");
      }
      std::copy(row.begin(), row.end(), w.row(i));
    }
    ck.model.weights.push_back(std::move(w));
    ck.model.biases.push_back(layer.at("bias").get<std::vector<double>>());
  }
  // Validate the shape chain input_dim -> widths -> num_classes.
  std::vector<int> dims;
  dims.push_back(ck.model.config.input_dim);
  for (int w : ck.model.config.layer_widths()) {
    dims.push_back(w);
  }
  dims.push_back(ck.model.config.num_classes);
  if (ck.model.weights.size() + 1 != dims.size()) {
    throw Error("checkpoint: layer count differs from config");
  }
  for (std::size_t l = 0; l < ck.model.weights.size(); ++l) {
    if (ck.model.weights[l].rows != static_cast<std::size_t>(dims[l]) ||
        ck.model.weights[l].cols != static_cast<std::size_t>(dims[l + 1]) ||
        ck.model.biases[l].size() != static_cast<std::size_t>(dims[l + 1])) {
      throw Error("checkpoint: layer " + std::to_string(l) + " shape differs from config");
    }
  }
  return ck;
}

}  // namespace grain
