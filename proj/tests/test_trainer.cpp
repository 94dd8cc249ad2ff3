#include "grain/trainer.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "grain/data.hpp"
#include "grain/errors.hpp"
#include "grain/hierarchy.hpp"
#include "grain/rng.hpp"

using grain::Dataset;
using grain::LabelHierarchy;
using grain::Model;
using grain::ModelConfig;
using grain::TrainConfig;

namespace {

LabelHierarchy two_by_two() {
  return LabelHierarchy({"a0", "a1", "b0", "b1"}, {"A", "B"}, {0, 0, 1, 1});
}

// Four well-separated Gaussian blobs; softmax regression solves this.
Dataset blobs(int per_class, double sigma, std::uint64_t seed) {
  grain::SyntheticSpec spec{two_by_two(), per_class, 4, 8.0, 2.0, sigma, seed};
  return grain::generate_synthetic(spec);
}

ModelConfig softmax_config(int dim, int classes) {
  ModelConfig mc;
  mc.input_dim = dim;
  mc.num_classes = classes;
  return mc;
}

ModelConfig mlp_config(int dim, int classes, std::vector<int> hidden) {
  ModelConfig mc = softmax_config(dim, classes);
  mc.hidden_sizes = std::move(hidden);
  return mc;
}

}  // namespace

TEST_CASE("layer_widths and parameter_count follow the architecture") {
  ModelConfig plain = softmax_config(16, 10);
  CHECK(plain.layer_widths().empty());
  CHECK(grain::init_model(plain, 1).parameter_count() == 16 * 10 + 10);

  ModelConfig mlp = mlp_config(16, 10, {32, 8});
  CHECK(mlp.layer_widths() == std::vector<int>{32, 8});
  CHECK(grain::init_model(mlp, 1).parameter_count() ==
        (16 * 32 + 32) + (32 * 8 + 8) + (8 * 10 + 10));

  // the control layer copies the last hidden width, or the input width
  ModelConfig extra = mlp;
  extra.extra_layer = true;
  CHECK(extra.layer_widths() == std::vector<int>{32, 8, 8});
  ModelConfig extra_plain = plain;
  extra_plain.extra_layer = true;
  CHECK(extra_plain.layer_widths() == std::vector<int>{16});
  CHECK(grain::init_model(extra_plain, 1).parameter_count() >
        grain::init_model(plain, 1).parameter_count());
}

TEST_CASE("model config validation") {
  CHECK_THROWS_AS(grain::init_model(softmax_config(0, 4), 1), grain::Error);
  CHECK_THROWS_AS(grain::init_model(softmax_config(4, 0), 1), grain::Error);
  CHECK_THROWS_AS(grain::init_model(mlp_config(4, 4, {0}), 1), grain::Error);
  ModelConfig bad = softmax_config(4, 4);
  bad.dropout_rate = 1.0;
  CHECK_THROWS_AS(grain::init_model(bad, 1), grain::Error);
  bad.dropout_rate = -0.1;
  CHECK_THROWS_AS(grain::init_model(bad, 1), grain::Error);
}

TEST_CASE("init_model is seed-deterministic with zero biases") {
  const ModelConfig mc = mlp_config(8, 3, {5});
  const Model a = grain::init_model(mc, 7);
  const Model b = grain::init_model(mc, 7);
  const Model c = grain::init_model(mc, 8);
  CHECK(a.weights == b.weights);
  CHECK(a.biases == b.biases);
  CHECK(a.weights != c.weights);
  for (const auto& bias : a.biases) {
    for (double v : bias) {
      CHECK(v == 0.0);
    }
  }
  // weight variance tracks 1/fan_in loosely
  double sumsq = 0.0;
  for (double v : a.weights[0].values) {
    sumsq += v * v;
  }
  const double var = sumsq / a.weights[0].values.size();
  CHECK(var > 0.3 / 8.0);
  CHECK(var < 3.0 / 8.0);
}

TEST_CASE("uninformative input gives exactly the ln(num_classes) loss") {
  // zero features make the logits equal to the (zero) biases, so every class
  // gets probability 1/4 regardless of the random weights
  const grain::Matrix x(8, 4);
  const std::vector<int> labels = {0, 1, 2, 3, 0, 1, 2, 3};
  const Model m = grain::init_model(softmax_config(4, 4), 5);
  grain::Gradients g;
  const double loss = grain::loss_and_gradients(m, x, labels, nullptr, g);
  CHECK(loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("predict_proba rows are distributions and predict matches argmax") {
  const Dataset ds = blobs(10, 1.0, 9);
  const Model m = grain::init_model(mlp_config(4, 4, {6}), 2);
  const grain::Matrix p = grain::predict_proba(m, ds.features);
  CHECK(p.rows == ds.size());
  CHECK(p.cols == 4);
  for (std::size_t i = 0; i < p.rows; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(p(i, j) >= 0.0);
      sum += p(i, j);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  const std::vector<int> preds = grain::predict(m, ds.features);
  for (std::size_t i = 0; i < p.rows; ++i) {
    CHECK(p(i, preds[i]) >= p(i, 0));
    CHECK(p(i, preds[i]) >= p(i, 3));
  }
}

TEST_CASE("extract_features returns hidden activations or refuses") {
  const Dataset ds = blobs(5, 1.0, 11);
  const Model mlp = grain::init_model(mlp_config(4, 4, {7}), 3);
  const grain::Matrix f = grain::extract_features(mlp, ds.features);
  CHECK(f.rows == ds.size());
  CHECK(f.cols == 7);
  for (double v : f.values) {
    CHECK(v >= 0.0);  // post-ReLU
  }
  const Model plain = grain::init_model(softmax_config(4, 4), 3);
  CHECK_THROWS_AS(grain::extract_features(plain, ds.features), grain::Error);
}

// The gradient oracle: central finite differences on the scalar loss.
// Deterministic because dropout is off and the loss is a pure function.
TEST_CASE("analytic gradients match finite differences") {
  grain::Rng pick(271828);
  const Dataset ds = blobs(6, 1.5, 13);
  const double step = 1e-5;
  const double tol = 1e-4;
  for (int trial = 0; trial < 20; ++trial) {
    const bool use_hidden = trial % 2 == 0;
    ModelConfig mc = use_hidden ? mlp_config(4, 4, {5}) : softmax_config(4, 4);
    Model m = grain::init_model(mc, 1000 + trial);
    grain::Gradients g;
    grain::loss_and_gradients(m, ds.features, ds.fine_labels, nullptr, g);

    // probe a handful of random coordinates in every layer
    for (std::size_t layer = 0; layer < m.weights.size(); ++layer) {
      for (int probe = 0; probe < 3; ++probe) {
        const std::size_t wi = pick.uniform_below(m.weights[layer].values.size());
        const double saved = m.weights[layer].values[wi];
        grain::Gradients scratch;
        m.weights[layer].values[wi] = saved + step;
        const double up = grain::loss_and_gradients(m, ds.features, ds.fine_labels,
                                                    nullptr, scratch);
        m.weights[layer].values[wi] = saved - step;
        const double down = grain::loss_and_gradients(m, ds.features, ds.fine_labels,
                                                      nullptr, scratch);
        m.weights[layer].values[wi] = saved;
        const double fd = (up - down) / (2.0 * step);
        const double an = g.weights[layer].values[wi];
        const double rel = std::abs(fd - an) / std::max(1.0, std::abs(fd) + std::abs(an));
        CHECK(rel < tol);
      }
      const std::size_t bi = pick.uniform_below(m.biases[layer].size());
      const double saved = m.biases[layer][bi];
      grain::Gradients scratch;
      m.biases[layer][bi] = saved + step;
      const double up = grain::loss_and_gradients(m, ds.features, ds.fine_labels,
                                                  nullptr, scratch);
      m.biases[layer][bi] = saved - step;
      const double down = grain::loss_and_gradients(m, ds.features, ds.fine_labels,
                                                    nullptr, scratch);
      m.biases[layer][bi] = saved;
      const double fd = (up - down) / (2.0 * step);
      const double an = g.biases[layer][bi];
      const double rel = std::abs(fd - an) / std::max(1.0, std::abs(fd) + std::abs(an));
      CHECK(rel < tol);
    }
  }
}

TEST_CASE("dropout mask zeroes both activation and its gradient path") {
  // With rate just under 1 every unit is dropped with near certainty; the
  // input-layer gradient then vanishes for a softmax-regression model.
  ModelConfig mc = softmax_config(4, 4);
  mc.dropout_rate = 0.999;
  const Model m = grain::init_model(mc, 21);
  const Dataset ds = blobs(8, 1.0, 17);
  grain::Rng drop(5);
  const grain::ForwardTrace t = grain::forward(m, ds.features, &drop);
  CHECK(t.dropout_mask.rows == ds.size());
  bool any_zero = false;
  for (double v : t.activations.back().values) {
    any_zero = any_zero || v == 0.0;
  }
  CHECK(any_zero);
  // eval mode ignores dropout entirely
  const grain::ForwardTrace eval = grain::forward(m, ds.features, nullptr);
  CHECK(eval.dropout_mask.values.empty());
  CHECK(eval.activations.back() == ds.features);
}

TEST_CASE("training descends on separable data and is bit-reproducible") {
  const LabelHierarchy h = two_by_two();
  // one draw split in two, so train and test share the class geometry
  const grain::SyntheticSpec spec{h, 60, 6, 4.0, 2.0, 0.4, 23};
  const auto [train_ds, test_ds] =
      grain::train_test_split(grain::generate_synthetic(spec), 0.25, 24);
  TrainConfig tc;
  tc.epochs = 30;
  tc.base_lr = 0.05;
  tc.seed = 6;
  const Model init = grain::init_model(softmax_config(6, 4), 31);
  const grain::TrainResult a = grain::train(init, train_ds, test_ds, h, tc);
  CHECK(a.curves.train_loss.size() == 30);
  CHECK(a.curves.learning_rate.size() == 30);
  CHECK(a.curves.train_loss.back() < a.curves.train_loss.front());
  CHECK(a.curves.test_accuracy_fine.back() > 0.9);
  CHECK(a.curves.test_accuracy_coarse.back() >= a.curves.test_accuracy_fine.back());
  CHECK(grain::evaluate_fine(a.model, test_ds) ==
        a.curves.test_accuracy_fine.back());
  CHECK(grain::evaluate_coarse(a.model, test_ds, h) ==
        a.curves.test_accuracy_coarse.back());

  const grain::TrainResult b = grain::train(init, train_ds, test_ds, h, tc);
  CHECK(a.model.weights == b.model.weights);
  CHECK(a.model.biases == b.model.biases);
  CHECK(a.curves.train_loss == b.curves.train_loss);
}

TEST_CASE("plateau schedule decays at most kMaxLrDecays times") {
  const LabelHierarchy h = two_by_two();
  const Dataset ds = blobs(10, 1.0, 29);
  TrainConfig tc;
  tc.epochs = 50;
  tc.plateau_patience = 4;
  tc.base_lr = 0.05;
  tc.lr_decay_factor = 0.5;
  tc.min_improvement = 10.0;  // unattainable: every epoch counts as bad
  tc.seed = 2;
  const Model init = grain::init_model(softmax_config(4, 4), 3);
  const grain::TrainResult r = grain::train(init, ds, ds, h, tc);
  // first decay after `patience` epochs, then every `patience` epochs, then
  // the floor holds
  CHECK(r.curves.learning_rate[0] == 0.05);
  CHECK(r.curves.learning_rate[3] == 0.05);
  CHECK(r.curves.learning_rate[4] == 0.025);
  CHECK(r.curves.learning_rate[8] == 0.0125);
  CHECK(r.curves.learning_rate[12] == 0.00625);
  CHECK(r.curves.learning_rate.back() == 0.00625);  // kMaxLrDecays == 3
}

TEST_CASE("epoch loss is reported before the weight-decay penalty") {
  // One full-batch step per epoch: the first epoch's loss is the loss at the
  // initial weights, identical whatever the decay setting.
  const LabelHierarchy h = two_by_two();
  const Dataset ds = blobs(16, 1.0, 37);
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = static_cast<int>(ds.size());
  tc.seed = 4;
  const Model init = grain::init_model(softmax_config(4, 4), 5);
  TrainConfig heavy = tc;
  heavy.weight_decay = 0.5;
  const double plain_loss = grain::train(init, ds, ds, h, tc).curves.train_loss[0];
  const double heavy_loss = grain::train(init, ds, ds, h, heavy).curves.train_loss[0];
  CHECK(plain_loss == heavy_loss);
}

TEST_CASE("train validates its config and data") {
  const LabelHierarchy h = two_by_two();
  const Dataset ds = blobs(5, 1.0, 41);
  const Model init = grain::init_model(softmax_config(4, 4), 1);
  TrainConfig tc;
  tc.epochs = 0;
  CHECK_THROWS_AS(grain::train(init, ds, ds, h, tc), grain::Error);
  tc = TrainConfig{};
  tc.batch_size = 0;
  CHECK_THROWS_AS(grain::train(init, ds, ds, h, tc), grain::Error);
  tc = TrainConfig{};
  tc.base_lr = 0.0;
  CHECK_THROWS_AS(grain::train(init, ds, ds, h, tc), grain::Error);
  tc = TrainConfig{};
  tc.momentum = 1.0;
  CHECK_THROWS_AS(grain::train(init, ds, ds, h, tc), grain::Error);
  tc = TrainConfig{};
  tc.lr_decay_factor = 1.5;
  CHECK_THROWS_AS(grain::train(init, ds, ds, h, tc), grain::Error);

  // labels outside the model's class space
  Dataset bad = ds;
  bad.fine_labels[0] = 99;
  tc = TrainConfig{};
  tc.epochs = 1;
  CHECK_THROWS_AS(grain::train(init, bad, ds, h, tc), grain::Error);
}

TEST_CASE("diverging training reports a non-finite loss with the epoch") {
  const LabelHierarchy h = two_by_two();
  const Dataset ds = blobs(10, 1.0, 43);
  const Model init = grain::init_model(softmax_config(4, 4), 2);
  TrainConfig tc;
  tc.epochs = 5;
  // after one giant step the weight-decay term is lr * wd * |w| ~ 5e316,
  // which overflows the velocity and poisons the next forward pass
  tc.base_lr = 1e160;
  tc.seed = 9;
  CHECK_THROWS_WITH_AS(grain::train(init, ds, ds, h, tc),
                       doctest::Contains("epoch"), grain::Error);
}

TEST_CASE("curves csv lists one row per epoch") {
  const LabelHierarchy h = two_by_two();
  const Dataset ds = blobs(10, 1.0, 47);
  TrainConfig tc;
  tc.epochs = 3;
  tc.seed = 8;
  const Model init = grain::init_model(softmax_config(4, 4), 6);
  const grain::TrainResult r = grain::train(init, ds, ds, h, tc);
  std::ostringstream out;
  grain::save_curves_csv(r.curves, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,lr,train_loss,train_acc,test_acc_fine,test_acc_coarse");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("checkpoints round trip bit-for-bit") {
  const Model m = grain::init_model(mlp_config(6, 3, {4}), 55);
  const std::string text = grain::checkpoint_json(m, 12345);
  const grain::LoadedCheckpoint back = grain::load_checkpoint(text);
  CHECK(back.train_seed == 12345);
  CHECK(back.model.weights == m.weights);
  CHECK(back.model.biases == m.biases);
  CHECK(back.model.config.hidden_sizes == m.config.hidden_sizes);
  CHECK(grain::checkpoint_json(back.model, back.train_seed) == text);

  CHECK_THROWS_AS(grain::load_checkpoint("{}"), grain::Error);
  CHECK_THROWS_AS(grain::load_checkpoint("not json"), grain::Error);
  // a tampered shape chain is rejected
  std::string broken = text;
  const auto pos = broken.find("\"input_dim\": 6");
  REQUIRE(pos != std::string::npos);
  broken.replace(pos, 14, "\"input_dim\": 7");
  CHECK_THROWS_AS(grain::load_checkpoint(broken), grain::Error);
}
