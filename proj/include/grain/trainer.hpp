#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "grain/data.hpp"
#include "grain/hierarchy.hpp"
#include "grain/matrix.hpp"
#include "grain/rng.hpp"

namespace grain {

// Architecture of the classifier: a multilayer perceptron with ReLU hidden
// layers and a softmax output. An empty hidden list is plain softmax
// regression.
struct ModelConfig {
  int input_dim = 0;
  int num_classes = 0;
  std::vector<int> hidden_sizes;
  // Capacity control: appends one more hidden layer of the same width as the
  // last one (or of input_dim when there are no hidden layers).
  bool extra_layer = false;
  // Inverted dropout on the activations feeding the output layer (the last
  // hidden layer's outputs, or the raw features for softmax regression).
  double dropout_rate = 0.0;

  // Hidden widths actually built, including the control layer.
  std::vector<int> layer_widths() const;
  void validate() const;  // throws grain::Error on nonsense
};

struct Model {
  ModelConfig config;
  std::vector<Matrix> weights;              // weights[l] is fan_in x fan_out
  std::vector<std::vector<double>> biases;  // biases[l] has fan_out entries

  std::size_t parameter_count() const;
};

// Weights ~ N(0, 1/fan_in), biases zero. Draws happen layer by layer in
// row-major order, so the seed pins every parameter.
Model init_model(const ModelConfig& config, std::uint64_t seed);

// Everything the backward pass needs from a forward pass.
struct ForwardTrace {
  // activations[0] is the input batch; each later entry is a hidden layer's
  // output after ReLU (and after dropout where it applies).
  std::vector<Matrix> activations;
  Matrix logits;
  // Per-element dropout factors (0 or 1/(1-p)) applied to the activations
  // feeding the output layer; empty when dropout was inactive.
  Matrix dropout_mask;
};

// Forward pass. Train mode is engaged by passing a dropout rng: masks are
// then drawn (one uniform per unit, row-major) when the model configures
// dropout. A null rng gives the deterministic eval-mode pass; inverted
// scaling means eval needs no correction.
ForwardTrace forward(const Model& m, const Matrix& x, Rng* dropout_rng = nullptr);

// Eval-mode class probabilities; rows of x are examples.
Matrix predict_proba(const Model& m, const Matrix& x);

// Row-wise argmax of predict_proba; ties resolve to the lowest class id.
std::vector<int> predict(const Model& m, const Matrix& x);

// Eval-mode activations of the last hidden layer, one row per input; the
// compact representation a trained network assigns its inputs. Throws
// grain::Error when the model has no hidden layer.
Matrix extract_features(const Model& m, const Matrix& x);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

// Mean cross-entropy over the batch plus gradients for every parameter.
// Weight decay is not part of this loss; the optimizer adds its gradient
// directly. Pass a dropout rng for a train-mode pass, null for the
// deterministic pass the finite-difference tests rely on.
double loss_and_gradients(const Model& m, const Matrix& x,
                          const std::vector<int>& labels, Rng* dropout_rng,
                          Gradients& out);

// The learning rate decays at most this many times in one training run.
inline constexpr int kMaxLrDecays = 3;

struct TrainConfig {
  int epochs = 60;
  int batch_size = 32;
  double base_lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;  // applied to weights, not biases
  // Plateau schedule: when the epoch training loss has not improved on the
  // best seen by a relative min_improvement for plateau_patience consecutive
  // epochs, the learning rate is multiplied by lr_decay_factor (at most
  // kMaxLrDecays times) and the bad-epoch count restarts.
  int plateau_patience = 10;
  double lr_decay_factor = 0.1;
  double min_improvement = 1e-3;
  std::uint64_t seed = 0;

  void validate() const;  // throws grain::Error on nonsense
};

// Per-epoch traces. Accuracies are computed in eval mode after the epoch's
// updates. train_accuracy and test_accuracy_coarse map predictions through
// the hierarchy to coarse classes before comparing (the coarse-level
// evaluation protocol); test_accuracy_fine is the exact match in the model's
// own label space. Under a coarse-identity hierarchy the mapping is a no-op
// and the fine/coarse test series coincide.
struct TrainingCurves {
  std::vector<double> train_loss;
  std::vector<double> train_accuracy;
  std::vector<double> test_accuracy_fine;
  std::vector<double> test_accuracy_coarse;
  std::vector<double> learning_rate;
};

struct TrainResult {
  Model model;
  TrainingCurves curves;
};

// Minibatch SGD with momentum and weight decay: per step, velocity
// v <- momentum*v - lr*(grad + weight_decay*param), then param += v.
// Dataset labels must index the model's class space; h maps that space to
// coarse classes for the curves. Examples are reshuffled every epoch and
// the last short batch is kept. The epoch loss is the sample-weighted mean
// of batch losses. Two independent streams are derived from tc.seed
// ("order" for the shuffle, "dropout" for the masks), so disabling dropout
// does not perturb batch order. Throws grain::Error if the loss turns
// non-finite, naming the epoch.
TrainResult train(const Model& init, const Dataset& train_ds, const Dataset& test_ds,
                  const LabelHierarchy& h, const TrainConfig& tc);

// Coarse-evaluated accuracy of the model on a dataset whose labels index the
// model's class space.
double evaluate_coarse(const Model& m, const Dataset& ds, const LabelHierarchy& h);
// Exact-match accuracy in the model's class space.
double evaluate_fine(const Model& m, const Dataset& ds);

// Curves as CSV: epoch,lr,train_loss,train_acc,test_acc_fine,test_acc_coarse.
void save_curves_csv(const TrainingCurves& c, std::ostream& out);

// Model checkpoint: config, per-layer weight/bias arrays (row-major), and
// the seed of the training run that produced it.
struct LoadedCheckpoint {
  Model model;
  std::uint64_t train_seed = 0;
};
std::string checkpoint_json(const Model& m, std::uint64_t train_seed);
LoadedCheckpoint load_checkpoint(const std::string& json_text);

}  // namespace grain
