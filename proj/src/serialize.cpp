#include "grain/serialize.hpp"

namespace grain {

nlohmann::ordered_json model_config_to_json(const ModelConfig& mc) {
  return {{"input_dim", mc.input_dim},
          {"num_classes", mc.num_classes},
          {"hidden_sizes", mc.hidden_sizes},
          {"extra_layer", mc.extra_layer},
          {"dropout_rate", mc.dropout_rate}};
}

ModelConfig model_config_from_json(const nlohmann::ordered_json& j) {
  ModelConfig mc;
  mc.input_dim = j.at("input_dim").get<int>();
  mc.num_classes = j.at("num_classes").get<int>();
  mc.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
  mc.extra_layer = j.at("extra_layer").get<bool>();
  mc.dropout_rate = j.at("dropout_rate").get<double>();
  return mc;
}

nlohmann::ordered_json train_config_to_json(const TrainConfig& tc) {
  return {{"epochs", tc.epochs},
          {"batch_size", tc.batch_size},
          {"base_lr", tc.base_lr},
          {"momentum", tc.momentum},
          {"weight_decay", tc.weight_decay},
          {"plateau_patience", tc.plateau_patience},
          {"lr_decay_factor", tc.lr_decay_factor},
          {"min_improvement", tc.min_improvement},
          {"seed", tc.seed}};
}

TrainConfig train_config_from_json(const nlohmann::ordered_json& j) {
  TrainConfig tc;
  tc.epochs = j.at("epochs").get<int>();
  tc.batch_size = j.at("batch_size").get<int>();
  tc.base_lr = j.at("base_lr").get<double>();
  tc.momentum = j.at("momentum").get<double>();
  tc.weight_decay = j.at("weight_decay").get<double>();
  tc.plateau_patience = j.at("plateau_patience").get<int>();
  tc.lr_decay_factor = j.at("lr_decay_factor").get<double>();
  tc.min_improvement = j.at("min_improvement").get<double>();
  tc.seed = j.at("seed").get<std::uint64_t>();
  return tc;
}

nlohmann::ordered_json curves_to_json(const TrainingCurves& c) {
  return {{"train_loss", c.train_loss},
          {"train_acc", c.train_accuracy},
          {"test_acc_fine", c.test_accuracy_fine},
          {"test_acc_coarse", c.test_accuracy_coarse},
          {"lr", c.learning_rate}};
}

}  // namespace grain
