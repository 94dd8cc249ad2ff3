#pragma once

#include "grain/trainer.hpp"
#include "json.hpp"

namespace grain {

// JSON converters shared by checkpoints and experiment result files. Keys
// are emitted in declaration order so identical values always serialize to
// identical bytes.
nlohmann::ordered_json model_config_to_json(const ModelConfig& mc);
ModelConfig model_config_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json train_config_to_json(const TrainConfig& tc);
TrainConfig train_config_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json curves_to_json(const TrainingCurves& c);

}  // namespace grain
