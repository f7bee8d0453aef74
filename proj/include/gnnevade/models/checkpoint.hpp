#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "gnnevade/models/train.hpp"

namespace gnnevade::models {

/// Checkpoint file: the line "GNNCKPT1", one line of JSON header (model
/// metadata, training config and a parameter manifest of name, rows, cols and
/// offset into the value block), then every parameter as little-endian float64
/// in manifest order.
struct Checkpoint {
    TrainedModel model;
    nlohmann::json train_config = nlohmann::json::object();
    std::optional<nlohmann::json> adv_config;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& doc);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gnnevade::models
