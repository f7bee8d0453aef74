#pragma once

#include <string>

#include <json.hpp>

#include "gnnevade/attacks/attacks.hpp"
#include "gnnevade/models/train.hpp"

namespace gnnevade::advtrain {

using graph::Graph;
using models::Architecture;
using models::TrainedModel;

enum class AttackerStrategy { random, topology };

const char* to_string(AttackerStrategy s) noexcept;
AttackerStrategy strategy_from_string(const std::string& s);

struct AdvTrainConfig {
    models::TrainConfig base;
    AttackerStrategy strategy = AttackerStrategy::random;
    /// Inner attack. iterations = 0 disables it, like eps0 = 0.
    attacks::Budget inner = default_inner_budget();

    static attacks::Budget default_inner_budget();
    void validate(graph::FeatureKind kind) const;
};

nlohmann::json to_json(const AdvTrainConfig& config);
AdvTrainConfig adv_config_from_json(const nlohmann::json& j);

/// Trains on the mean of the clean loss and the loss under a fresh
/// single-node attack per training node and epoch. The inner attack targets
/// the true label and runs against the parameters of that epoch.
TrainedModel adversarial_train(const Graph& g, Architecture arch, const AdvTrainConfig& config);

}  // namespace gnnevade::advtrain
