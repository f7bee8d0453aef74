#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "gnnevade/models/model.hpp"

namespace gnnevade::models {

struct TrainConfig {
    double learning_rate = 0.01;
    double weight_decay = 5e-4;
    std::size_t max_epochs = 200;
    std::size_t patience = 20;
    double dropout = 0.5;
    std::size_t hidden = 0;  ///< 0 picks default_hidden(arch)
    std::size_t layers = 2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainedModel {
    ModelParams params;
    double best_val_accuracy = 0.0;
    std::size_t best_epoch = 0;
    /// Training objective (data loss + weight decay) at every epoch run.
    std::vector<double> loss_curve;
};

/// Adam with L2 weight decay added to the gradient.
class Adam {
public:
    Adam(const ModelParams& params, double learning_rate, double weight_decay);
    void step(ModelParams& params, const std::vector<DenseMatrix>& grads);

private:
    double lr_;
    double wd_;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    std::size_t t_ = 0;
    std::vector<DenseMatrix> m_;
    std::vector<DenseMatrix> v_;
};

/// Builds the data term of one epoch's loss on `tape`. `binding` holds the
/// current `params` with gradients enabled; `dropout` holds this epoch's masks.
using EpochLoss = std::function<Var(Tape& tape, const ModelParams& params, const ParamBinding& binding,
                                    const DropoutMasks& dropout, std::size_t epoch)>;

/// Generic optimisation loop: one Adam step per epoch on data loss plus
/// weight_decay/2 * |theta|^2, early stopping on validation accuracy (ties go
/// to the lower validation loss). Returns the best-epoch snapshot.
TrainedModel fit(const Graph& g, ModelParams params, const TrainConfig& config, const EpochLoss& data_loss);

/// Dropout seed for a given run seed and epoch.
std::uint64_t dropout_seed(std::uint64_t seed, std::size_t epoch);

/// Supervised training with mean cross-entropy over the train mask.
TrainedModel train(const Graph& g, Architecture arch, const TrainConfig& config);

/// Mean cross-entropy of the train mask on the full graph, evaluation mode.
Var clean_loss(Tape& tape, const Graph& g, const ModelParams& params, const ParamBinding& binding,
               const DropoutMasks* dropout);

}  // namespace gnnevade::models
