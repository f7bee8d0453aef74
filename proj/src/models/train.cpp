#include "gnnevade/models/train.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gnnevade/common/errors.hpp"
#include "gnnevade/common/random.hpp"
#include "gnnevade/tensor/ops.hpp"

namespace gnnevade::models {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be non-negative");
    if (max_epochs == 0) throw ConfigError("max epochs must be positive");
    if (patience > max_epochs) throw ConfigError("patience cannot exceed max epochs");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
    if (layers == 0) throw ConfigError("layers must be positive");
}

Adam::Adam(const ModelParams& params, double learning_rate, double weight_decay)
    : lr_(learning_rate), wd_(weight_decay) {
    for (const auto& v : params.values) {
        m_.push_back(DenseMatrix::Zero(v.rows(), v.cols()));
        v_.push_back(DenseMatrix::Zero(v.rows(), v.cols()));
    }
}

void Adam::step(ModelParams& params, const std::vector<DenseMatrix>& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.values.size(); ++k) {
        DenseMatrix& theta = params.values[k];
        const DenseMatrix g = grads[k] + wd_ * theta;
        m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g;
        v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g.cwiseAbs2();
        theta.array() -= lr_ * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + eps_);
    }
}

std::uint64_t dropout_seed(std::uint64_t seed, std::size_t epoch) {
    return stream_seed(stream_seed(seed, 0xd0), static_cast<std::uint64_t>(epoch));
}

namespace {

double l2_half(const ModelParams& params, double wd) {
    double s = 0.0;
    for (const auto& v : params.values) s += v.squaredNorm();
    return 0.5 * wd * s;
}

struct Evaluation {
    double accuracy;
    double loss;
};

Evaluation evaluate(const Graph& g, const ModelParams& params, const std::vector<NodeId>& mask) {
    const DenseMatrix out = logits(params, g);
    const auto pred = argmax_rows(out);
    const DenseMatrix prob = tensor::softmax_rows(out);
    double loss = 0.0;
    for (NodeId v : mask) loss -= std::log(std::max(prob(v, g.label(v)), std::numeric_limits<double>::min()));
    return {accuracy(pred, g, mask), loss / static_cast<double>(mask.size())};
}

}  // namespace

TrainedModel fit(const Graph& g, ModelParams params, const TrainConfig& config, const EpochLoss& data_loss) {
    config.validate();
    if (g.train_mask().empty()) throw TrainingError("train mask is empty");
    if (g.val_mask().empty()) throw TrainingError("validation mask is empty");
    Adam adam(params, config.learning_rate, config.weight_decay);
    TrainedModel best;
    best.params = params;
    double best_val_loss = std::numeric_limits<double>::infinity();
    bool have_best = false;
    std::size_t since_best = 0;
    std::vector<double> curve;

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        Tape tape;
        const ParamBinding binding = bind_params(tape, params, true);
        const DropoutMasks masks = draw_dropout_masks(params, g.num_nodes(), dropout_seed(config.seed, epoch));
        const Var loss = data_loss(tape, params, binding, masks, epoch);
        const double total = tape.value(loss)(0, 0) + l2_half(params, config.weight_decay);
        if (!std::isfinite(total)) throw TrainingError("non-finite loss at epoch " + std::to_string(epoch));
        curve.push_back(total);
        tape.backward(loss);
        std::vector<DenseMatrix> grads;
        grads.reserve(binding.vars.size());
        for (Var v : binding.vars) grads.push_back(tape.grad(v));
        adam.step(params, grads);

        const Evaluation val = evaluate(g, params, g.val_mask());
        if (!std::isfinite(val.loss)) throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
        const bool better = !have_best || val.accuracy > best.best_val_accuracy ||
                            (val.accuracy == best.best_val_accuracy && val.loss < best_val_loss);
        if (better) {
            have_best = true;
            best.params = params;
            best.best_val_accuracy = val.accuracy;
            best.best_epoch = epoch;
            best_val_loss = val.loss;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }
    best.loss_curve = std::move(curve);
    return best;
}

Var clean_loss(Tape& tape, const Graph& g, const ModelParams& params, const ParamBinding& binding,
               const DropoutMasks* dropout) {
    const ComputeGraph cg = ComputeGraph::full(g);
    const NodeFeatures features = NodeFeatures::dense(tape, g, cg);
    const Var out = forward(tape, params, binding, cg, features, std::nullopt, dropout);
    std::vector<int> labels;
    labels.reserve(g.train_mask().size());
    for (NodeId v : g.train_mask()) labels.push_back(g.label(v));
    return tensor::cross_entropy(tape, out, g.train_mask(), labels);
}

TrainedModel train(const Graph& g, Architecture arch, const TrainConfig& config) {
    config.validate();
    const std::size_t hidden = config.hidden == 0 ? default_hidden(arch) : config.hidden;
    ModelParams params = init_params(arch, g.num_features(), g.num_classes(), config.layers, hidden,
                                     config.dropout, config.seed);
    return fit(g, std::move(params), config,
               [&g](Tape& tape, const ModelParams& current, const ParamBinding& binding,
                    const DropoutMasks& masks, std::size_t) { return clean_loss(tape, g, current, binding, &masks); });
}

}  // namespace gnnevade::models
