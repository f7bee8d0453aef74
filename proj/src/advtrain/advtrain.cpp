#include "gnnevade/advtrain/advtrain.hpp"

#include "gnnevade/common/errors.hpp"
#include "gnnevade/common/random.hpp"
#include "gnnevade/models/checkpoint.hpp"
#include "gnnevade/tensor/ops.hpp"

namespace gnnevade::advtrain {

using nlohmann::json;
using namespace models;

const char* to_string(AttackerStrategy s) noexcept {
    return s == AttackerStrategy::topology ? "topology" : "random";
}

AttackerStrategy strategy_from_string(const std::string& s) {
    if (s == "random") return AttackerStrategy::random;
    if (s == "topology") return AttackerStrategy::topology;
    throw ConfigError("unknown adversarial-training attacker strategy '" + s + "'");
}

attacks::Budget AdvTrainConfig::default_inner_budget() {
    attacks::Budget b;
    b.iterations = 5;
    return b;
}

void AdvTrainConfig::validate(graph::FeatureKind kind) const {
    base.validate();
    if (inner.iterations == 0) {
        attacks::Budget probe = inner;
        probe.iterations = 1;
        probe.validate(kind);
    } else {
        inner.validate(kind);
    }
}

json to_json(const AdvTrainConfig& c) {
    json inner = {{"eps0", c.inner.eps0}, {"iterations", c.inner.iterations}, {"clamp_nonneg", c.inner.clamp_nonneg}};
    inner["eps_inf"] = c.inner.eps_inf ? json(*c.inner.eps_inf) : json(nullptr);
    inner["gamma"] = c.inner.gamma ? json(*c.inner.gamma) : json(nullptr);
    return {{"base", models::to_json(c.base)}, {"strategy", to_string(c.strategy)}, {"inner", std::move(inner)}};
}

AdvTrainConfig adv_config_from_json(const json& j) {
    AdvTrainConfig c;
    c.base = train_config_from_json(j.at("base"));
    c.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    const json& in = j.at("inner");
    c.inner.eps0 = in.at("eps0").get<double>();
    c.inner.iterations = in.at("iterations").get<std::size_t>();
    c.inner.clamp_nonneg = in.value("clamp_nonneg", false);
    if (in.contains("eps_inf") && !in["eps_inf"].is_null()) c.inner.eps_inf = in["eps_inf"].get<double>();
    if (in.contains("gamma") && !in["gamma"].is_null()) c.inner.gamma = in["gamma"].get<double>();
    return c;
}

namespace {

struct InnerResult {
    NodeId node;
    int label;
    NodeId attacker;
    DenseMatrix eta;  // 1 x D
};

/// Runs the inner attack for every training node against a snapshot of the
/// current parameters. Nodes left unperturbed are omitted.
std::vector<InnerResult> inner_attacks(const Graph& g, const ModelParams& params, const AdvTrainConfig& config,
                                       std::size_t epoch) {
    std::vector<InnerResult> out;
    if (config.inner.iterations == 0 || config.inner.l0_limit(g.num_features()) == 0) return out;
    const attacks::FrozenModel frozen(params, g);
    Rng rng(stream_seed(stream_seed(config.base.seed, 0xad), static_cast<std::uint64_t>(epoch)));
    for (NodeId v : g.train_mask()) {
        NodeId a = 0;
        try {
            a = config.strategy == AttackerStrategy::topology
                    ? attacks::choose_attacker_topology(g, v)
                    : attacks::choose_attacker_random(g, v, attacks::RandomVariant::any, params.layers, rng);
        } catch (const NoAttackerError&) {
            continue;
        }
        const NodeId attackers[] = {a};
        const auto goal = attacks::AttackGoal::non_targeted(g.label(v));
        attacks::AttackOutcome o = attacks::single_node_attack(frozen, v, attackers, goal, config.inner, a == v);
        if (o.l0_used == 0) continue;
        out.push_back({v, g.label(v), a, std::move(o.perturbation.eta)});
    }
    return out;
}

}  // namespace

TrainedModel adversarial_train(const Graph& g, Architecture arch, const AdvTrainConfig& config) {
    config.validate(g.feature_kind());
    const TrainConfig& base = config.base;
    const std::size_t hidden = base.hidden == 0 ? default_hidden(arch) : base.hidden;
    ModelParams params =
        init_params(arch, g.num_features(), g.num_classes(), base.layers, hidden, base.dropout, base.seed);

    // Unperturbed nodes contribute their clean term twice, so the objective is
    // written as clean + (sum over perturbed nodes of adv_i - clean_i) / 2N.
    // With no perturbation at all it is exactly the clean objective.
    auto loss = [&](Tape& tape, const ModelParams& current, const ParamBinding& binding, const DropoutMasks& masks,
                    std::size_t epoch) {
        const std::vector<InnerResult> inner = inner_attacks(g, current, config, epoch);
        const ComputeGraph full = ComputeGraph::full(g);
        const NodeFeatures clean_features = NodeFeatures::dense(tape, g, full);
        const Var out = forward(tape, current, binding, full, clean_features, std::nullopt, &masks);
        std::vector<int> labels;
        for (NodeId v : g.train_mask()) labels.push_back(g.label(v));
        const Var clean = tensor::cross_entropy(tape, out, g.train_mask(), labels);
        if (inner.empty()) return tensor::scale(tape, tensor::add(tape, clean, clean), 0.5);

        std::vector<int> rows;
        std::vector<int> row_labels;
        std::optional<Var> adv_sum;
        for (const InnerResult& r : inner) {
            rows.push_back(static_cast<int>(r.node));
            row_labels.push_back(r.label);
            const ComputeGraph cg = ComputeGraph::receptive_field(g, r.node, current.layers);
            NodeFeatures features = NodeFeatures::dense(tape, g, cg);
            features.perturb({*cg.local_id(r.attacker)}, tape.leaf(r.eta, false));
            const Var local = forward(tape, current, binding, cg, features, std::nullopt, &masks);
            const int vrow[] = {*cg.local_id(r.node)};
            const int vlabel[] = {r.label};
            const Var term = tensor::cross_entropy(tape, local, vrow, vlabel);
            adv_sum = adv_sum ? tensor::add(tape, *adv_sum, term) : term;
        }
        const double n = static_cast<double>(g.train_mask().size());
        const double p = static_cast<double>(inner.size());
        const Var clean_sub = tensor::scale(tape, tensor::cross_entropy(tape, out, rows, row_labels), -p);
        const Var delta = tensor::scale(tape, tensor::add(tape, *adv_sum, clean_sub), 0.5 / n);
        return tensor::add(tape, clean, delta);
    };
    return fit(g, std::move(params), base, loss);
}

}  // namespace gnnevade::advtrain
