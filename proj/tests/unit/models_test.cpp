#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>

#include "gnnevade/common/errors.hpp"
#include "gnnevade/common/random.hpp"
#include "gnnevade/models/checkpoint.hpp"
#include "gnnevade/models/train.hpp"
#include "gnnevade/tensor/ops.hpp"
#include "synthetic.hpp"

namespace gnnevade::models {
namespace {

using testing::make_random_graph;
using testing::max_relative_error;
using testing::numeric_gradient;

constexpr Architecture kArchs[] = {Architecture::gcn, Architecture::sgc, Architecture::gin, Architecture::sage};

std::vector<int> labels_of(const Graph& g, const std::vector<NodeId>& mask) {
    std::vector<int> out;
    for (NodeId v : mask) out.push_back(g.label(v));
    return out;
}

// Train loss (eval mode) of `params` with an optional feature matrix and
// per-edge weights.
double loss_value(const ModelParams& params, const Graph& g, const DenseMatrix& x, const DenseMatrix& w) {
    Tape tape;
    const ComputeGraph cg = ComputeGraph::full(g);
    const ParamBinding binding = bind_params(tape, params, false);
    const Var out = forward(tape, params, binding, cg, NodeFeatures::dense(tape.leaf(x)), tape.leaf(w));
    const auto labels = labels_of(g, g.train_mask());
    return tape.value(tensor::cross_entropy(tape, out, g.train_mask(), labels))(0, 0);
}

DenseMatrix unit_weights(const Graph& g, double value = 1.0) {
    return DenseMatrix::Constant(static_cast<Eigen::Index>(g.edges().size()), 1, value);
}

ModelParams perturbed_init(Architecture arch, const Graph& g, std::size_t layers) {
    ModelParams p = init_params(arch, g.num_features(), g.num_classes(), layers, 5, 0.5, 3);
    // Non-zero biases and GIN eps so every parameter is exercised away from zero.
    Rng rng(4);
    for (std::size_t k = 0; k < p.values.size(); ++k)
        if (p.names[k].find("bias") != std::string::npos || p.names[k].find("eps") != std::string::npos)
            for (Eigen::Index i = 0; i < p.values[k].size(); ++i) p.values[k].data()[i] = rng.uniform(-0.3, 0.3);
    return p;
}

class PerArchitecture : public ::testing::TestWithParam<Architecture> {};

TEST_P(PerArchitecture, ParameterGradientsMatchFiniteDifferences) {
    const Graph g = make_random_graph(10, 6, 3, 0.3, 41);
    const ModelParams params = perturbed_init(GetParam(), g, 2);
    const DenseMatrix w = unit_weights(g, 0.8);
    Tape tape;
    const ComputeGraph cg = ComputeGraph::full(g);
    const ParamBinding binding = bind_params(tape, params, true);
    const Var out = forward(tape, params, binding, cg, NodeFeatures::dense(tape, g, cg), tape.leaf(w));
    const auto labels = labels_of(g, g.train_mask());
    tape.backward(tensor::cross_entropy(tape, out, g.train_mask(), labels));
    for (std::size_t k = 0; k < params.values.size(); ++k) {
        const auto f = [&](const DenseMatrix& value) {
            ModelParams p = params;
            p.values[k] = value;
            return loss_value(p, g, g.features(), w);
        };
        EXPECT_LE(max_relative_error(tape.grad(binding.vars[k]), numeric_gradient(f, params.values[k])), 1e-4)
            << params.names[k];
    }
}

TEST_P(PerArchitecture, FeatureRowAndEdgeWeightGradients) {
    const Graph g = make_random_graph(10, 6, 3, 0.3, 42);
    const ModelParams params = perturbed_init(GetParam(), g, 2);
    DenseMatrix w = unit_weights(g);
    for (Eigen::Index k = 0; k < w.rows(); k += 2) w(k, 0) = 0.5;
    Tape tape;
    const ComputeGraph cg = ComputeGraph::full(g);
    const ParamBinding binding = bind_params(tape, params, false);
    const Var x = tape.leaf(g.features(), true);
    const Var wv = tape.leaf(w, true);
    const Var out = forward(tape, params, binding, cg, NodeFeatures::dense(x), wv);
    const auto labels = labels_of(g, g.train_mask());
    tape.backward(tensor::cross_entropy(tape, out, g.train_mask(), labels));
    const int attacker = 7;
    const auto f_row = [&](const DenseMatrix& row) {
        DenseMatrix xs = g.features();
        xs.row(attacker) = row;
        return loss_value(params, g, xs, w);
    };
    const DenseMatrix row0 = g.features().row(attacker);
    EXPECT_LE(max_relative_error(tape.grad(x).row(attacker), numeric_gradient(f_row, row0)), 1e-4);
    const auto f_w = [&](const DenseMatrix& wv2) { return loss_value(params, g, g.features(), wv2); };
    EXPECT_LE(max_relative_error(tape.grad(wv), numeric_gradient(f_w, w)), 1e-4);
}

TEST_P(PerArchitecture, ReceptiveFieldReproducesFullLogits) {
    const Graph g = make_random_graph(40, 5, 3, 0.06, 43);
    for (std::size_t layers : {1u, 2u, 3u}) {
        const ModelParams params = perturbed_init(GetParam(), g, layers);
        const DenseMatrix full = logits(params, g);
        for (NodeId v : {0, 5, 17, 39}) {
            const ComputeGraph cg = ComputeGraph::receptive_field(g, v, layers);
            Tape tape;
            const ParamBinding binding = bind_params(tape, params, false);
            const DenseMatrix local = tape.value(forward(tape, params, binding, cg, NodeFeatures::dense(tape, g, cg)));
            const int lv = *cg.local_id(v);
            EXPECT_LE((local.row(lv) - full.row(v)).cwiseAbs().maxCoeff(), 1e-12) << "layers " << layers << " v " << v;
            // Cached projections give the same answer.
            const InputProjection cache = project_inputs(params, g);
            Tape t2;
            const ParamBinding b2 = bind_params(t2, params, false);
            const DenseMatrix proj = t2.value(forward(t2, params, b2, cg, NodeFeatures::projected(cache, params, cg)));
            EXPECT_LE((proj.row(lv) - full.row(v)).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST_P(PerArchitecture, UnitWeightOverrideIsBitwiseDefault) {
    const Graph g = make_random_graph(12, 4, 3, 0.3, 44);
    const ModelParams params = perturbed_init(GetParam(), g, 2);
    const std::vector<double> ones(g.edges().size(), 1.0);
    EXPECT_EQ(logits(params, g), logits(params, g, std::nullopt, ones));
    EXPECT_EQ(logits(params, g), logits(params, g));
}

TEST_P(PerArchitecture, ZeroWeightEdgeDoesNotChangeLogits) {
    const Graph g = make_random_graph(12, 4, 3, 0.3, 45);
    const ModelParams params = perturbed_init(GetParam(), g, 2);
    Augmentation aug;
    aug.edges = {{0, 11}};
    ASSERT_FALSE(g.has_edge(0, 11));
    aug.weights = {0.0};
    Tape tape;
    const ComputeGraph cg = ComputeGraph::full(g, aug);
    const ParamBinding binding = bind_params(tape, params, false);
    const DenseMatrix with = tape.value(forward(tape, params, binding, cg, NodeFeatures::dense(tape, g, cg)));
    EXPECT_LE((with - logits(params, g)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_P(PerArchitecture, SoftmaxRowsSumToOne) {
    const Graph g = make_random_graph(12, 4, 3, 0.3, 46);
    const DenseMatrix p = tensor::softmax_rows(logits(perturbed_init(GetParam(), g, 2), g));
    for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-9);
}

TEST_P(PerArchitecture, TrainingIsDeterministic) {
    const Graph g = make_random_graph(30, 6, 3, 0.15, 47);
    TrainConfig c;
    c.max_epochs = 15;
    c.patience = 15;
    c.seed = 5;
    const TrainedModel a = train(g, GetParam(), c);
    const TrainedModel b = train(g, GetParam(), c);
    EXPECT_EQ(a.params.values, b.params.values);
    EXPECT_EQ(a.loss_curve, b.loss_curve);
}

INSTANTIATE_TEST_SUITE_P(Models, PerArchitecture, ::testing::ValuesIn(kArchs),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Gcn, NoEdgesMeansOwnFeaturesOnly) {
    Graph::Spec spec;
    spec.name = "isolated";
    spec.num_classes = 2;
    spec.features = DenseMatrix::Identity(3, 3);
    spec.labels = {0, 1, 0};
    const Graph g(spec);
    const ModelParams p = init_params(Architecture::gcn, 3, 2, 2, 4, 0.0, 1);
    const DenseMatrix out = logits(p, g);
    // With only self-loops each row is an MLP of the node's own features.
    const DenseMatrix h = (g.features() * p.values[0]).rowwise() + p.values[1].row(0);
    const DenseMatrix expect = (h.cwiseMax(0.0) * p.values[2]).rowwise() + p.values[3].row(0);
    EXPECT_LE((out - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Sgc, OneLayerIsolatedNodesIsLinear) {
    Graph::Spec spec;
    spec.name = "isolated";
    spec.num_classes = 2;
    spec.features = DenseMatrix::Random(4, 3);
    spec.labels = {0, 1, 0, 1};
    const Graph g(spec);
    const ModelParams p = init_params(Architecture::sgc, 3, 2, 1, 4, 0.0, 1);
    const DenseMatrix expect = (g.features() * p.values[0]).rowwise() + p.values[1].row(0);
    EXPECT_LE((logits(p, g) - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gcn, InvariantToEdgeOrder) {
    const Graph g = make_random_graph(15, 4, 3, 0.25, 48);
    Graph::Spec spec = g.spec();
    std::reverse(spec.edges.begin(), spec.edges.end());
    for (auto& e : spec.edges) std::swap(e.u, e.v);
    const Graph shuffled(spec);
    const ModelParams p = perturbed_init(Architecture::gcn, g, 2);
    EXPECT_EQ(logits(p, g), logits(p, shuffled));
}

TEST(Predict, TiesGoToLowestClass) {
    const double tie[] = {0.5, 0.5};
    const double second[] = {0.1, 0.9};
    EXPECT_EQ(argmax(tie), 0);
    EXPECT_EQ(argmax(second), 1);
}

TEST(Accuracy, Fractions) {
    Graph::Spec spec;
    spec.name = "acc";
    spec.num_classes = 2;
    spec.features = DenseMatrix::Zero(10, 1);
    for (int i = 0; i < 10; ++i) spec.labels.emplace_back(i % 2);
    const Graph g(spec);
    std::vector<int> pred;
    for (int i = 0; i < 10; ++i) pred.push_back(i % 2);
    std::vector<NodeId> all(10);
    for (int i = 0; i < 10; ++i) all[i] = i;
    EXPECT_EQ(accuracy(pred, g, all), 1.0);
    pred[0] = 1;
    pred[1] = 0;
    EXPECT_DOUBLE_EQ(accuracy(pred, g, all), 0.8);
    EXPECT_THROW(accuracy(pred, g, std::span<const NodeId>{}), ConfigError);
}

TEST(Accuracy, RandomPredictionsNearChance) {
    Graph::Spec spec;
    spec.name = "chance";
    spec.num_classes = 7;
    const int n = 7000;
    spec.features = DenseMatrix::Zero(n, 1);
    Rng rng(3);
    for (int i = 0; i < n; ++i) spec.labels.emplace_back(static_cast<int>(rng.index(7)));
    const Graph g(spec);
    std::vector<int> pred(n);
    std::vector<NodeId> all(n);
    for (int i = 0; i < n; ++i) {
        pred[i] = static_cast<int>(rng.index(7));
        all[i] = i;
    }
    EXPECT_NEAR(accuracy(pred, g, all), 1.0 / 7.0, 0.02);
}

TEST(Train, SeparableToyReachesPerfectTrainAccuracy) {
    Graph::Spec spec;
    spec.name = "separable";
    spec.num_classes = 2;
    spec.feature_kind = graph::FeatureKind::binary;
    spec.features = DenseMatrix::Zero(12, 4);
    for (int i = 0; i < 12; ++i) {
        const int y = i % 2;
        spec.labels.emplace_back(y);
        spec.features(i, 2 * y) = 1.0;
        spec.features(i, 2 * y + 1) = (i / 2) % 2;
        (i < 8 ? spec.train_mask : spec.val_mask).push_back(i);
    }
    const Graph g(spec);
    TrainConfig c;
    c.dropout = 0.0;
    const TrainedModel m = train(g, Architecture::gcn, c);
    EXPECT_EQ(accuracy(predict(m.params, g), g, g.train_mask()), 1.0);
}

TEST(Train, BestSnapshotReproducesValAccuracy) {
    const Graph g = testing::make_sbm({});
    TrainConfig c;
    c.seed = 2;
    const TrainedModel m = train(g, Architecture::gcn, c);
    EXPECT_EQ(accuracy(predict(m.params, g), g, g.val_mask()), m.best_val_accuracy);
    EXPECT_GT(accuracy(predict(m.params, g), g, g.test_mask()), 0.7);
}

TEST(Train, EvaluationIsDropoutFree) {
    const Graph g = make_random_graph(20, 4, 3, 0.2, 49);
    const ModelParams p = init_params(Architecture::gcn, 4, 3, 2, 8, 0.5, 1);
    EXPECT_EQ(logits(p, g), logits(p, g));
}

TEST(Train, RejectsBadConfigAndMasks) {
    const Graph g = make_random_graph(20, 4, 3, 0.2, 50);
    TrainConfig c;
    c.patience = 500;
    EXPECT_THROW(train(g, Architecture::gcn, c), ConfigError);
    c = {};
    c.dropout = 1.0;
    EXPECT_THROW(train(g, Architecture::gcn, c), ConfigError);
    Graph::Spec spec = g.spec();
    spec.train_mask.clear();
    EXPECT_THROW(train(Graph(spec), Architecture::gcn, TrainConfig{}), TrainingError);
}

TEST(Checkpoint, RoundTrip) {
    const Graph g = make_random_graph(20, 4, 3, 0.2, 51);
    TrainConfig c;
    c.max_epochs = 5;
    c.patience = 5;
    Checkpoint ck;
    ck.model = train(g, Architecture::gin, c);
    ck.train_config = to_json(c);
    ck.adv_config = nlohmann::json{{"strategy", "random"}};
    const auto path = std::filesystem::temp_directory_path() / "gnnevade_ckpt_test.bin";
    save_checkpoint(ck, path);
    const Checkpoint back = load_checkpoint(path);
    EXPECT_EQ(back.model.params.values, ck.model.params.values);
    EXPECT_EQ(back.model.params.names, ck.model.params.names);
    EXPECT_EQ(back.model.params.arch, Architecture::gin);
    EXPECT_EQ(back.model.loss_curve, ck.model.loss_curve);
    EXPECT_EQ(*back.adv_config, *ck.adv_config);
    EXPECT_EQ(train_config_from_json(back.train_config).max_epochs, 5u);
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
    EXPECT_THROW(load_checkpoint(path), ParseError);
    std::filesystem::remove(path);
}

}  // namespace
}  // namespace gnnevade::models
