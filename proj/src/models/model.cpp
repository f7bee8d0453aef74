#include "gnnevade/models/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gnnevade/common/errors.hpp"
#include "gnnevade/common/random.hpp"
#include "gnnevade/tensor/ops.hpp"

namespace gnnevade::models {

namespace ops = tensor;
using tensor::SparseWeightedAdj;

const char* to_string(Architecture arch) noexcept {
    switch (arch) {
        case Architecture::gcn: return "gcn";
        case Architecture::sgc: return "sgc";
        case Architecture::gin: return "gin";
        case Architecture::sage: return "sage";
    }
    return "?";
}

Architecture architecture_from_string(const std::string& s) {
    if (s == "gcn") return Architecture::gcn;
    if (s == "sgc") return Architecture::sgc;
    if (s == "gin") return Architecture::gin;
    if (s == "sage") return Architecture::sage;
    throw ConfigError("unknown architecture '" + s + "' (expected gcn|sgc|gin|sage)");
}

std::size_t default_hidden(Architecture arch) noexcept { return arch == Architecture::gin ? 64 : 16; }

std::vector<std::size_t> ModelParams::input_projections() const {
    switch (arch) {
        case Architecture::gcn: return {index_of("layer0.weight")};
        case Architecture::sgc: return {index_of("linear.weight")};
        case Architecture::gin: return {index_of("layer0.mlp0.weight")};
        case Architecture::sage: return {index_of("layer0.self_weight"), index_of("layer0.neighbor_weight")};
    }
    return {};
}

std::size_t ModelParams::index_of(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw IndexError("model has no parameter '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
}

std::size_t ModelParams::num_values() const {
    std::size_t total = 0;
    for (const auto& v : values) total += static_cast<std::size_t>(v.size());
    return total;
}

namespace {

DenseMatrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    DenseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-limit, limit);
    return m;
}

}  // namespace

ModelParams init_params(Architecture arch, std::size_t in_dim, std::size_t num_classes,
                        std::size_t layers, std::size_t hidden, double dropout, std::uint64_t seed) {
    if (layers == 0) throw ConfigError("model needs at least one layer");
    if (in_dim == 0 || num_classes == 0 || hidden == 0) throw ConfigError("model dimensions must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
    ModelParams p;
    p.arch = arch;
    p.layers = layers;
    p.hidden = hidden;
    p.in_dim = in_dim;
    p.num_classes = num_classes;
    p.dropout = dropout;
    p.seed = seed;
    Rng rng(stream_seed(seed, 0x1217));
    auto add = [&](std::string name, DenseMatrix value) {
        p.names.push_back(std::move(name));
        p.values.push_back(std::move(value));
    };
    auto zeros = [](std::size_t cols) { return DenseMatrix::Zero(1, static_cast<Eigen::Index>(cols)); };
    auto in_of = [&](std::size_t l) { return l == 0 ? in_dim : hidden; };
    auto out_of = [&](std::size_t l) { return l + 1 == layers ? num_classes : hidden; };
    for (std::size_t l = 0; l < (arch == Architecture::sgc ? 0 : layers); ++l) {
        const std::string prefix = "layer" + std::to_string(l) + ".";
        switch (arch) {
            case Architecture::gcn:
                add(prefix + "weight", glorot(in_of(l), out_of(l), rng));
                add(prefix + "bias", zeros(out_of(l)));
                break;
            case Architecture::gin:
                add(prefix + "eps", DenseMatrix::Zero(1, 1));
                add(prefix + "mlp0.weight", glorot(in_of(l), hidden, rng));
                add(prefix + "mlp0.bias", zeros(hidden));
                add(prefix + "mlp1.weight", glorot(hidden, out_of(l), rng));
                add(prefix + "mlp1.bias", zeros(out_of(l)));
                break;
            case Architecture::sage:
                add(prefix + "self_weight", glorot(in_of(l), out_of(l), rng));
                add(prefix + "neighbor_weight", glorot(in_of(l), out_of(l), rng));
                add(prefix + "bias", zeros(out_of(l)));
                break;
            case Architecture::sgc: break;
        }
    }
    if (arch == Architecture::sgc) {
        add("linear.weight", glorot(in_dim, num_classes, rng));
        add("linear.bias", zeros(num_classes));
    }
    return p;
}

ParamBinding bind_params(Tape& tape, const ModelParams& params, bool requires_grad) {
    ParamBinding b;
    b.vars.reserve(params.values.size());
    for (const auto& v : params.values) b.vars.push_back(tape.leaf(v, requires_grad));
    return b;
}

InputProjection project_inputs(const ModelParams& params, const Graph& g) {
    if (g.num_features() != params.in_dim) throw ShapeError("graph feature width differs from model input");
    InputProjection out;
    for (std::size_t k : params.input_projections()) out.tables.push_back(g.sparse_features() * params.values[k]);
    return out;
}

NodeFeatures NodeFeatures::dense(Tape& tape, const Graph& g, const ComputeGraph& cg, const Augmentation& aug,
                                 bool requires_grad) {
    if (cg.is_identity() && cg.num_nodes() == g.num_nodes()) {
        if (requires_grad) return dense(tape.leaf(g.features(), true));
        NodeFeatures f;
        f.sparse_ = &g.sparse_features();
        return f;
    }
    const auto n = static_cast<NodeId>(g.num_nodes());
    DenseMatrix rows(static_cast<Eigen::Index>(cg.num_nodes()), g.features().cols());
    for (std::size_t i = 0; i < cg.num_nodes(); ++i) {
        const NodeId id = cg.global_ids()[i];
        if (id < n) {
            rows.row(i) = g.features().row(id);
        } else {
            if (static_cast<std::size_t>(id - n) >= aug.num_injected())
                throw IndexError("compute graph references an unknown injected node");
            rows.row(i) = aug.injected_features.row(id - n);
        }
    }
    return dense(tape.leaf(std::move(rows), requires_grad));
}

NodeFeatures NodeFeatures::dense(Var rows) {
    NodeFeatures f;
    f.dense_ = rows;
    return f;
}

NodeFeatures NodeFeatures::projected(const InputProjection& cache, const ModelParams& params,
                                     const ComputeGraph& cg, const Augmentation& aug) {
    const auto inputs = params.input_projections();
    if (cache.tables.size() != inputs.size()) throw ShapeError("projection cache does not match the model");
    NodeFeatures f;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const DenseMatrix& table = cache.tables[k];
        const auto n = static_cast<NodeId>(table.rows());
        DenseMatrix rows(static_cast<Eigen::Index>(cg.num_nodes()), table.cols());
        for (std::size_t i = 0; i < cg.num_nodes(); ++i) {
            const NodeId id = cg.global_ids()[i];
            if (id < n) {
                rows.row(i) = table.row(id);
            } else {
                if (static_cast<std::size_t>(id - n) >= aug.num_injected())
                    throw IndexError("compute graph references an unknown injected node");
                rows.row(i) = aug.injected_features.row(id - n) * params.values[inputs[k]];
            }
        }
        f.projected_.push_back(std::move(rows));
    }
    return f;
}

void NodeFeatures::perturb(std::vector<int> rows, Var delta) {
    rows_ = std::move(rows);
    delta_ = delta;
}

Var NodeFeatures::project(Tape& tape, std::size_t k, Var weight) const {
    if (sparse_) {
        const Var base = ops::sparse_matmul(tape, *sparse_, weight);
        if (!delta_) return base;
        return ops::scatter_add_rows(tape, base, rows_, ops::matmul(tape, *delta_, weight));
    }
    if (dense_) {
        Var x = *dense_;
        if (delta_) x = ops::scatter_add_rows(tape, x, rows_, *delta_);
        return ops::matmul(tape, x, weight);
    }
    if (k >= projected_.size()) throw IndexError("input projection index out of range");
    if (tape.requires_grad(weight))
        throw Error("cached projections cannot carry gradients to the projection weights");
    Var base = tape.leaf(projected_[k]);
    if (!delta_) return base;
    return ops::scatter_add_rows(tape, base, rows_, ops::matmul(tape, *delta_, weight));
}

DropoutMasks draw_dropout_masks(const ModelParams& params, std::size_t num_nodes, std::uint64_t seed) {
    DropoutMasks out;
    if (params.arch == Architecture::sgc || params.layers < 2 || params.dropout <= 0.0) return out;
    Rng rng(seed);
    const double keep = 1.0 - params.dropout;
    for (std::size_t l = 0; l + 1 < params.layers; ++l) {
        DenseMatrix m(static_cast<Eigen::Index>(num_nodes), static_cast<Eigen::Index>(params.hidden));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
        out.masks.push_back(std::move(m));
    }
    return out;
}

namespace {

Var apply_dropout(Tape& tape, Var h, const DropoutMasks* dropout, std::size_t position, const ComputeGraph& cg) {
    if (!dropout || dropout->masks.empty()) return h;
    const DenseMatrix& full = dropout->masks.at(position);
    if (cg.is_identity() && static_cast<std::size_t>(full.rows()) == cg.num_nodes())
        return ops::mul_constant(tape, h, full);
    DenseMatrix local(static_cast<Eigen::Index>(cg.num_nodes()), full.cols());
    for (std::size_t i = 0; i < cg.num_nodes(); ++i) {
        const NodeId id = cg.global_ids()[i];
        if (id < full.rows()) {
            local.row(i) = full.row(id);
        } else {
            local.row(i).setOnes();
        }
    }
    return ops::mul_constant(tape, h, local);
}

}  // namespace

Var forward(Tape& tape, const ModelParams& params, const ParamBinding& binding, const ComputeGraph& cg,
            const NodeFeatures& features, std::optional<Var> edge_weights, const DropoutMasks* dropout) {
    if (binding.vars.size() != params.values.size()) throw ShapeError("parameter binding does not match model");
    if (auto rows = features.dense_rows()) {
        const DenseMatrix& x = tape.value(*rows);
        if (static_cast<std::size_t>(x.rows()) != cg.num_nodes() || static_cast<std::size_t>(x.cols()) != params.in_dim)
            throw ShapeError("feature rows do not match the compute graph / model input");
    }
    Var weights;
    if (edge_weights) {
        weights = *edge_weights;
        const DenseMatrix& w = tape.value(weights);
        if (static_cast<std::size_t>(w.rows()) != cg.pairs().size() || w.cols() != 1)
            throw ShapeError("edge weights must be one column with a row per edge slot");
    } else {
        DenseMatrix w(static_cast<Eigen::Index>(cg.pairs().size()), 1);
        for (std::size_t k = 0; k < cg.pairs().size(); ++k) w(k, 0) = cg.weights()[k];
        weights = tape.leaf(std::move(w));
    }
    auto param = [&](const std::string& name) { return binding.vars[params.index_of(name)]; };
    const std::size_t n = cg.num_nodes();
    const std::size_t L = params.layers;

    switch (params.arch) {
        case Architecture::gcn:
        case Architecture::sgc: {
            const SparseWeightedAdj adj =
                SparseWeightedAdj::symmetric(n, cg.pairs(), weights, true, cg.degree_offset());
            const Var norm = ops::gcn_norm(tape, adj);
            if (params.arch == Architecture::sgc) {
                Var h = features.project(tape, 0, param("linear.weight"));
                for (std::size_t l = 0; l < L; ++l) h = ops::spmm_agg(tape, adj, h, norm);
                return ops::add_row_bias(tape, h, param("linear.bias"));
            }
            Var h;
            for (std::size_t l = 0; l < L; ++l) {
                const std::string prefix = "layer" + std::to_string(l) + ".";
                if (l == 0) {
                    h = features.project(tape, 0, param(prefix + "weight"));
                } else {
                    h = ops::relu(tape, h);
                    h = apply_dropout(tape, h, dropout, l - 1, cg);
                    h = ops::matmul(tape, h, param(prefix + "weight"));
                }
                h = ops::spmm_agg(tape, adj, h, norm);
                h = ops::add_row_bias(tape, h, param(prefix + "bias"));
            }
            return h;
        }
        case Architecture::gin: {
            const SparseWeightedAdj adj = SparseWeightedAdj::symmetric(n, cg.pairs(), weights, false);
            Var h;
            for (std::size_t l = 0; l < L; ++l) {
                const std::string prefix = "layer" + std::to_string(l) + ".";
                Var p;
                if (l == 0) {
                    p = features.project(tape, 0, param(prefix + "mlp0.weight"));
                } else {
                    h = ops::relu(tape, h);
                    h = apply_dropout(tape, h, dropout, l - 1, cg);
                    p = ops::matmul(tape, h, param(prefix + "mlp0.weight"));
                }
                // (1 + eps) * p_v + sum_u w_uv p_u, with the first MLP linear map folded into p.
                Var z = ops::add(tape, p, ops::scale_by(tape, p, param(prefix + "eps")));
                z = ops::add(tape, z, ops::spmm_agg(tape, adj, p));
                z = ops::add_row_bias(tape, z, param(prefix + "mlp0.bias"));
                z = ops::relu(tape, z);
                z = ops::matmul(tape, z, param(prefix + "mlp1.weight"));
                h = ops::add_row_bias(tape, z, param(prefix + "mlp1.bias"));
            }
            return h;
        }
        case Architecture::sage: {
            const SparseWeightedAdj adj = SparseWeightedAdj::symmetric(n, cg.pairs(), weights, false);
            const Var norm = ops::mean_norm(tape, adj);
            Var h;
            for (std::size_t l = 0; l < L; ++l) {
                const std::string prefix = "layer" + std::to_string(l) + ".";
                Var self_term;
                Var neighbor_term;
                if (l == 0) {
                    self_term = features.project(tape, 0, param(prefix + "self_weight"));
                    neighbor_term = features.project(tape, 1, param(prefix + "neighbor_weight"));
                } else {
                    h = ops::relu(tape, h);
                    h = apply_dropout(tape, h, dropout, l - 1, cg);
                    self_term = ops::matmul(tape, h, param(prefix + "self_weight"));
                    neighbor_term = ops::matmul(tape, h, param(prefix + "neighbor_weight"));
                }
                Var z = ops::add(tape, self_term, ops::spmm_agg(tape, adj, neighbor_term, norm));
                h = ops::add_row_bias(tape, z, param(prefix + "bias"));
            }
            return h;
        }
    }
    throw Error("unknown architecture");
}

DenseMatrix logits(const ModelParams& params, const Graph& g, const std::optional<DenseMatrix>& features_override,
                   std::span<const double> edge_weights_override) {
    const ComputeGraph cg = ComputeGraph::full(g);
    Tape tape;
    const ParamBinding binding = bind_params(tape, params, false);
    NodeFeatures features;
    if (features_override) {
        if (features_override->rows() != g.features().rows() || features_override->cols() != g.features().cols())
            throw ShapeError("feature override must match the graph's feature matrix");
        features = NodeFeatures::dense(tape.leaf(*features_override));
    } else {
        features = NodeFeatures::dense(tape, g, cg);
    }
    std::optional<Var> weights;
    if (!edge_weights_override.empty()) {
        if (edge_weights_override.size() != g.edges().size())
            throw ShapeError("edge weight override must hold one weight per edge");
        DenseMatrix w(static_cast<Eigen::Index>(edge_weights_override.size()), 1);
        for (std::size_t k = 0; k < edge_weights_override.size(); ++k) {
            const double v = edge_weights_override[k];
            if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("edge-weight", "weights must lie in [0, 1]");
            w(k, 0) = v;
        }
        weights = tape.leaf(std::move(w));
    }
    return tape.value(forward(tape, params, binding, cg, features, weights));
}

int argmax(std::span<const double> row) {
    if (row.empty()) throw ShapeError("argmax of an empty row");
    int best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = static_cast<int>(j);
    return best;
}

std::vector<int> argmax_rows(const DenseMatrix& logits) {
    std::vector<int> out(static_cast<std::size_t>(logits.rows()));
    for (Eigen::Index i = 0; i < logits.rows(); ++i)
        out[i] = argmax(std::span<const double>(logits.row(i).data(), static_cast<std::size_t>(logits.cols())));
    return out;
}

std::vector<int> predict(const ModelParams& params, const Graph& g, const std::optional<DenseMatrix>& features_override,
                         std::span<const double> edge_weights_override) {
    return argmax_rows(logits(params, g, features_override, edge_weights_override));
}

double accuracy(std::span<const int> predictions, const Graph& g, std::span<const NodeId> mask) {
    if (mask.empty()) throw ConfigError("accuracy over an empty mask");
    if (predictions.size() != g.num_nodes()) throw ShapeError("one prediction per node expected");
    std::size_t correct = 0;
    for (NodeId v : mask) {
        g.check_node(v);
        if (predictions[static_cast<std::size_t>(v)] == g.label(v)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(mask.size());
}

}  // namespace gnnevade::models
