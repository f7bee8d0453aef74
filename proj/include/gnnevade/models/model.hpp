#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gnnevade/graph/graph.hpp"
#include "gnnevade/models/compute_graph.hpp"
#include "gnnevade/tensor/tape.hpp"

namespace gnnevade::models {

using tensor::Tape;
using tensor::SparseMatrix;
using tensor::Var;

enum class Architecture { gcn, sgc, gin, sage };

const char* to_string(Architecture arch) noexcept;
Architecture architecture_from_string(const std::string& s);

/// Hidden width used when none is configured: 64 for GIN's MLPs, 16 otherwise.
std::size_t default_hidden(Architecture arch) noexcept;

/// Trainable weights of one model plus the metadata needed to rebuild it.
/// Parameters are kept in a fixed order; `names` is the ordering manifest.
struct ModelParams {
    Architecture arch = Architecture::gcn;
    std::size_t layers = 2;
    std::size_t hidden = 16;
    std::size_t in_dim = 0;
    std::size_t num_classes = 0;
    double dropout = 0.5;
    std::uint64_t seed = 0;
    std::vector<std::string> names;
    std::vector<DenseMatrix> values;

    /// Indices of the parameters that multiply raw node features directly.
    std::vector<std::size_t> input_projections() const;
    std::size_t index_of(const std::string& name) const;
    std::size_t num_values() const;
};

/// Glorot-uniform weights and zero biases drawn from `seed`.
ModelParams init_params(Architecture arch, std::size_t in_dim, std::size_t num_classes,
                        std::size_t layers, std::size_t hidden, double dropout, std::uint64_t seed);

/// Parameters registered on a tape, in ModelParams order.
struct ParamBinding {
    std::vector<Var> vars;
};
ParamBinding bind_params(Tape& tape, const ModelParams& params, bool requires_grad);

/// Raw feature rows X @ W for each input-projection parameter, over every
/// node of a graph. Valid only while the parameters stay fixed.
struct InputProjection {
    std::vector<DenseMatrix> tables;
};
InputProjection project_inputs(const ModelParams& params, const Graph& g);

/// Node features fed to a model, with an optional additive perturbation on
/// a few rows. Either dense rows (differentiable w.r.t. the rows) or cached
/// projections of a frozen model (differentiable w.r.t. the perturbation only).
class NodeFeatures {
public:
    /// Dense rows aligned with `cg`. Injected nodes take their rows from `aug`.
    static NodeFeatures dense(Tape& tape, const Graph& g, const ComputeGraph& cg,
                              const Augmentation& aug = {}, bool requires_grad = false);
    /// Dense rows supplied directly (rows aligned with the compute graph).
    static NodeFeatures dense(Var rows);
    /// Rows of a cached projection, aligned with `cg`.
    static NodeFeatures projected(const InputProjection& cache, const ModelParams& params,
                                  const ComputeGraph& cg, const Augmentation& aug = {});

    /// Adds `delta.row(i)` to local row `rows[i]` before the first layer.
    void perturb(std::vector<int> rows, Var delta);

    /// X' @ W for input-projection number `k` (position in input_projections()).
    Var project(Tape& tape, std::size_t k, Var weight) const;

    std::optional<Var> dense_rows() const { return dense_; }

private:
    std::optional<Var> dense_;
    const SparseMatrix* sparse_ = nullptr;  // full-graph rows, graph-owned
    std::vector<DenseMatrix> projected_;
    std::vector<int> rows_;
    std::optional<Var> delta_;
};

/// Per-layer dropout masks over the whole graph (rows = global node ids),
/// already scaled by 1 / (1 - rate).
struct DropoutMasks {
    std::vector<DenseMatrix> masks;
};
DropoutMasks draw_dropout_masks(const ModelParams& params, std::size_t num_nodes, std::uint64_t seed);

/// Logits (cg.num_nodes() x num_classes) recorded on `tape`.
/// `edge_weights` is a num_slots x 1 variable; when absent, cg.weights() is used
/// as a constant.
Var forward(Tape& tape, const ModelParams& params, const ParamBinding& binding, const ComputeGraph& cg,
            const NodeFeatures& features, std::optional<Var> edge_weights = std::nullopt,
            const DropoutMasks* dropout = nullptr);

/// Evaluation-mode logits over the whole graph. Overrides, when given, must
/// be N x D features and one weight in [0, 1] per g.edges() entry.
DenseMatrix logits(const ModelParams& params, const Graph& g,
                   const std::optional<DenseMatrix>& features_override = std::nullopt,
                   std::span<const double> edge_weights_override = {});

/// Row-wise argmax; ties go to the lowest class index.
std::vector<int> argmax_rows(const DenseMatrix& logits);
int argmax(std::span<const double> row);

std::vector<int> predict(const ModelParams& params, const Graph& g,
                         const std::optional<DenseMatrix>& features_override = std::nullopt,
                         std::span<const double> edge_weights_override = {});

/// Fraction of mask nodes whose prediction equals their label.
double accuracy(std::span<const int> predictions, const Graph& g, std::span<const NodeId> mask);

}  // namespace gnnevade::models
