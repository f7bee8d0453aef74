#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "gnnevade/graph/graph.hpp"

namespace gnnevade::models {

using graph::Edge;
using graph::Graph;
using graph::NodeId;
using tensor::DenseMatrix;

/// Extra structure layered on top of a Graph without copying it: injected
/// nodes (ids num_nodes, num_nodes + 1, ...) and extra undirected edges with
/// their initial weights. An extra edge that already exists in the graph
/// re-weights that edge instead of duplicating it.
struct Augmentation {
    DenseMatrix injected_features;  ///< one row per injected node (0 rows when none)
    std::vector<Edge> edges;
    std::vector<double> weights;    ///< aligned with `edges`

    std::size_t num_injected() const noexcept { return static_cast<std::size_t>(injected_features.rows()); }
};

/// The topology a model is evaluated on: a subset of (augmented) graph nodes
/// under local ids, the undirected edges among them with initial weights, and
/// a constant degree offset standing in for incident edges that were cut.
///
/// A receptive-field view around a center node reproduces the center's
/// logits of an L-layer model exactly (up to float rounding): it keeps every
/// node within L hops, every edge touching a node within L - 1 hops, and
/// records the remaining incident weight of boundary nodes as an offset.
class ComputeGraph {
public:
    static ComputeGraph full(const Graph& g, const Augmentation& aug = {});
    static ComputeGraph receptive_field(const Graph& g, NodeId center, std::size_t layers,
                                        const Augmentation& aug = {});

    std::size_t num_nodes() const noexcept { return global_ids_.size(); }
    /// Global id of each local node; ids >= graph size denote injected nodes.
    const std::vector<NodeId>& global_ids() const noexcept { return global_ids_; }
    /// Local endpoints of each edge slot.
    const std::vector<std::pair<int, int>>& pairs() const noexcept { return pairs_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<double>& degree_offset() const noexcept { return degree_offset_; }
    bool is_identity() const noexcept { return identity_; }

    std::optional<int> local_id(NodeId global) const;
    /// Slot of the undirected edge {a, b} (global ids), if present.
    std::optional<std::size_t> slot(NodeId a, NodeId b) const;

private:
    using Key = std::pair<NodeId, NodeId>;

    std::vector<NodeId> global_ids_;  // ascending, so local ids follow global order
    std::vector<std::pair<int, int>> pairs_;
    std::vector<double> weights_;
    std::vector<double> degree_offset_;
    std::vector<std::pair<Key, std::size_t>> slot_index_;  // sorted by key
    bool identity_ = false;
};

}  // namespace gnnevade::models
