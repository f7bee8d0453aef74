#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gnnevade/tensor/tape.hpp"

namespace gnnevade::graph {

using tensor::DenseMatrix;
using tensor::SparseMatrix;
using NodeId = int;

enum class FeatureKind { binary, continuous };

const char* to_string(FeatureKind kind) noexcept;
FeatureKind feature_kind_from_string(const std::string& s);

/// Undirected edge stored once with u < v.
struct Edge {
    NodeId u = 0;
    NodeId v = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// CSR neighbor lists of an undirected graph. Symmetric by construction;
/// neighbor lists are sorted ascending.
class NeighborhoodIndex {
public:
    NeighborhoodIndex() = default;
    NeighborhoodIndex(std::size_t n, std::span<const Edge> edges);

    std::span<const NodeId> neighbors(NodeId v) const;
    std::size_t degree(NodeId v) const;
    std::size_t num_nodes() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }

private:
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> targets_;
};

/// Node-classification graph: features, undirected edges, labels and the
/// train/val/test split. Immutable once constructed; the constructor enforces
///   - edge endpoints in range, no self-loops, no duplicates,
///   - masks pairwise disjoint and fully labeled,
///   - binary feature graphs hold only 0/1 values,
///   - labels below the class count, all features finite.
class Graph {
public:
    struct Spec {
        std::string name;
        std::size_t num_classes = 0;
        FeatureKind feature_kind = FeatureKind::continuous;
        DenseMatrix features;
        std::vector<Edge> edges;
        std::vector<std::optional<int>> labels;
        std::vector<NodeId> train_mask;
        std::vector<NodeId> val_mask;
        std::vector<NodeId> test_mask;
    };

    explicit Graph(Spec spec);

    const std::string& name() const noexcept { return spec_.name; }
    std::size_t num_nodes() const noexcept { return static_cast<std::size_t>(spec_.features.rows()); }
    std::size_t num_features() const noexcept { return static_cast<std::size_t>(spec_.features.cols()); }
    std::size_t num_classes() const noexcept { return spec_.num_classes; }
    FeatureKind feature_kind() const noexcept { return spec_.feature_kind; }
    const DenseMatrix& features() const noexcept { return spec_.features; }
    /// The same matrix in compressed form.
    const SparseMatrix& sparse_features() const noexcept { return sparse_; }
    /// Sorted, each pair once with u < v.
    const std::vector<Edge>& edges() const noexcept { return spec_.edges; }
    const std::vector<std::optional<int>>& labels() const noexcept { return spec_.labels; }
    const std::vector<NodeId>& train_mask() const noexcept { return spec_.train_mask; }
    const std::vector<NodeId>& val_mask() const noexcept { return spec_.val_mask; }
    const std::vector<NodeId>& test_mask() const noexcept { return spec_.test_mask; }
    const NeighborhoodIndex& neighborhood() const noexcept { return index_; }

    std::size_t degree(NodeId v) const { return index_.degree(v); }
    bool has_edge(NodeId a, NodeId b) const;
    /// Label of a node that must be labeled (IndexError otherwise).
    int label(NodeId v) const;
    void check_node(NodeId v) const;

    const Spec& spec() const noexcept { return spec_; }

    friend bool operator==(const Graph& a, const Graph& b);

private:
    Spec spec_;
    NeighborhoodIndex index_;
    SparseMatrix sparse_;
};

/// Nodes u != v whose shortest-path distance to v is at most k, ascending.
std::vector<NodeId> k_hop_neighborhood(const Graph& g, NodeId v, std::size_t k);

/// Same, over a bare neighborhood index.
std::vector<NodeId> k_hop_neighborhood(const NeighborhoodIndex& index, NodeId v, std::size_t k);

/// Shortest-path hop count, or Unreachable.
struct Unreachable {
    friend bool operator==(Unreachable, Unreachable) = default;
};
using HopDistance = std::variant<std::size_t, Unreachable>;

HopDistance distance(const Graph& g, NodeId u, NodeId v);

/// BFS hop distances from `source` (nullopt for unreachable nodes), stopping
/// once `max_hops` is reached when given.
std::vector<std::optional<std::size_t>> bfs_distances(const NeighborhoodIndex& index, NodeId source,
                                                      std::optional<std::size_t> max_hops = std::nullopt);

/// GCN coefficients 1/sqrt(d_u d_v) with d_x = 1 + sum of incident edge
/// weights. `weights` is aligned with g.edges() (all 1 when empty).
struct GcnCoefficients {
    std::vector<double> edge;       ///< aligned with g.edges()
    std::vector<double> self_loop;  ///< per node, 1/d_x
};
GcnCoefficients gcn_norm(const Graph& g, std::span<const double> weights = {});

/// Returns a copy of g with one extra unlabeled node (in no mask) connected
/// to `neighbor` by a single edge.
Graph inject_node(const Graph& g, NodeId neighbor, std::span<const double> features);

}  // namespace gnnevade::graph
