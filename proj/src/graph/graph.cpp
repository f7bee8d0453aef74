#include "gnnevade/graph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "gnnevade/common/errors.hpp"

namespace gnnevade::graph {

const char* to_string(FeatureKind kind) noexcept {
    return kind == FeatureKind::binary ? "binary" : "continuous";
}

FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "binary") return FeatureKind::binary;
    if (s == "continuous") return FeatureKind::continuous;
    throw ValidationError("feature-kind", "unknown feature kind '" + s + "'");
}

NeighborhoodIndex::NeighborhoodIndex(std::size_t n, std::span<const Edge> edges)
    : offsets_(n + 1, 0), targets_(2 * edges.size()) {
    for (const Edge& e : edges) {
        ++offsets_[e.u + 1];
        ++offsets_[e.v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const Edge& e : edges) {
        targets_[cursor[e.u]++] = e.v;
        targets_[cursor[e.v]++] = e.u;
    }
    for (std::size_t i = 0; i < n; ++i)
        std::sort(targets_.begin() + offsets_[i], targets_.begin() + offsets_[i + 1]);
}

std::span<const NodeId> NeighborhoodIndex::neighbors(NodeId v) const {
    return {targets_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

std::size_t NeighborhoodIndex::degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

namespace {

void check_mask(const std::vector<NodeId>& mask, const char* name, std::size_t n,
                const std::vector<std::optional<int>>& labels, std::vector<char>& owner) {
    for (NodeId v : mask) {
        if (v < 0 || static_cast<std::size_t>(v) >= n)
            throw ValidationError("mask-range", std::string(name) + " node " + std::to_string(v) +
                                                    " out of range");
        if (owner[v])
            throw ValidationError("mask-overlap", std::string(name) + " node " + std::to_string(v) +
                                                      " already belongs to another mask");
        owner[v] = 1;
        if (!labels[v])
            throw ValidationError("mask-label", std::string(name) + " node " + std::to_string(v) +
                                                    " has no label");
    }
}

}  // namespace

Graph::Graph(Spec spec) : spec_(std::move(spec)) {
    const std::size_t n = num_nodes();
    if (spec_.labels.size() != n)
        throw ValidationError("label-count", "labels length " + std::to_string(spec_.labels.size()) +
                                                 " != node count " + std::to_string(n));
    if (spec_.num_classes == 0) throw ValidationError("class-count", "graph needs at least one class");
    if (!spec_.features.allFinite()) throw ValidationError("finite-features", "non-finite feature value");
    if (spec_.feature_kind == FeatureKind::binary) {
        const auto& f = spec_.features;
        if (!((f.array() == 0.0) || (f.array() == 1.0)).all())
            throw ValidationError("binary-features", "binary graph holds a value outside {0, 1}");
    }
    for (std::size_t v = 0; v < n; ++v) {
        const auto& y = spec_.labels[v];
        if (y && (*y < 0 || static_cast<std::size_t>(*y) >= spec_.num_classes))
            throw ValidationError("label-range", "node " + std::to_string(v) + " label " +
                                                     std::to_string(*y) + " outside class range");
    }
    for (Edge& e : spec_.edges) {
        if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= n || static_cast<std::size_t>(e.v) >= n)
            throw ValidationError("edge-range", "edge (" + std::to_string(e.u) + ", " +
                                                    std::to_string(e.v) + ") outside node range");
        if (e.u == e.v)
            throw ValidationError("self-loop", "self-loop on node " + std::to_string(e.u));
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(spec_.edges.begin(), spec_.edges.end());
    if (auto it = std::adjacent_find(spec_.edges.begin(), spec_.edges.end()); it != spec_.edges.end())
        throw ValidationError("duplicate-edge", "edge (" + std::to_string(it->u) + ", " +
                                                    std::to_string(it->v) + ") listed twice");
    std::vector<char> owner(n, 0);
    check_mask(spec_.train_mask, "train", n, spec_.labels, owner);
    check_mask(spec_.val_mask, "val", n, spec_.labels, owner);
    check_mask(spec_.test_mask, "test", n, spec_.labels, owner);
    index_ = NeighborhoodIndex(n, spec_.edges);
    sparse_ = spec_.features.sparseView();
    sparse_.makeCompressed();
}

bool Graph::has_edge(NodeId a, NodeId b) const {
    check_node(a);
    check_node(b);
    const auto nb = index_.neighbors(a);
    return std::binary_search(nb.begin(), nb.end(), b);
}

int Graph::label(NodeId v) const {
    check_node(v);
    if (!spec_.labels[v]) throw IndexError("node " + std::to_string(v) + " is unlabeled");
    return *spec_.labels[v];
}

void Graph::check_node(NodeId v) const {
    if (v < 0 || static_cast<std::size_t>(v) >= num_nodes())
        throw IndexError("node " + std::to_string(v) + " out of range (n = " +
                         std::to_string(num_nodes()) + ")");
}

bool operator==(const Graph& a, const Graph& b) {
    const auto& x = a.spec_;
    const auto& y = b.spec_;
    return x.name == y.name && x.num_classes == y.num_classes && x.feature_kind == y.feature_kind &&
           x.features.rows() == y.features.rows() && x.features.cols() == y.features.cols() &&
           x.features == y.features && x.edges == y.edges && x.labels == y.labels &&
           x.train_mask == y.train_mask && x.val_mask == y.val_mask && x.test_mask == y.test_mask;
}

std::vector<std::optional<std::size_t>> bfs_distances(const NeighborhoodIndex& index, NodeId source,
                                                      std::optional<std::size_t> max_hops) {
    std::vector<std::optional<std::size_t>> dist(index.num_nodes());
    std::deque<NodeId> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
        const NodeId x = queue.front();
        queue.pop_front();
        const std::size_t dx = *dist[x];
        if (max_hops && dx >= *max_hops) continue;
        for (NodeId y : index.neighbors(x)) {
            if (dist[y]) continue;
            dist[y] = dx + 1;
            queue.push_back(y);
        }
    }
    return dist;
}

std::vector<NodeId> k_hop_neighborhood(const NeighborhoodIndex& index, NodeId v, std::size_t k) {
    if (v < 0 || static_cast<std::size_t>(v) >= index.num_nodes())
        throw IndexError("node " + std::to_string(v) + " out of range");
    std::vector<NodeId> out;
    if (k == 0) return out;
    const auto dist = bfs_distances(index, v, k);
    for (std::size_t u = 0; u < dist.size(); ++u)
        if (dist[u] && static_cast<NodeId>(u) != v) out.push_back(static_cast<NodeId>(u));
    return out;
}

std::vector<NodeId> k_hop_neighborhood(const Graph& g, NodeId v, std::size_t k) {
    g.check_node(v);
    return k_hop_neighborhood(g.neighborhood(), v, k);
}

HopDistance distance(const Graph& g, NodeId u, NodeId v) {
    g.check_node(u);
    g.check_node(v);
    const auto dist = bfs_distances(g.neighborhood(), u);
    if (!dist[v]) return Unreachable{};
    return *dist[v];
}

GcnCoefficients gcn_norm(const Graph& g, std::span<const double> weights) {
    const auto& edges = g.edges();
    if (!weights.empty() && weights.size() != edges.size())
        throw ShapeError("gcn_norm: weights must align with the edge list");
    std::vector<double> degree(g.num_nodes(), 1.0);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const double w = weights.empty() ? 1.0 : weights[k];
        if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("edge-weight", "weights must lie in [0, 1]");
        degree[edges[k].u] += w;
        degree[edges[k].v] += w;
    }
    GcnCoefficients c;
    c.edge.resize(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k)
        c.edge[k] = 1.0 / std::sqrt(degree[edges[k].u] * degree[edges[k].v]);
    c.self_loop.resize(degree.size());
    for (std::size_t i = 0; i < degree.size(); ++i) c.self_loop[i] = 1.0 / degree[i];
    return c;
}

Graph inject_node(const Graph& g, NodeId neighbor, std::span<const double> features) {
    g.check_node(neighbor);
    if (features.size() != g.num_features())
        throw ShapeError("inject_node: feature vector length " + std::to_string(features.size()) +
                         " != " + std::to_string(g.num_features()));
    Graph::Spec spec = g.spec();
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    spec.features.conservativeResize(n + 1, Eigen::NoChange);
    for (std::size_t j = 0; j < features.size(); ++j) spec.features(n, j) = features[j];
    spec.labels.emplace_back(std::nullopt);
    spec.edges.push_back({neighbor, static_cast<NodeId>(n)});
    return Graph(std::move(spec));
}

}  // namespace gnnevade::graph
