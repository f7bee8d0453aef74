#include "gnnevade/models/compute_graph.hpp"

#include <algorithm>
#include <string>

#include "gnnevade/common/errors.hpp"

namespace gnnevade::models {

namespace {

std::pair<NodeId, NodeId> key(NodeId a, NodeId b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

/// Graph plus augmentation, seen as one undirected weighted graph.
class AugmentedView {
public:
    AugmentedView(const Graph& g, const Augmentation& aug) : g_(g), aug_(aug) {
        if (aug.weights.size() != aug.edges.size())
            throw ShapeError("augmentation weights must align with its edges");
        if (aug.num_injected() > 0 && static_cast<std::size_t>(aug.injected_features.cols()) != g.num_features())
            throw ShapeError("injected feature rows must have the graph's feature width");
        if (aug.edges.empty()) return;
        const auto total = static_cast<NodeId>(size());
        const auto n = static_cast<NodeId>(g.num_nodes());
        override_.reserve(aug.edges.size());
        std::vector<Edge> extra;
        for (std::size_t k = 0; k < aug.edges.size(); ++k) {
            const Edge& e = aug.edges[k];
            if (e.u < 0 || e.v < 0 || e.u >= total || e.v >= total || e.u == e.v)
                throw ValidationError("edge-range", "augmentation edge (" + std::to_string(e.u) + ", " +
                                                        std::to_string(e.v) + ") is invalid");
            const double w = aug.weights[k];
            if (!(w >= 0.0 && w <= 1.0))
                throw ValidationError("edge-weight", "augmentation weights must lie in [0, 1]");
            override_.emplace_back(key(e.u, e.v), w);
            if (!(e.u < n && e.v < n && g.has_edge(e.u, e.v))) extra.push_back(e);
        }
        std::sort(override_.begin(), override_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t k = 1; k < override_.size(); ++k)
            if (override_[k].first == override_[k - 1].first)
                throw ValidationError("duplicate-edge", "augmentation lists an edge twice");

        // CSR of the extra adjacency.
        extra_offsets_.assign(size() + 1, 0);
        for (const Edge& e : extra) {
            ++extra_offsets_[static_cast<std::size_t>(e.u) + 1];
            ++extra_offsets_[static_cast<std::size_t>(e.v) + 1];
        }
        for (std::size_t i = 1; i < extra_offsets_.size(); ++i) extra_offsets_[i] += extra_offsets_[i - 1];
        extra_targets_.resize(extra_offsets_.back());
        std::vector<std::size_t> fill(extra_offsets_.begin(), extra_offsets_.end() - 1);
        for (const Edge& e : extra) {
            extra_targets_[fill[static_cast<std::size_t>(e.u)]++] = e.v;
            extra_targets_[fill[static_cast<std::size_t>(e.v)]++] = e.u;
        }
    }

    std::size_t size() const { return g_.num_nodes() + aug_.num_injected(); }

    template <typename Fn>
    void for_each_neighbor(NodeId x, Fn&& fn) const {
        if (x < static_cast<NodeId>(g_.num_nodes()))
            for (NodeId y : g_.neighborhood().neighbors(x)) fn(y);
        if (!extra_offsets_.empty()) {
            const auto i = static_cast<std::size_t>(x);
            for (std::size_t k = extra_offsets_[i]; k < extra_offsets_[i + 1]; ++k) fn(extra_targets_[k]);
        }
    }

    double weight(NodeId a, NodeId b) const {
        if (override_.empty()) return 1.0;
        const auto k = key(a, b);
        auto it = std::lower_bound(override_.begin(), override_.end(), k,
                                   [](const auto& entry, const auto& value) { return entry.first < value; });
        return it != override_.end() && it->first == k ? it->second : 1.0;
    }

private:
    const Graph& g_;
    const Augmentation& aug_;
    std::vector<std::pair<std::pair<NodeId, NodeId>, double>> override_;  // sorted by key
    std::vector<std::size_t> extra_offsets_;
    std::vector<NodeId> extra_targets_;
};

}  // namespace

ComputeGraph ComputeGraph::full(const Graph& g, const Augmentation& aug) {
    const AugmentedView view(g, aug);
    ComputeGraph cg;
    const auto total = view.size();
    cg.global_ids_.resize(total);
    for (std::size_t i = 0; i < total; ++i) cg.global_ids_[i] = static_cast<NodeId>(i);
    for (const Edge& e : g.edges()) {
        cg.slot_index_.push_back({key(e.u, e.v), cg.pairs_.size()});
        cg.pairs_.emplace_back(e.u, e.v);
        cg.weights_.push_back(1.0);
    }
    // Graph edges are sorted, so existing slots can be found by binary search.
    for (std::size_t k = 0; k < aug.edges.size(); ++k) {
        const auto pair = key(aug.edges[k].u, aug.edges[k].v);
        const auto end = cg.slot_index_.begin() + static_cast<std::ptrdiff_t>(g.edges().size());
        auto it = std::lower_bound(cg.slot_index_.begin(), end, pair,
                                   [](const auto& entry, const auto& value) { return entry.first < value; });
        if (it != end && it->first == pair) {
            cg.weights_[it->second] = aug.weights[k];
        } else {
            cg.slot_index_.push_back({pair, cg.pairs_.size()});
            cg.pairs_.push_back(pair);
            cg.weights_.push_back(aug.weights[k]);
        }
    }
    std::sort(cg.slot_index_.begin(), cg.slot_index_.end());
    cg.identity_ = aug.num_injected() == 0;
    return cg;
}

ComputeGraph ComputeGraph::receptive_field(const Graph& g, NodeId center, std::size_t layers,
                                           const Augmentation& aug) {
    if (layers == 0) throw ConfigError("receptive field needs at least one layer");
    const AugmentedView view(g, aug);
    const auto total = view.size();
    if (center < 0 || static_cast<std::size_t>(center) >= total)
        throw IndexError("center node " + std::to_string(center) + " out of range");

    constexpr std::size_t kUnseen = static_cast<std::size_t>(-1);
    std::vector<std::size_t> dist(total, kUnseen);
    std::vector<NodeId> order{center};
    dist[static_cast<std::size_t>(center)] = 0;
    for (std::size_t head = 0; head < order.size(); ++head) {
        const NodeId x = order[head];
        const std::size_t dx = dist[static_cast<std::size_t>(x)];
        if (dx >= layers) continue;
        view.for_each_neighbor(x, [&](NodeId y) {
            auto& dy = dist[static_cast<std::size_t>(y)];
            if (dy == kUnseen) {
                dy = dx + 1;
                order.push_back(y);
            }
        });
    }

    ComputeGraph cg;
    cg.global_ids_ = std::move(order);
    std::sort(cg.global_ids_.begin(), cg.global_ids_.end());
    std::vector<int> local(total, -1);
    for (std::size_t i = 0; i < cg.global_ids_.size(); ++i)
        local[static_cast<std::size_t>(cg.global_ids_[i])] = static_cast<int>(i);
    auto inner = [&](NodeId x) { return dist[static_cast<std::size_t>(x)] + 1 <= layers; };

    // Every kept edge touches an inner node; emitting it from its smaller
    // inner endpoint lists it exactly once.
    std::vector<std::pair<NodeId, NodeId>> kept;
    for (NodeId x : cg.global_ids_) {
        if (!inner(x)) continue;
        view.for_each_neighbor(x, [&](NodeId y) {
            if (!inner(y) || x < y) kept.push_back(key(x, y));
        });
    }
    std::sort(kept.begin(), kept.end());

    std::vector<double> local_weight(cg.global_ids_.size(), 0.0);
    cg.pairs_.reserve(kept.size());
    cg.weights_.reserve(kept.size());
    cg.slot_index_.reserve(kept.size());
    for (const auto& [a, b] : kept) {
        const int la = local[static_cast<std::size_t>(a)];
        const int lb = local[static_cast<std::size_t>(b)];
        const double w = view.weight(a, b);
        cg.slot_index_.push_back({std::pair{a, b}, cg.pairs_.size()});
        cg.pairs_.emplace_back(la, lb);
        cg.weights_.push_back(w);
        local_weight[static_cast<std::size_t>(la)] += w;
        local_weight[static_cast<std::size_t>(lb)] += w;
    }
    cg.degree_offset_.assign(cg.global_ids_.size(), 0.0);
    for (std::size_t i = 0; i < cg.global_ids_.size(); ++i) {
        const NodeId x = cg.global_ids_[i];
        if (inner(x)) continue;
        double full = 0.0;
        view.for_each_neighbor(x, [&](NodeId y) { full += view.weight(x, y); });
        cg.degree_offset_[i] = full - local_weight[i];
    }
    cg.identity_ = false;
    return cg;
}

std::optional<int> ComputeGraph::local_id(NodeId global) const {
    auto it = std::lower_bound(global_ids_.begin(), global_ids_.end(), global);
    if (it == global_ids_.end() || *it != global) return std::nullopt;
    return static_cast<int>(it - global_ids_.begin());
}

std::optional<std::size_t> ComputeGraph::slot(NodeId a, NodeId b) const {
    const auto k = key(a, b);
    auto it = std::lower_bound(slot_index_.begin(), slot_index_.end(), k,
                               [](const auto& entry, const auto& value) { return entry.first < value; });
    if (it == slot_index_.end() || it->first != k) return std::nullopt;
    return it->second;
}

}  // namespace gnnevade::models
