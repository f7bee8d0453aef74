#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gnnevade/tensor/tape.hpp"

namespace gnnevade::tensor {

/// One directed message u -> v. `slot` indexes the row of the adjacency's
/// weight vector; entries with kUnitWeight carry the constant weight 1.
struct AdjEntry {
    static constexpr int kUnitWeight = -1;
    int src = 0;
    int dst = 0;
    int slot = kUnitWeight;
};

/// Sparse adjacency whose edge weights are differentiable slots on a tape.
///
/// Both directions of an undirected edge share one slot, so a gradient with
/// respect to the slot accounts for the edge as a whole. `degree_offset` adds a
/// constant weighted degree per node; receptive-field views use it to stand in
/// for incident edges that were cut away.
class SparseWeightedAdj {
public:
    SparseWeightedAdj(std::size_t n, std::vector<AdjEntry> entries, std::optional<Var> weights,
                      std::size_t num_slots, std::vector<double> degree_offset = {});

    /// Builds both directions of every pair (slot k for pair k), plus a unit
    /// self-loop on every node when `self_loops` is set. Entries are sorted by
    /// (dst, src) so aggregation order does not depend on input order.
    static SparseWeightedAdj symmetric(std::size_t n, std::span<const std::pair<int, int>> pairs,
                                       std::optional<Var> weights, bool self_loops,
                                       std::vector<double> degree_offset = {});

    std::size_t num_nodes() const noexcept { return n_; }
    std::size_t num_slots() const noexcept { return num_slots_; }
    const std::vector<AdjEntry>& entries() const noexcept { return *entries_; }
    const std::optional<Var>& weights() const noexcept { return weights_; }
    double degree_offset(std::size_t node) const noexcept {
        return degree_offset_->empty() ? 0.0 : (*degree_offset_)[node];
    }

    /// Weight of entry e read from the tape (1 for unit entries).
    double weight(const Tape& tape, const AdjEntry& e) const;
    /// Weight of every entry, in entry order.
    std::vector<double> entry_weights(const Tape& tape) const;

private:
    std::size_t n_;
    // Shared so that ops can keep a copy for the backward pass cheaply.
    std::shared_ptr<const std::vector<AdjEntry>> entries_;
    std::optional<Var> weights_;
    std::size_t num_slots_;
    std::shared_ptr<const std::vector<double>> degree_offset_;
};

}  // namespace gnnevade::tensor
