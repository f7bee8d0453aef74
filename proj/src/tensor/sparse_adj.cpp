#include "gnnevade/tensor/sparse_adj.hpp"

#include <algorithm>
#include <string>

#include "gnnevade/common/errors.hpp"

namespace gnnevade::tensor {

SparseWeightedAdj::SparseWeightedAdj(std::size_t n, std::vector<AdjEntry> entries,
                                     std::optional<Var> weights, std::size_t num_slots,
                                     std::vector<double> degree_offset)
    : n_(n),
      entries_(std::make_shared<const std::vector<AdjEntry>>(std::move(entries))),
      weights_(weights),
      num_slots_(num_slots),
      degree_offset_(std::make_shared<const std::vector<double>>(std::move(degree_offset))) {
    const auto& entries_ref = *entries_;
    if (!degree_offset_->empty() && degree_offset_->size() != n_)
        throw ShapeError("degree offset length must equal node count");
    bool ordered = true;  // by (dst, src): duplicates are then adjacent
    for (std::size_t k = 0; k < entries_ref.size(); ++k) {
        const AdjEntry& e = entries_ref[k];
        if (e.src < 0 || e.dst < 0 || static_cast<std::size_t>(e.src) >= n_ ||
            static_cast<std::size_t>(e.dst) >= n_)
            throw IndexError("adjacency entry (" + std::to_string(e.src) + ", " +
                             std::to_string(e.dst) + ") outside node range");
        if (e.slot != AdjEntry::kUnitWeight &&
            (e.slot < 0 || static_cast<std::size_t>(e.slot) >= num_slots_))
            throw IndexError("adjacency slot out of range");
        if (e.slot != AdjEntry::kUnitWeight && !weights_)
            throw Error("weighted entry without a weight vector");
        if (k > 0) {
            const AdjEntry& p = entries_ref[k - 1];
            if (p.dst == e.dst && p.src == e.src)
                throw ValidationError("duplicate-entry", "adjacency holds a duplicate (src, dst) pair");
            if (p.dst > e.dst || (p.dst == e.dst && p.src > e.src)) ordered = false;
        }
    }
    if (ordered) return;
    std::vector<std::pair<int, int>> seen;
    seen.reserve(entries_ref.size());
    for (const AdjEntry& e : entries_ref) seen.emplace_back(e.src, e.dst);
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw ValidationError("duplicate-entry", "adjacency holds a duplicate (src, dst) pair");
}

SparseWeightedAdj SparseWeightedAdj::symmetric(std::size_t n,
                                               std::span<const std::pair<int, int>> pairs,
                                               std::optional<Var> weights, bool self_loops,
                                               std::vector<double> degree_offset) {
    std::vector<AdjEntry> entries;
    entries.reserve(2 * pairs.size() + (self_loops ? n : 0));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [u, v] = pairs[k];
        if (u == v) throw ValidationError("self-loop", "edge pairs must not be self-loops");
        const int slot = weights ? static_cast<int>(k) : AdjEntry::kUnitWeight;
        entries.push_back({u, v, slot});
        entries.push_back({v, u, slot});
    }
    if (self_loops)
        for (std::size_t i = 0; i < n; ++i)
            entries.push_back({static_cast<int>(i), static_cast<int>(i), AdjEntry::kUnitWeight});
    // Bucket by destination, then order each (short) bucket by source.
    std::vector<std::size_t> start(n + 1, 0);
    for (const AdjEntry& e : entries) {
        if (e.dst < 0 || static_cast<std::size_t>(e.dst) >= n) throw IndexError("edge endpoint out of range");
        ++start[static_cast<std::size_t>(e.dst) + 1];
    }
    for (std::size_t i = 1; i <= n; ++i) start[i] += start[i - 1];
    std::vector<AdjEntry> sorted(entries.size());
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (const AdjEntry& e : entries) sorted[fill[static_cast<std::size_t>(e.dst)]++] = e;
    for (std::size_t i = 0; i < n; ++i)
        std::sort(sorted.begin() + static_cast<std::ptrdiff_t>(start[i]),
                  sorted.begin() + static_cast<std::ptrdiff_t>(start[i + 1]),
                  [](const AdjEntry& a, const AdjEntry& b) { return a.src < b.src; });
    return SparseWeightedAdj(n, std::move(sorted), weights, weights ? pairs.size() : 0,
                             std::move(degree_offset));
}

std::vector<double> SparseWeightedAdj::entry_weights(const Tape& tape) const {
    std::vector<double> out(entries_->size(), 1.0);
    if (!weights_) return out;
    const DenseMatrix& w = tape.value(*weights_);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const int slot = (*entries_)[k].slot;
        if (slot != AdjEntry::kUnitWeight) out[k] = w(slot, 0);
    }
    return out;
}

double SparseWeightedAdj::weight(const Tape& tape, const AdjEntry& e) const {
    if (e.slot == AdjEntry::kUnitWeight) return 1.0;
    return tape.value(*weights_)(e.slot, 0);
}

}  // namespace gnnevade::tensor
