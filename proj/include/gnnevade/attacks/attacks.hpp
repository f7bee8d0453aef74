#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gnnevade/common/random.hpp"
#include "gnnevade/models/compute_graph.hpp"
#include "gnnevade/models/model.hpp"

namespace gnnevade::attacks {

using graph::Edge;
using graph::FeatureKind;
using graph::Graph;
using graph::NodeId;
using models::Augmentation;
using models::ModelParams;
using tensor::DenseMatrix;

/// Limits of one feature attack. eps0 bounds the fraction of touched
/// coordinates per attacker row; eps_inf the magnitude of each coordinate
/// (continuous features only).
struct Budget {
    double eps0 = 0.01;
    std::optional<double> eps_inf;
    std::size_t iterations = 20;
    std::optional<double> gamma;  ///< defaults to 2.5 * eps_inf / iterations
    bool clamp_nonneg = false;    ///< keep perturbed continuous features >= 0

    /// floor(eps0 * D) coordinates per attacker row.
    std::size_t l0_limit(std::size_t num_features) const;
    double step() const;
    void validate(FeatureKind kind) const;
};

struct AttackGoal {
    enum class Mode { non_targeted, targeted };
    Mode mode = Mode::non_targeted;
    int reference = 0;  ///< the model's clean prediction for the victim
    int target = 0;     ///< y_adv, targeted mode only

    static AttackGoal non_targeted(int reference);
    static AttackGoal targeted(int reference, int target);

    bool reached(int prediction) const;
    /// Class whose cross-entropy the attack pushes up (non-targeted) or down (targeted).
    int loss_label() const { return mode == Mode::targeted ? target : reference; }
    /// +1 when the attack ascends its loss, -1 when it descends.
    double direction() const { return mode == Mode::targeted ? -1.0 : 1.0; }
};

struct EdgeFlip {
    Edge edge;
    bool inserted = false;  ///< false: an existing edge was removed
};

/// Everything the attacker changed. Feature rows are stored densely, one
/// row per attacker, together with the attackers' clean rows so that budget
/// checks need nothing else.
struct Perturbation {
    std::vector<NodeId> attackers;
    DenseMatrix eta;        ///< attackers x D
    DenseMatrix base_rows;  ///< attackers x D, clean feature rows
    std::vector<EdgeFlip> flipped_edges;
    /// Discrete attacks: (attacker position, feature) in the order flipped.
    std::vector<std::pair<std::size_t, std::size_t>> flip_order;
};

struct AttackOutcome {
    NodeId victim = 0;
    std::string variant;
    bool success = false;
    int pred_before = 0;
    int pred_after = 0;
    std::size_t iterations = 0;
    std::size_t l0_used = 0;  ///< most coordinates touched in any attacker row
    double linf_used = 0.0;
    Perturbation perturbation;
};

nlohmann::json to_json(const AttackOutcome& outcome);

/// Empty when every row of the perturbation respects the budget, otherwise a
/// description of the first violation. Binary rows must stay in {0, 1}.
std::optional<std::string> budget_violation(const Perturbation& p, FeatureKind kind, const Budget& budget);

/// A trained model frozen for attacks on one graph, with the input-layer
/// projections and clean predictions precomputed.
class FrozenModel {
public:
    FrozenModel(const ModelParams& params, const Graph& g);

    const ModelParams& params() const noexcept { return params_; }
    const Graph& graph() const noexcept { return graph_; }
    const models::InputProjection& projection() const noexcept { return projection_; }
    const std::vector<int>& clean_predictions() const noexcept { return clean_; }
    std::size_t layers() const noexcept { return params_.layers; }

private:
    const ModelParams& params_;
    const Graph& graph_;
    models::InputProjection projection_;
    std::vector<int> clean_;
};

// ---- attacker selection -----------------------------------------------

enum class RandomVariant { any, hops, direct };

/// Uniform draw from N_L(v) (any), from N_L(v) at distance >= 2 (hops), or v itself (direct).
NodeId choose_attacker_random(const Graph& g, NodeId v, RandomVariant variant, std::size_t layers, Rng& rng);

/// `count` distinct attackers drawn without replacement from the same
/// candidate set; the first draw coincides with choose_attacker_random.
/// Fewer are returned when fewer candidates exist.
std::vector<NodeId> choose_attackers_random(const Graph& g, NodeId v, RandomVariant variant, std::size_t layers,
                                            std::size_t count, Rng& rng);

/// Uniform draw among nodes at exactly `hops` from v.
NodeId choose_attacker_at_distance(const Graph& g, NodeId v, std::size_t hops, Rng& rng);

/// Candidate in N_L(v) whose feature row has the largest loss-gradient
/// infinity norm; ties go to the lowest id.
NodeId choose_attacker_gradchoice(const FrozenModel& m, NodeId v, const AttackGoal& goal);

/// Minimum-degree direct neighbor of v; ties go to the lowest id.
NodeId choose_attacker_topology(const Graph& g, NodeId v);

// ---- feature attacks ---------------------------------------------------

/// Clamp to [-eps_inf, eps_inf] then keep the floor(eps0 * D) largest
/// magnitudes (lowest index wins ties at the cut).
std::vector<double> project_continuous(std::span<const double> eta, const Budget& budget);

/// Gradient attack on the feature rows of `attackers` against victim v.
/// `direct` permits v itself among the attackers.
AttackOutcome single_node_attack(const FrozenModel& m, NodeId v, std::span<const NodeId> attackers,
                                 const AttackGoal& goal, const Budget& budget, bool direct = false);

/// Attacker row replaced by zeros.
AttackOutcome zero_features_attack(const FrozenModel& m, NodeId v, NodeId attacker);

/// Adds a zero-feature node joined to v by one edge and attacks through it.
AttackOutcome injection_attack(const FrozenModel& m, NodeId v, const AttackGoal& goal, const Budget& budget);

// ---- edge attacks ------------------------------------------------------

struct CandidateEdge {
    Edge edge;
    double weight = 0.0;  ///< 1 for existing edges, 0 for potential ones
    friend bool operator==(const CandidateEdge&, const CandidateEdge&) = default;
};

/// Existing edges of u plus every pair (u, w) with w in N_{L-1}(v) or w = v.
std::vector<CandidateEdge> candidate_edges(const Graph& g, NodeId v, NodeId u, std::size_t layers);

/// Every pair (x, w) with x in V and w in N_{L-1}(v) or w = v.
std::vector<CandidateEdge> global_candidate_edges(const Graph& g, NodeId v, std::size_t layers);

enum class EdgeMode { random_node, gradchoice_global };

/// Greedy edge flipping over a fixed candidate set: gradients are recomputed
/// after each flip; stops after `budget_edges` flips or on success.
AttackOutcome multi_edge_attack(const FrozenModel& m, NodeId v, std::size_t budget_edges,
                                std::vector<CandidateEdge> candidates, const AttackGoal& goal);

/// Builds the candidate set for `mode` (drawing a random attacker from `rng`
/// in random-node mode) and runs the greedy loop.
AttackOutcome multi_edge_attack(const FrozenModel& m, NodeId v, std::size_t budget_edges, EdgeMode mode,
                                const AttackGoal& goal, Rng& rng);
AttackOutcome single_edge_attack(const FrozenModel& m, NodeId v, EdgeMode mode, const AttackGoal& goal, Rng& rng);

}  // namespace gnnevade::attacks
