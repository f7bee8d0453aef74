#include "gnnevade/attacks/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gnnevade/common/errors.hpp"
#include "gnnevade/tensor/ops.hpp"

namespace gnnevade::attacks {

using models::ComputeGraph;
using models::NodeFeatures;
using tensor::Tape;
using tensor::Var;

// ---- budget / goal -----------------------------------------------------

std::size_t Budget::l0_limit(std::size_t num_features) const {
    // The small slack keeps products such as 0.05 * 500 from rounding down.
    return static_cast<std::size_t>(std::floor(eps0 * static_cast<double>(num_features) + 1e-9));
}

double Budget::step() const {
    if (gamma) return *gamma;
    if (!eps_inf) throw ConfigError("step size needs gamma or eps_inf");
    return 2.5 * *eps_inf / static_cast<double>(iterations);
}

void Budget::validate(FeatureKind kind) const {
    if (!(eps0 >= 0.0 && eps0 <= 1.0)) throw ConfigError("eps0 must lie in [0, 1]");
    if (iterations == 0) throw ConfigError("attack iterations must be at least 1");
    if (gamma && !(*gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (kind == FeatureKind::continuous) {
        if (!eps_inf || !(*eps_inf > 0.0)) throw ConfigError("continuous features need eps_inf > 0");
    } else if (eps_inf && !(*eps_inf > 0.0)) {
        throw ConfigError("eps_inf must be positive");
    }
}

AttackGoal AttackGoal::non_targeted(int reference) {
    AttackGoal g;
    g.reference = reference;
    return g;
}

AttackGoal AttackGoal::targeted(int reference, int target) {
    if (target == reference) throw ConfigError("targeted label must differ from the current prediction");
    AttackGoal g;
    g.mode = Mode::targeted;
    g.reference = reference;
    g.target = target;
    return g;
}

bool AttackGoal::reached(int prediction) const {
    return mode == Mode::targeted ? prediction == target : prediction != reference;
}

// ---- outcome helpers ---------------------------------------------------

nlohmann::json to_json(const AttackOutcome& o) {
    using nlohmann::json;
    json eta = json::array();
    for (Eigen::Index a = 0; a < o.perturbation.eta.rows(); ++a) {
        json row = json::array();
        for (Eigen::Index j = 0; j < o.perturbation.eta.cols(); ++j)
            if (o.perturbation.eta(a, j) != 0.0) row.push_back(json::array({j, o.perturbation.eta(a, j)}));
        eta.push_back(std::move(row));
    }
    json flips = json::array();
    for (const EdgeFlip& f : o.perturbation.flipped_edges)
        flips.push_back(json::array({f.edge.u, f.edge.v, f.inserted ? "insert" : "remove"}));
    return {{"victim", o.victim},
            {"attackers", o.perturbation.attackers},
            {"variant", o.variant},
            {"success", o.success},
            {"pred_before", o.pred_before},
            {"pred_after", o.pred_after},
            {"iters", o.iterations},
            {"l0_used", o.l0_used},
            {"linf_used", o.linf_used},
            {"flipped_edges", std::move(flips)},
            {"eta", std::move(eta)}};
}

std::optional<std::string> budget_violation(const Perturbation& p, FeatureKind kind, const Budget& budget) {
    const auto& eta = p.eta;
    if (eta.rows() == 0) return std::nullopt;
    if (p.base_rows.rows() != eta.rows() || p.base_rows.cols() != eta.cols())
        return "perturbation rows do not match the attackers' clean rows";
    const std::size_t limit = budget.l0_limit(static_cast<std::size_t>(eta.cols()));
    for (Eigen::Index a = 0; a < eta.rows(); ++a) {
        const auto nnz = static_cast<std::size_t>((eta.row(a).array() != 0.0).count());
        if (nnz > limit)
            return "attacker " + std::to_string(a) + " touches " + std::to_string(nnz) + " features, limit " +
                   std::to_string(limit);
        for (Eigen::Index j = 0; j < eta.cols(); ++j) {
            const double x = p.base_rows(a, j) + eta(a, j);
            if (kind == FeatureKind::binary) {
                if (x != 0.0 && x != 1.0) return "binary feature left {0, 1}";
            } else {
                if (std::abs(eta(a, j)) > *budget.eps_inf) return "perturbation exceeds eps_inf";
                if (budget.clamp_nonneg && x < 0.0) return "perturbed feature is negative";
            }
        }
    }
    return std::nullopt;
}

namespace {

void fill_usage(AttackOutcome& o) {
    const auto& eta = o.perturbation.eta;
    o.l0_used = 0;
    o.linf_used = 0.0;
    for (Eigen::Index a = 0; a < eta.rows(); ++a)
        o.l0_used = std::max(o.l0_used, static_cast<std::size_t>((eta.row(a).array() != 0.0).count()));
    if (eta.size() > 0) o.linf_used = eta.cwiseAbs().maxCoeff();
}

int argmax_row(const DenseMatrix& m, Eigen::Index r) {
    return models::argmax(std::span<const double>(m.row(r).data(), static_cast<std::size_t>(m.cols())));
}

bool contains(const std::vector<NodeId>& sorted, NodeId x) {
    return std::binary_search(sorted.begin(), sorted.end(), x);
}

/// The victim's receptive field with perturbable attacker rows.
class FeatureProblem {
public:
    FeatureProblem(const FrozenModel& m, NodeId v, std::span<const NodeId> attackers, Augmentation aug)
        : m_(m), aug_(std::move(aug)), cg_(ComputeGraph::receptive_field(m.graph(), v, m.layers(), aug_)) {
        victim_ = *cg_.local_id(v);
        for (NodeId a : attackers) {
            const auto local = cg_.local_id(a);
            if (!local) throw ValidationError("attacker-reach", "attacker " + std::to_string(a) + " is out of reach");
            rows_.push_back(*local);
        }
    }

    struct Result {
        int prediction;
        DenseMatrix grad;
    };

    Result run(const DenseMatrix& eta, int label, bool want_grad) const {
        Tape tape;
        const auto binding = models::bind_params(tape, m_.params(), false);
        NodeFeatures features = NodeFeatures::projected(m_.projection(), m_.params(), cg_, aug_);
        const Var delta = tape.leaf(eta, want_grad);
        features.perturb(rows_, delta);
        const Var out = models::forward(tape, m_.params(), binding, cg_, features);
        Result r{argmax_row(tape.value(out), victim_), {}};
        if (want_grad) {
            const int rows[] = {victim_};
            const int labels[] = {label};
            tape.backward(tensor::cross_entropy(tape, out, rows, labels));
            r.grad = tape.grad(delta);
        }
        return r;
    }

private:
    const FrozenModel& m_;
    Augmentation aug_;
    ComputeGraph cg_;
    int victim_ = 0;
    std::vector<int> rows_;
};

std::vector<double> project_row(std::span<const double> eta, std::span<const double> base, const Budget& b) {
    const double cap = *b.eps_inf;
    std::vector<double> out(eta.size());
    for (std::size_t j = 0; j < eta.size(); ++j) {
        double x = std::clamp(eta[j], -cap, cap);
        if (b.clamp_nonneg && !base.empty()) x = std::max(x, -base[j]);
        out[j] = x;
    }
    const std::size_t keep = b.l0_limit(eta.size());
    if (keep >= out.size()) return out;
    std::vector<std::size_t> order(out.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t c) { return std::abs(out[a]) > std::abs(out[c]); });
    for (std::size_t k = keep; k < order.size(); ++k) out[order[k]] = 0.0;
    return out;
}

/// Shared by single_node_attack and injection_attack. `base_rows` holds the
/// attackers' clean features (rows of the augmented graph).
AttackOutcome feature_attack(const FrozenModel& m, NodeId v, std::vector<NodeId> attackers, DenseMatrix base_rows,
                             const AttackGoal& goal, const Budget& budget, Augmentation aug, std::string variant) {
    const Graph& g = m.graph();
    budget.validate(g.feature_kind());
    const FeatureProblem problem(m, v, attackers, std::move(aug));
    const auto A = static_cast<Eigen::Index>(attackers.size());
    const auto D = static_cast<Eigen::Index>(g.num_features());
    const std::size_t limit = budget.l0_limit(g.num_features());
    const bool binary = g.feature_kind() == FeatureKind::binary;
    const int label = goal.loss_label();
    const double dir = goal.direction();

    DenseMatrix eta = DenseMatrix::Zero(A, D);
    std::vector<std::size_t> used(attackers.size(), 0);
    std::vector<char> flipped(static_cast<std::size_t>(A * D), 0);
    std::vector<std::pair<std::size_t, std::size_t>> order;
    std::size_t iters = 0;
    int pred = 0;
    while (true) {
        const bool can_continue = limit > 0 && (binary || iters < budget.iterations);
        FeatureProblem::Result r = problem.run(eta, label, can_continue);
        pred = r.prediction;
        if (goal.reached(pred) || !can_continue) break;
        if (binary) {
            double best = -std::numeric_limits<double>::infinity();
            Eigen::Index best_a = -1;
            Eigen::Index best_j = -1;
            for (Eigen::Index a = 0; a < A; ++a) {
                if (used[a] >= limit) continue;
                for (Eigen::Index j = 0; j < D; ++j) {
                    if (flipped[a * D + j]) continue;
                    const double score = dir * r.grad(a, j) * (1.0 - 2.0 * base_rows(a, j));
                    if (score > best) {
                        best = score;
                        best_a = a;
                        best_j = j;
                    }
                }
            }
            if (best_a < 0) break;
            eta(best_a, best_j) = 1.0 - 2.0 * base_rows(best_a, best_j);
            flipped[best_a * D + best_j] = 1;
            ++used[best_a];
            order.emplace_back(static_cast<std::size_t>(best_a), static_cast<std::size_t>(best_j));
        } else {
            const double gamma = budget.step();
            for (Eigen::Index a = 0; a < A; ++a) {
                DenseMatrix row = eta.row(a) + dir * gamma * r.grad.row(a);
                const auto projected =
                    project_row(std::span<const double>(row.data(), static_cast<std::size_t>(D)),
                                std::span<const double>(base_rows.row(a).data(), static_cast<std::size_t>(D)), budget);
                for (Eigen::Index j = 0; j < D; ++j) eta(a, j) = projected[j];
            }
        }
        ++iters;
    }

    AttackOutcome o;
    o.victim = v;
    o.variant = std::move(variant);
    o.pred_before = goal.reference;
    o.pred_after = pred;
    o.success = goal.reached(pred);
    o.iterations = iters;
    o.perturbation.attackers = std::move(attackers);
    o.perturbation.eta = std::move(eta);
    o.perturbation.base_rows = std::move(base_rows);
    o.perturbation.flip_order = std::move(order);
    fill_usage(o);
    return o;
}

}  // namespace

std::vector<double> project_continuous(std::span<const double> eta, const Budget& budget) {
    if (!budget.eps_inf || !(*budget.eps_inf > 0.0)) throw ConfigError("project_continuous needs eps_inf > 0");
    return project_row(eta, {}, budget);
}

FrozenModel::FrozenModel(const ModelParams& params, const Graph& g)
    : params_(params), graph_(g), projection_(models::project_inputs(params, g)), clean_(models::predict(params, g)) {}

// ---- attacker selection -----------------------------------------------

namespace {

std::vector<NodeId> random_candidates(const Graph& g, NodeId v, RandomVariant variant, std::size_t layers) {
    g.check_node(v);
    if (variant == RandomVariant::direct) return {v};
    std::vector<NodeId> c = graph::k_hop_neighborhood(g, v, layers);
    if (variant == RandomVariant::hops) {
        const auto nb = g.neighborhood().neighbors(v);
        std::erase_if(c, [&](NodeId u) { return std::binary_search(nb.begin(), nb.end(), u); });
    }
    if (c.empty()) throw NoAttackerError("victim " + std::to_string(v) + " has no candidate attacker");
    return c;
}

}  // namespace

NodeId choose_attacker_random(const Graph& g, NodeId v, RandomVariant variant, std::size_t layers, Rng& rng) {
    const auto c = random_candidates(g, v, variant, layers);
    return c[rng.index(c.size())];
}

std::vector<NodeId> choose_attackers_random(const Graph& g, NodeId v, RandomVariant variant, std::size_t layers,
                                            std::size_t count, Rng& rng) {
    if (count == 0) throw ConfigError("attacker count must be at least 1");
    auto c = random_candidates(g, v, variant, layers);
    const std::size_t take = std::min(count, c.size());
    for (std::size_t k = 0; k < take; ++k) std::swap(c[k], c[k + rng.index(c.size() - k)]);
    c.resize(take);
    return c;
}

NodeId choose_attacker_at_distance(const Graph& g, NodeId v, std::size_t hops, Rng& rng) {
    g.check_node(v);
    if (hops == 0) return v;
    const auto dist = graph::bfs_distances(g.neighborhood(), v, hops);
    std::vector<NodeId> c;
    for (std::size_t u = 0; u < dist.size(); ++u)
        if (dist[u] && *dist[u] == hops) c.push_back(static_cast<NodeId>(u));
    if (c.empty())
        throw NoAttackerError("victim " + std::to_string(v) + " has no node at distance " + std::to_string(hops));
    return c[rng.index(c.size())];
}

NodeId choose_attacker_gradchoice(const FrozenModel& m, NodeId v, const AttackGoal& goal) {
    const Graph& g = m.graph();
    g.check_node(v);
    const auto candidates = graph::k_hop_neighborhood(g, v, m.layers());
    if (candidates.empty()) throw NoAttackerError("victim " + std::to_string(v) + " has no candidate attacker");
    const ComputeGraph cg = ComputeGraph::receptive_field(g, v, m.layers());
    Tape tape;
    const auto binding = models::bind_params(tape, m.params(), false);
    const NodeFeatures features = NodeFeatures::dense(tape, g, cg, {}, true);
    const Var out = models::forward(tape, m.params(), binding, cg, features);
    const int rows[] = {*cg.local_id(v)};
    const int labels[] = {goal.loss_label()};
    tape.backward(tensor::cross_entropy(tape, out, rows, labels));
    const DenseMatrix grad = tape.grad(*features.dense_rows());
    NodeId best = candidates.front();
    double best_norm = -1.0;
    for (NodeId c : candidates) {
        const double norm = grad.row(*cg.local_id(c)).cwiseAbs().maxCoeff();
        // Norms equal up to rounding count as ties, which go to the lowest id.
        if (norm > best_norm * (1.0 + 1e-12) + 1e-300) {
            best_norm = norm;
            best = c;
        }
    }
    return best;
}

NodeId choose_attacker_topology(const Graph& g, NodeId v) {
    g.check_node(v);
    const auto nb = g.neighborhood().neighbors(v);
    if (nb.empty()) throw NoAttackerError("victim " + std::to_string(v) + " is isolated");
    NodeId best = nb.front();
    for (NodeId u : nb)
        if (g.degree(u) < g.degree(best)) best = u;
    return best;
}

// ---- feature attacks ---------------------------------------------------

AttackOutcome single_node_attack(const FrozenModel& m, NodeId v, std::span<const NodeId> attackers,
                                 const AttackGoal& goal, const Budget& budget, bool direct) {
    const Graph& g = m.graph();
    g.check_node(v);
    if (attackers.empty()) throw ConfigError("single-node attack needs at least one attacker");
    std::vector<NodeId> list(attackers.begin(), attackers.end());
    std::vector<NodeId> sorted = list;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ConfigError("attackers must be distinct");
    const auto reach = graph::k_hop_neighborhood(g, v, m.layers());
    DenseMatrix base(static_cast<Eigen::Index>(list.size()), g.features().cols());
    for (std::size_t k = 0; k < list.size(); ++k) {
        const NodeId a = list[k];
        g.check_node(a);
        if (a == v) {
            if (!direct) throw ConfigError("the victim cannot attack itself outside the direct variant");
        } else if (!contains(reach, a)) {
            throw ValidationError("attacker-reach", "attacker " + std::to_string(a) + " is farther than " +
                                                        std::to_string(m.layers()) + " hops from the victim");
        }
        base.row(static_cast<Eigen::Index>(k)) = g.features().row(a);
    }
    return feature_attack(m, v, std::move(list), std::move(base), goal, budget, {},
                          direct ? "single-node/direct" : "single-node");
}

AttackOutcome zero_features_attack(const FrozenModel& m, NodeId v, NodeId attacker) {
    const Graph& g = m.graph();
    g.check_node(v);
    g.check_node(attacker);
    if (attacker != v && !contains(graph::k_hop_neighborhood(g, v, m.layers()), attacker))
        throw ValidationError("attacker-reach", "attacker " + std::to_string(attacker) + " is out of reach");
    const NodeId attackers[] = {attacker};
    const FeatureProblem problem(m, v, attackers, {});
    const int reference = m.clean_predictions()[v];
    AttackOutcome o;
    o.victim = v;
    o.variant = "zero-features";
    o.pred_before = reference;
    o.perturbation.attackers = {attacker};
    o.perturbation.base_rows = g.features().row(attacker);
    o.perturbation.eta = -o.perturbation.base_rows;
    o.pred_after = problem.run(o.perturbation.eta, reference, false).prediction;
    o.success = o.pred_after != reference;
    o.iterations = 1;
    fill_usage(o);
    return o;
}

AttackOutcome injection_attack(const FrozenModel& m, NodeId v, const AttackGoal& goal, const Budget& budget) {
    const Graph& g = m.graph();
    g.check_node(v);
    const auto injected = static_cast<NodeId>(g.num_nodes());
    Augmentation aug;
    aug.injected_features = DenseMatrix::Zero(1, g.features().cols());
    aug.edges = {{v, injected}};
    aug.weights = {1.0};
    DenseMatrix base = aug.injected_features;
    return feature_attack(m, v, {injected}, std::move(base), goal, budget, std::move(aug), "injection");
}

// ---- edge attacks ------------------------------------------------------

namespace {

Edge ordered(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::vector<NodeId> vicinity(const Graph& g, NodeId v, std::size_t layers) {
    std::vector<NodeId> w = graph::k_hop_neighborhood(g, v, layers - 1);
    w.insert(std::lower_bound(w.begin(), w.end(), v), v);
    return w;
}

std::vector<CandidateEdge> finish(const Graph& g, std::vector<Edge> edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::vector<CandidateEdge> out;
    out.reserve(edges.size());
    for (const Edge& e : edges) out.push_back({e, g.has_edge(e.u, e.v) ? 1.0 : 0.0});
    return out;
}

}  // namespace

std::vector<CandidateEdge> candidate_edges(const Graph& g, NodeId v, NodeId u, std::size_t layers) {
    g.check_node(v);
    g.check_node(u);
    if (layers == 0) throw ConfigError("layers must be at least 1");
    std::vector<Edge> edges;
    for (NodeId z : g.neighborhood().neighbors(u)) edges.push_back(ordered(u, z));
    for (NodeId w : vicinity(g, v, layers))
        if (w != u) edges.push_back(ordered(u, w));
    return finish(g, std::move(edges));
}

std::vector<CandidateEdge> global_candidate_edges(const Graph& g, NodeId v, std::size_t layers) {
    g.check_node(v);
    if (layers == 0) throw ConfigError("layers must be at least 1");
    std::vector<Edge> edges;
    const auto n = static_cast<NodeId>(g.num_nodes());
    for (NodeId w : vicinity(g, v, layers))
        for (NodeId x = 0; x < n; ++x)
            if (x != w) edges.push_back(ordered(x, w));
    return finish(g, std::move(edges));
}

AttackOutcome multi_edge_attack(const FrozenModel& m, NodeId v, std::size_t budget_edges,
                                std::vector<CandidateEdge> candidates, const AttackGoal& goal) {
    const Graph& g = m.graph();
    g.check_node(v);
    if (budget_edges == 0) throw ConfigError("edge budget must be at least 1");
    if (candidates.empty()) throw NoAttackerError("victim " + std::to_string(v) + " has no candidate edge");
    std::vector<char> flipped(candidates.size(), 0);
    std::vector<EdgeFlip> flips;
    int pred = 0;
    while (true) {
        Augmentation aug;
        aug.injected_features = DenseMatrix::Zero(0, g.features().cols());
        for (const CandidateEdge& c : candidates) {
            aug.edges.push_back(c.edge);
            aug.weights.push_back(c.weight);
        }
        const ComputeGraph cg = ComputeGraph::receptive_field(g, v, m.layers(), aug);
        Tape tape;
        const auto binding = models::bind_params(tape, m.params(), false);
        const NodeFeatures features = NodeFeatures::projected(m.projection(), m.params(), cg, aug);
        DenseMatrix w0(static_cast<Eigen::Index>(cg.weights().size()), 1);
        for (std::size_t k = 0; k < cg.weights().size(); ++k) w0(static_cast<Eigen::Index>(k), 0) = cg.weights()[k];
        const bool can_continue = flips.size() < budget_edges;
        const Var w = tape.leaf(std::move(w0), can_continue);
        const Var out = models::forward(tape, m.params(), binding, cg, features, w);
        const int victim = *cg.local_id(v);
        pred = argmax_row(tape.value(out), victim);
        if (goal.reached(pred) || !can_continue) break;
        const int rows[] = {victim};
        const int labels[] = {goal.loss_label()};
        tape.backward(tensor::cross_entropy(tape, out, rows, labels));
        const DenseMatrix grad = tape.grad(w);
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_k = candidates.size();
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            if (flipped[k]) continue;
            const auto slot = cg.slot(candidates[k].edge.u, candidates[k].edge.v);
            const double s = slot ? goal.direction() * grad(static_cast<Eigen::Index>(*slot), 0) : 0.0;
            const double score = (1.0 - 2.0 * candidates[k].weight) * s;
            if (score > best) {
                best = score;
                best_k = k;
            }
        }
        if (best_k == candidates.size()) break;
        CandidateEdge& c = candidates[best_k];
        c.weight = 1.0 - c.weight;
        flipped[best_k] = 1;
        flips.push_back({c.edge, c.weight == 1.0});
    }
    AttackOutcome o;
    o.victim = v;
    o.variant = budget_edges == 1 ? "single-edge" : "multi-edge";
    o.pred_before = goal.reference;
    o.pred_after = pred;
    o.success = goal.reached(pred);
    o.iterations = flips.size();
    o.perturbation.flipped_edges = std::move(flips);
    o.perturbation.eta = DenseMatrix(0, 0);
    o.perturbation.base_rows = DenseMatrix(0, 0);
    return o;
}

AttackOutcome multi_edge_attack(const FrozenModel& m, NodeId v, std::size_t budget_edges, EdgeMode mode,
                                const AttackGoal& goal, Rng& rng) {
    const Graph& g = m.graph();
    if (mode == EdgeMode::gradchoice_global) {
        AttackOutcome o = multi_edge_attack(m, v, budget_edges, global_candidate_edges(g, v, m.layers()), goal);
        o.variant += "/gradchoice";
        return o;
    }
    const NodeId u = choose_attacker_random(g, v, RandomVariant::any, m.layers(), rng);
    AttackOutcome o = multi_edge_attack(m, v, budget_edges, candidate_edges(g, v, u, m.layers()), goal);
    o.perturbation.attackers = {u};
    o.variant += "/random";
    return o;
}

AttackOutcome single_edge_attack(const FrozenModel& m, NodeId v, EdgeMode mode, const AttackGoal& goal, Rng& rng) {
    return multi_edge_attack(m, v, 1, mode, goal, rng);
}

}  // namespace gnnevade::attacks
