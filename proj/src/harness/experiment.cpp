#include "gnnevade/harness/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "gnnevade/common/errors.hpp"
#include "gnnevade/common/random.hpp"
#include "gnnevade/graph/bundle.hpp"
#include "gnnevade/models/checkpoint.hpp"

namespace gnnevade::harness {

using nlohmann::json;
using namespace attacks;

const char* to_string(AttackKind k) noexcept {
    switch (k) {
        case AttackKind::none: return "none";
        case AttackKind::single_node: return "single-node";
        case AttackKind::single_edge: return "single-edge";
        case AttackKind::multi_edge: return "multi-edge";
        case AttackKind::zero_features: return "zero-features";
        case AttackKind::injection: return "injection";
    }
    return "?";
}

const char* to_string(AttackerChoice c) noexcept {
    switch (c) {
        case AttackerChoice::random: return "random";
        case AttackerChoice::gradchoice: return "gradchoice";
        case AttackerChoice::topology: return "topology";
        case AttackerChoice::direct: return "direct";
        case AttackerChoice::hops: return "hops";
    }
    return "?";
}

AttackKind attack_kind_from_string(const std::string& s) {
    for (AttackKind k : {AttackKind::none, AttackKind::single_node, AttackKind::single_edge, AttackKind::multi_edge,
                         AttackKind::zero_features, AttackKind::injection})
        if (s == to_string(k)) return k;
    throw ConfigError("unknown attack '" + s + "'");
}

AttackerChoice attacker_choice_from_string(const std::string& s) {
    for (AttackerChoice c : {AttackerChoice::random, AttackerChoice::gradchoice, AttackerChoice::topology,
                             AttackerChoice::direct, AttackerChoice::hops})
        if (s == to_string(c)) return c;
    throw ConfigError("unknown attacker choice '" + s + "'");
}

TargetSpec TargetSpec::parse(const std::string& s) {
    TargetSpec t;
    if (s == "random") {
        t.mode = Mode::random;
        return t;
    }
    std::size_t used = 0;
    int value = -1;
    try {
        value = std::stoi(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || value < 0) throw ConfigError("--targeted expects a class index or 'random', got '" + s + "'");
    t.mode = Mode::fixed;
    t.target = value;
    return t;
}

void AttackSpec::validate(graph::FeatureKind feature_kind) const {
    if (num_attackers == 0) throw ConfigError("attacker count must be at least 1");
    switch (kind) {
        case AttackKind::none:
            return;
        case AttackKind::single_node:
            budget.validate(feature_kind);
            if (num_attackers > 1 && attacker != AttackerChoice::random && attacker != AttackerChoice::hops)
                throw ConfigError("several attackers require the random or hops attacker choice");
            if (distance && attacker != AttackerChoice::random)
                throw ConfigError("a fixed attacker distance requires the random attacker choice");
            if (distance && num_attackers > 1) throw ConfigError("a fixed attacker distance allows one attacker");
            return;
        case AttackKind::zero_features:
            if (attacker == AttackerChoice::gradchoice) throw ConfigError("zero-features takes a model-free attacker");
            if (num_attackers > 1) throw ConfigError("zero-features uses one attacker");
            return;
        case AttackKind::injection:
            budget.validate(feature_kind);
            return;
        case AttackKind::single_edge:
        case AttackKind::multi_edge:
            if (attacker != AttackerChoice::random && attacker != AttackerChoice::gradchoice)
                throw ConfigError("edge attacks take the random or gradchoice attacker choice");
            if (kind == AttackKind::multi_edge && edge_budget == 0) throw ConfigError("edge budget must be positive");
            if (num_attackers > 1) throw ConfigError("edge attacks use one attacker");
            return;
    }
}

json to_json(const AttackSpec& s) {
    json b = {{"eps0", s.budget.eps0}, {"iterations", s.budget.iterations}, {"clamp_nonneg", s.budget.clamp_nonneg}};
    b["eps_inf"] = s.budget.eps_inf ? json(*s.budget.eps_inf) : json(nullptr);
    b["gamma"] = s.budget.gamma ? json(*s.budget.gamma) : json(nullptr);
    json j = {{"kind", to_string(s.kind)}, {"attacker", to_string(s.attacker)}, {"num_attackers", s.num_attackers},
              {"budget", std::move(b)}};
    switch (s.target.mode) {
        case TargetSpec::Mode::none: j["targeted"] = nullptr; break;
        case TargetSpec::Mode::fixed: j["targeted"] = s.target.target; break;
        case TargetSpec::Mode::random: j["targeted"] = "random"; break;
    }
    if (s.kind == AttackKind::single_edge || s.kind == AttackKind::multi_edge) {
        j["edge_budget"] = s.kind == AttackKind::single_edge ? 1 : s.edge_budget;
        j["global_edges"] = s.global_edges || s.attacker == AttackerChoice::gradchoice;
    }
    j["distance"] = s.distance ? json(*s.distance) : json(nullptr);
    return j;
}

ContinuousPreset continuous_preset_from_string(const std::string& s) {
    if (s == "table") return ContinuousPreset::table;
    if (s == "text") return ContinuousPreset::text;
    throw ConfigError("unknown budget preset '" + s + "' (expected table or text)");
}

const char* to_string(ContinuousPreset p) noexcept { return p == ContinuousPreset::table ? "table" : "text"; }

Budget preset_budget(graph::FeatureKind kind, ContinuousPreset preset) {
    Budget b;
    if (kind == graph::FeatureKind::binary) {
        b.eps0 = 0.01;
        return b;
    }
    b.eps0 = 0.05;
    b.eps_inf = preset == ContinuousPreset::table ? 0.04 : 0.1;
    return b;
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    train.validate();
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["dataset"] = c.dataset.generic_string();
    j["architecture"] = models::to_string(c.arch);
    j["train"] = models::to_json(c.train);
    j["train"].erase("seed");
    if (c.adversarial) {
        j["adversarial"] = advtrain::to_json(*c.adversarial);
        j["adversarial"]["base"].erase("seed");
        j["deviations"] = json::array(
            {"adversarial training runs the inner attack for " + std::to_string(c.adversarial->inner.iterations) +
             " iterations per training node and epoch, fewer than the evaluation attack"});
    } else {
        j["adversarial"] = nullptr;
    }
    j["seeds"] = c.seeds;
    j["attack"] = to_json(c.attack);
    j["model_dir"] = c.model_dir ? json(c.model_dir->generic_string()) : json(nullptr);
    j["log_path"] = c.log_path ? json(c.log_path->generic_string()) : json(nullptr);
    return j;
}

Stat summarize(std::vector<double> per_seed) {
    Stat s;
    s.per_seed = std::move(per_seed);
    if (s.per_seed.empty()) return s;
    double sum = 0.0;
    for (double x : s.per_seed) sum += x;
    s.mean = sum / static_cast<double>(s.per_seed.size());
    double sq = 0.0;
    for (double x : s.per_seed) sq += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(s.per_seed.size()));
    return s;
}

namespace {

json stat_json(const Stat& s) { return {{"mean", s.mean}, {"std", s.std}, {"per_seed", s.per_seed}}; }

std::string csv_params(const json& params) {
    std::string out;
    for (auto it = params.begin(); it != params.end(); ++it) {
        if (!out.empty()) out += ';';
        out += it.key() + '=' + (it->is_string() ? it->get<std::string>() : it->dump());
    }
    return out;
}

}  // namespace

json ExperimentReport::to_json() const {
    json cells_json = json::array();
    for (const CellReport& c : cells) {
        json cj = {{"params", c.params},
                   {"accuracy", stat_json(c.accuracy)},
                   {"victims", c.victims},
                   {"unattackable", c.unattackable},
                   {"skipped", c.skipped},
                   {"budget_checked", c.budget_checked},
                   {"budget_violations", c.budget_violations}};
        cj["success_rate"] = c.success_rate ? stat_json(*c.success_rate) : json(nullptr);
        cells_json.push_back(std::move(cj));
    }
    return {{"config", config},
            {"clean_accuracy", stat_json(clean_accuracy)},
            {"best_val_accuracy", best_val_accuracy},
            {"cells", std::move(cells_json)},
            {"wall_time_seconds", wall_time_seconds}};
}

std::string ExperimentReport::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "cell,params,accuracy_mean,accuracy_std,success_mean,success_std,clean_mean,clean_std,victims,"
           "unattackable,skipped,budget_violations\n";
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const CellReport& c = cells[k];
        out << k << ",\"" << csv_params(c.params) << "\"," << c.accuracy.mean << ',' << c.accuracy.std << ',';
        if (c.success_rate)
            out << c.success_rate->mean << ',' << c.success_rate->std;
        else
            out << ',';
        out << ',' << clean_accuracy.mean << ',' << clean_accuracy.std << ',' << c.victims << ',' << c.unattackable
            << ',' << c.skipped << ',' << c.budget_violations << '\n';
    }
    return out.str();
}

std::size_t ExperimentReport::total_violations() const {
    std::size_t n = 0;
    for (const CellReport& c : cells) n += c.budget_violations;
    return n;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& json_path) {
    if (json_path.has_parent_path()) std::filesystem::create_directories(json_path.parent_path());
    std::ofstream j(json_path);
    if (!j) throw Error("cannot write report " + json_path.string());
    j << report.to_json().dump(2) << '\n';
    std::filesystem::path csv = json_path;
    csv.replace_extension(".csv");
    std::ofstream c(csv);
    if (!c) throw Error("cannot write report " + csv.string());
    c << report.to_csv();
}

namespace {

std::filesystem::path checkpoint_path(const ExperimentConfig& c, std::uint64_t seed) {
    std::string name = std::string(models::to_string(c.arch)) + "-L" + std::to_string(c.train.layers);
    if (c.adversarial) name += "-adv";
    return *c.model_dir / (name + "-seed" + std::to_string(seed) + ".ckpt");
}

}  // namespace

std::vector<SeedModel> prepare_models(const Graph& g, const ExperimentConfig& config) {
    config.validate();
    std::vector<SeedModel> out;
    for (std::uint64_t seed : config.seeds) {
        models::TrainConfig tc = config.train;
        tc.seed = seed;
        std::optional<advtrain::AdvTrainConfig> adv = config.adversarial;
        if (adv) adv->base = tc;
        const json tc_json = models::to_json(tc);
        const std::optional<json> adv_json = adv ? std::optional<json>(advtrain::to_json(*adv)) : std::nullopt;

        if (config.model_dir) {
            const auto path = checkpoint_path(config, seed);
            if (std::filesystem::exists(path)) {
                models::Checkpoint ck = models::load_checkpoint(path);
                if (ck.train_config != tc_json || ck.adv_config != adv_json)
                    throw ConfigError("checkpoint " + path.string() + " was trained with a different configuration");
                const auto& p = ck.model.params;
                if (p.arch != config.arch || p.in_dim != g.num_features() || p.num_classes != g.num_classes())
                    throw ConfigError("checkpoint " + path.string() + " does not fit the dataset");
                out.push_back({seed, std::move(ck.model)});
                continue;
            }
        }
        SeedModel sm{seed, adv ? advtrain::adversarial_train(g, config.arch, *adv) : models::train(g, config.arch, tc)};
        if (config.model_dir) {
            std::filesystem::create_directories(*config.model_dir);
            models::save_checkpoint({sm.model, tc_json, adv_json}, checkpoint_path(config, seed));
        }
        out.push_back(std::move(sm));
    }
    return out;
}

namespace {

struct VictimResult {
    int final_pred = 0;
    bool unattackable = false;
    bool skipped = false;
    bool success = false;
    bool checked = false;
    std::optional<std::string> violation;
    json log;
};

int draw_target(int clean, std::size_t classes, std::uint64_t seed, NodeId v) {
    Rng rng(stream_seed(stream_seed(seed, 0x7a), v));
    int t = static_cast<int>(rng.index(classes - 1));
    if (t >= clean) ++t;
    return t;
}

std::vector<NodeId> pick_attackers(const FrozenModel& m, NodeId v, const AttackSpec& s, const AttackGoal& goal,
                                   Rng& rng) {
    const Graph& g = m.graph();
    if (s.distance) return {choose_attacker_at_distance(g, v, *s.distance, rng)};
    switch (s.attacker) {
        case AttackerChoice::random:
        case AttackerChoice::hops: {
            const auto variant = s.attacker == AttackerChoice::hops ? RandomVariant::hops : RandomVariant::any;
            if (s.num_attackers == 1) return {choose_attacker_random(g, v, variant, m.layers(), rng)};
            return choose_attackers_random(g, v, variant, m.layers(), s.num_attackers, rng);
        }
        case AttackerChoice::direct: return {v};
        case AttackerChoice::gradchoice: return {choose_attacker_gradchoice(m, v, goal)};
        case AttackerChoice::topology: return {choose_attacker_topology(g, v)};
    }
    return {};
}

VictimResult attack_victim(const FrozenModel& m, NodeId v, const AttackSpec& s, std::uint64_t seed) {
    const Graph& g = m.graph();
    const int clean = m.clean_predictions()[v];
    VictimResult r;
    r.final_pred = clean;
    std::optional<int> target;
    if (s.target.mode == TargetSpec::Mode::fixed) target = s.target.target;
    if (s.target.mode == TargetSpec::Mode::random) target = draw_target(clean, g.num_classes(), seed, v);

    auto base_log = [&](json j) {
        j["seed"] = seed;
        j["label"] = g.label(v);
        j["target"] = target ? json(*target) : json(nullptr);
        return j;
    };

    if (s.kind == AttackKind::none || (target && *target == clean)) {
        r.success = target.has_value();
        r.log = base_log({{"victim", v}, {"variant", to_string(s.kind)}, {"pred_before", clean},
                          {"pred_after", clean}, {"success", r.success}});
        r.log["final_pred"] = clean;
        return r;
    }
    const AttackGoal goal = target ? AttackGoal::targeted(clean, *target) : AttackGoal::non_targeted(clean);
    Rng rng(stream_seed(seed, v));
    AttackOutcome o;
    try {
        switch (s.kind) {
            case AttackKind::single_node: {
                const auto attackers = pick_attackers(m, v, s, goal, rng);
                if (s.distance && *s.distance > m.layers()) {
                    // Outside the receptive field the victim cannot be influenced.
                    r.log = base_log({{"victim", v}, {"variant", to_string(s.kind)}, {"attackers", attackers},
                                      {"pred_before", clean}, {"pred_after", clean}, {"success", false},
                                      {"out_of_reach", true}});
                    r.log["final_pred"] = clean;
                    return r;
                }
                o = single_node_attack(m, v, attackers, goal, s.budget, s.attacker == AttackerChoice::direct);
                break;
            }
            case AttackKind::zero_features: {
                const auto attackers = pick_attackers(m, v, s, goal, rng);
                o = zero_features_attack(m, v, attackers.front());
                break;
            }
            case AttackKind::injection: o = injection_attack(m, v, goal, s.budget); break;
            case AttackKind::single_edge:
            case AttackKind::multi_edge: {
                const EdgeMode mode = s.global_edges || s.attacker == AttackerChoice::gradchoice
                                          ? EdgeMode::gradchoice_global
                                          : EdgeMode::random_node;
                o = s.kind == AttackKind::single_edge ? single_edge_attack(m, v, mode, goal, rng)
                                                      : multi_edge_attack(m, v, s.edge_budget, mode, goal, rng);
                break;
            }
            case AttackKind::none: break;
        }
    } catch (const NoAttackerError& e) {
        if (s.distance)
            r.skipped = true;
        else
            r.unattackable = true;
        r.log = base_log({{"victim", v}, {"variant", to_string(s.kind)}, {"pred_before", clean},
                          {"pred_after", clean}, {"success", false}});
        r.log[r.skipped ? "skipped" : "unattackable"] = e.what();
        r.log["final_pred"] = clean;
        return r;
    }

    r.final_pred = o.pred_after;
    r.success = o.success;
    if (s.kind == AttackKind::single_node || s.kind == AttackKind::injection) {
        r.checked = true;
        r.violation = budget_violation(o.perturbation, g.feature_kind(), s.budget);
    } else if (s.kind == AttackKind::single_edge || s.kind == AttackKind::multi_edge) {
        r.checked = true;
        const std::size_t limit = s.kind == AttackKind::single_edge ? 1 : s.edge_budget;
        if (o.perturbation.flipped_edges.size() > limit)
            r.violation = "edge budget: " + std::to_string(o.perturbation.flipped_edges.size()) + " flips";
    }
    r.log = base_log(attacks::to_json(o));
    r.log["final_pred"] = o.pred_after;
    if (r.violation) r.log["budget_violation"] = *r.violation;
    return r;
}

std::vector<VictimResult> attack_all(const FrozenModel& m, const AttackSpec& s, std::uint64_t seed,
                                     std::size_t threads) {
    const auto& victims = m.graph().test_mask();
    std::vector<VictimResult> results(victims.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < victims.size(); i = next++) {
            try {
                results[i] = attack_victim(m, victims[i], s, seed);
            } catch (const std::exception& e) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    try {
                        throw Error("seed " + std::to_string(seed) + ", victim " + std::to_string(victims[i]) + ": " +
                                    e.what());
                    } catch (...) {
                        failure = std::current_exception();
                    }
                }
                next = victims.size();
            }
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(threads, victims.size()));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

}  // namespace

ExperimentReport run_cells(const Graph& g, const ExperimentConfig& config, const std::vector<SeedModel>& seed_models,
                           const std::vector<Cell>& cells) {
    const auto start = std::chrono::steady_clock::now();
    config.validate();
    for (const Cell& c : cells) {
        c.attack.validate(g.feature_kind());
        if (c.attack.target.mode == TargetSpec::Mode::fixed &&
            static_cast<std::size_t>(c.attack.target.target) >= g.num_classes())
            throw ConfigError("target class " + std::to_string(c.attack.target.target) + " is out of range");
        if (c.attack.target.mode == TargetSpec::Mode::random && g.num_classes() < 2)
            throw ConfigError("targeted attacks need at least two classes");
    }
    if (g.test_mask().empty()) throw TrainingError("test mask is empty");
    const std::size_t threads =
        config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());

    std::optional<std::ofstream> log;
    if (config.log_path) {
        if (config.log_path->has_parent_path()) std::filesystem::create_directories(config.log_path->parent_path());
        log.emplace(*config.log_path);
        if (!*log) throw Error("cannot write log " + config.log_path->string());
    }

    ExperimentReport report;
    report.config = to_json(config);
    std::vector<double> clean;
    for (const SeedModel& sm : seed_models) {
        clean.push_back(models::accuracy(models::predict(sm.model.params, g), g, g.test_mask()));
        report.best_val_accuracy.push_back(sm.model.best_val_accuracy);
    }
    report.clean_accuracy = summarize(std::move(clean));

    std::vector<std::vector<double>> acc(cells.size()), success(cells.size());
    report.cells.resize(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) report.cells[k].params = cells[k].params;

    for (const SeedModel& sm : seed_models) {
        const FrozenModel frozen(sm.model.params, g);
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const AttackSpec& spec = cells[k].attack;
            const auto results = attack_all(frozen, spec, sm.seed, threads);
            CellReport& cell = report.cells[k];
            std::size_t correct = 0, counted = 0, succeeded = 0, skipped = 0;
            for (const VictimResult& r : results) skipped += r.skipped ? 1 : 0;
            // Skipping every victim would leave nothing to measure: keep them unchanged instead.
            const bool drop_skipped = skipped < results.size();
            for (std::size_t i = 0; i < results.size(); ++i) {
                const VictimResult& r = results[i];
                if (r.skipped && drop_skipped) continue;
                ++counted;
                const NodeId v = g.test_mask()[i];
                correct += r.final_pred == g.label(v) ? 1 : 0;
                succeeded += r.success ? 1 : 0;
                cell.unattackable += r.unattackable ? 1 : 0;
                cell.victims += (r.unattackable || r.skipped) ? 0 : 1;
                cell.budget_checked += r.checked ? 1 : 0;
                cell.budget_violations += r.violation ? 1 : 0;
            }
            if (drop_skipped) cell.skipped += skipped;
            acc[k].push_back(static_cast<double>(correct) / static_cast<double>(counted));
            if (spec.targeted()) success[k].push_back(static_cast<double>(succeeded) / static_cast<double>(counted));
            if (log) {
                for (std::size_t i = 0; i < results.size(); ++i) {
                    json line = results[i].log;
                    line["cell"] = k;
                    line["counted"] = !(results[i].skipped && drop_skipped);
                    *log << line.dump() << '\n';
                }
            }
        }
    }
    for (std::size_t k = 0; k < cells.size(); ++k) {
        report.cells[k].accuracy = summarize(std::move(acc[k]));
        if (cells[k].attack.targeted()) report.cells[k].success_rate = summarize(std::move(success[k]));
    }
    if (log && !*log) throw Error("failed writing log " + config.log_path->string());
    report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

namespace {

ExperimentReport timed(const std::chrono::steady_clock::time_point start, ExperimentReport r) {
    r.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace

ExperimentReport run_experiment(const Graph& g, const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    config.attack.validate(g.feature_kind());
    const auto seed_models = prepare_models(g, config);
    return timed(start, run_cells(g, config, seed_models, {Cell{json::object(), config.attack}}));
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    return run_experiment(graph::load_bundle(config.dataset), config);
}

ExperimentReport sweep_eps(const Graph& g, const ExperimentConfig& config, const std::vector<double>& eps0_grid,
                           const std::vector<double>& eps_inf_grid) {
    const auto start = std::chrono::steady_clock::now();
    if (eps0_grid.empty()) throw ConfigError("the eps0 grid is empty");
    std::vector<Cell> cells;
    for (double e0 : eps0_grid) {
        if (eps_inf_grid.empty()) {
            Cell c{{{"eps0", e0}}, config.attack};
            c.attack.budget.eps0 = e0;
            cells.push_back(std::move(c));
            continue;
        }
        for (double ei : eps_inf_grid) {
            Cell c{{{"eps0", e0}, {"eps_inf", ei}}, config.attack};
            c.attack.budget.eps0 = e0;
            c.attack.budget.eps_inf = ei;
            cells.push_back(std::move(c));
        }
    }
    for (const Cell& c : cells) c.attack.validate(g.feature_kind());
    const auto seed_models = prepare_models(g, config);
    return timed(start, run_cells(g, config, seed_models, cells));
}

ExperimentReport sweep_eps(const ExperimentConfig& config, const std::vector<double>& eps0_grid,
                           const std::vector<double>& eps_inf_grid) {
    return sweep_eps(graph::load_bundle(config.dataset), config, eps0_grid, eps_inf_grid);
}

ExperimentReport distance_study(const Graph& g, ExperimentConfig config, std::size_t layers) {
    const auto start = std::chrono::steady_clock::now();
    if (layers == 0) throw ConfigError("the distance study needs at least one layer");
    config.train.layers = layers;
    if (config.adversarial) config.adversarial->base.layers = layers;
    config.attack.kind = AttackKind::single_node;
    config.attack.attacker = AttackerChoice::random;
    config.attack.num_attackers = 1;
    std::vector<Cell> cells;
    for (std::size_t d = 1; d <= layers; ++d) {
        Cell c{{{"distance", d}}, config.attack};
        c.attack.distance = d;
        cells.push_back(std::move(c));
    }
    for (const Cell& c : cells) c.attack.validate(g.feature_kind());
    const auto seed_models = prepare_models(g, config);
    return timed(start, run_cells(g, config, seed_models, cells));
}

ExperimentReport distance_study(ExperimentConfig config, std::size_t layers) {
    const Graph g = graph::load_bundle(config.dataset);
    return distance_study(g, std::move(config), layers);
}

ExperimentReport attacker_count_study(const Graph& g, const ExperimentConfig& config,
                                      const std::vector<std::size_t>& counts) {
    const auto start = std::chrono::steady_clock::now();
    if (counts.empty()) throw ConfigError("the attacker-count grid is empty");
    std::vector<Cell> cells;
    for (std::size_t n : counts) {
        Cell c{{{"num_attackers", n}}, config.attack};
        c.attack.kind = AttackKind::single_node;
        if (c.attack.attacker != AttackerChoice::hops) c.attack.attacker = AttackerChoice::random;
        c.attack.num_attackers = n;
        cells.push_back(std::move(c));
    }
    for (const Cell& c : cells) c.attack.validate(g.feature_kind());
    const auto seed_models = prepare_models(g, config);
    return timed(start, run_cells(g, config, seed_models, cells));
}

ExperimentReport attacker_count_study(const ExperimentConfig& config, const std::vector<std::size_t>& counts) {
    return attacker_count_study(graph::load_bundle(config.dataset), config, counts);
}

}  // namespace gnnevade::harness
