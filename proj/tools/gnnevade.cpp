// Command-line front end: train, attack, sweep, distance, advtrain, validate-bundle.

#include <algorithm>
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "gnnevade/common/errors.hpp"
#include "gnnevade/graph/bundle.hpp"
#include "gnnevade/harness/experiment.hpp"

namespace {

using namespace gnnevade;
using harness::ExperimentConfig;
using harness::ExperimentReport;

enum Exit { ok = 0, config_error = 1, data_error = 2, runtime_error = 3 };

struct SharedOptions {
    std::string dataset;
    std::string model = "gcn";
    std::string seeds = "0,1,2,3,4";
    std::string out;
    std::size_t hidden = 0;
    std::size_t layers = 2;
    std::size_t epochs = 200;
    std::optional<std::size_t> patience;
    double lr = 0.01;
    double weight_decay = 5e-4;
    double dropout = 0.5;
    std::string model_dir;
    std::size_t threads = 0;
};

struct AttackOptions {
    std::string attack = "single-node";
    std::string attacker = "random";
    std::size_t num_attackers = 1;
    std::optional<double> eps0;
    std::optional<double> eps_inf;
    std::size_t iters = 20;
    std::optional<double> gamma;
    std::string targeted;
    std::size_t edge_budget = 1;
    bool global_edges = false;
    bool clamp_nonneg = false;
    std::string preset;
    std::string log;
};

void add_shared(CLI::App* app, SharedOptions& o, bool needs_out = true) {
    app->add_option("--dataset", o.dataset, "graph bundle (.bundle.json)")->required();
    app->add_option("--model", o.model, "gcn | sgc | gin | sage")->capture_default_str();
    app->add_option("--seeds", o.seeds, "comma-separated run seeds")->capture_default_str();
    auto* out = app->add_option("--out", o.out, "output path");
    if (needs_out) out->required();
    app->add_option("--hidden", o.hidden, "hidden width (0 = architecture default)")->capture_default_str();
    app->add_option("--layers", o.layers, "number of layers")->capture_default_str();
    app->add_option("--epochs", o.epochs, "maximum training epochs")->capture_default_str();
    app->add_option("--patience", o.patience, "early-stopping patience (default min(20, epochs))");
    app->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
    app->add_option("--weight-decay", o.weight_decay, "L2 weight decay")->capture_default_str();
    app->add_option("--dropout", o.dropout, "dropout rate")->capture_default_str();
    app->add_option("--threads", o.threads, "attack worker threads (0 = all cores)")->capture_default_str();
}

void add_attack(CLI::App* app, AttackOptions& o) {
    app->add_option("--attack", o.attack, "single-node | single-edge | multi-edge | zero-features | injection | none")
        ->capture_default_str();
    app->add_option("--attacker", o.attacker, "random | gradchoice | topology | direct | hops")->capture_default_str();
    app->add_option("--num-attackers", o.num_attackers, "random attackers per victim")->capture_default_str();
    app->add_option("--eps0", o.eps0, "fraction of feature coordinates an attacker may change");
    app->add_option("--epsinf", o.eps_inf, "largest change of one coordinate (continuous features)");
    app->add_option("--iters", o.iters, "attack iterations")->capture_default_str();
    app->add_option("--gamma", o.gamma, "step size (default 2.5 * epsinf / iters)");
    app->add_option("--targeted", o.targeted, "target class index or 'random'");
    app->add_option("--edge-budget", o.edge_budget, "edge flips for multi-edge")->capture_default_str();
    app->add_flag("--global-edges", o.global_edges, "edge candidates over all nodes, chosen by gradient");
    app->add_flag("--clamp-nonneg", o.clamp_nonneg, "keep perturbed continuous features non-negative");
    app->add_option("--preset", o.preset, "budget preset for continuous features: table (epsinf 0.04) | text (0.1)");
    app->add_option("--log", o.log, "per-victim outcome log (JSON lines)");
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const char* what) {
    std::vector<T> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::istringstream is(item);
        T v{};
        if (!(is >> v) || !(is >> std::ws).eof()) throw ConfigError(std::string("bad ") + what + " entry '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(std::string(what) + " list is empty");
    return out;
}

ExperimentConfig base_config(const SharedOptions& o) {
    ExperimentConfig c;
    c.dataset = o.dataset;
    c.arch = models::architecture_from_string(o.model);
    c.seeds = parse_list<std::uint64_t>(o.seeds, "seed");
    c.train.hidden = o.hidden;
    c.train.layers = o.layers;
    c.train.max_epochs = o.epochs;
    c.train.patience = o.patience.value_or(std::min<std::size_t>(20, o.epochs));
    c.train.learning_rate = o.lr;
    c.train.weight_decay = o.weight_decay;
    c.train.dropout = o.dropout;
    c.threads = o.threads;
    if (!o.model_dir.empty()) c.model_dir = o.model_dir;
    return c;
}

harness::AttackSpec attack_spec(const AttackOptions& o, graph::FeatureKind kind) {
    harness::AttackSpec s;
    s.kind = harness::attack_kind_from_string(o.attack);
    s.attacker = harness::attacker_choice_from_string(o.attacker);
    s.num_attackers = o.num_attackers;
    if (!o.preset.empty())
        s.budget = harness::preset_budget(kind, harness::continuous_preset_from_string(o.preset));
    else
        s.budget = harness::preset_budget(kind, harness::ContinuousPreset::table);
    if (kind == graph::FeatureKind::continuous && !o.eps_inf && o.preset.empty() &&
        (s.kind == harness::AttackKind::single_node || s.kind == harness::AttackKind::injection))
        throw ConfigError("continuous features need --epsinf or --preset table|text");
    if (kind == graph::FeatureKind::binary) s.budget.eps_inf.reset();
    if (o.eps0) s.budget.eps0 = *o.eps0;
    if (o.eps_inf) s.budget.eps_inf = *o.eps_inf;
    s.budget.iterations = o.iters;
    s.budget.gamma = o.gamma;
    s.budget.clamp_nonneg = o.clamp_nonneg;
    if (!o.targeted.empty()) s.target = harness::TargetSpec::parse(o.targeted);
    s.edge_budget = o.edge_budget;
    s.global_edges = o.global_edges;
    return s;
}

void print_summary(const ExperimentReport& r) {
    std::cout.setf(std::ios::fixed);
    std::cout.precision(2);
    std::cout << "clean accuracy " << 100 * r.clean_accuracy.mean << " +- " << 100 * r.clean_accuracy.std << '\n';
    for (const auto& c : r.cells) {
        std::cout << (c.params.empty() ? std::string("attack") : c.params.dump()) << ": accuracy "
                  << 100 * c.accuracy.mean << " +- " << 100 * c.accuracy.std;
        if (c.success_rate)
            std::cout << ", success " << 100 * c.success_rate->mean << " +- " << 100 * c.success_rate->std;
        std::cout << ", budget violations " << c.budget_violations << '\n';
    }
}

int finish(const ExperimentReport& r, const std::string& out) {
    harness::write_report(r, out);
    print_summary(r);
    std::cout << "report written to " << out << '\n';
    return r.total_violations() == 0 ? ok : runtime_error;
}

int run(int argc, char** argv) {
    CLI::App app{"Single-node and single-edge evasion attacks on graph neural networks"};
    app.require_subcommand(1);

    SharedOptions train_o, attack_o, sweep_o, dist_o, adv_o;
    AttackOptions attack_a, sweep_a, dist_a, adv_a;

    auto* train = app.add_subcommand("train", "train one model per seed and save checkpoints");
    add_shared(train, train_o);
    train->get_option("--out")->description("checkpoint directory");

    auto* attack = app.add_subcommand("attack", "attack every test node and report accuracy");
    add_shared(attack, attack_o);
    add_attack(attack, attack_a);
    attack->add_option("--model-dir", attack_o.model_dir, "checkpoint directory (read, or written after training)");

    std::string eps0_grid = "0,0.01,0.02,0.05,0.1", epsinf_grid, counts;
    auto* sweep = app.add_subcommand("sweep", "grid over eps0 (and eps_inf) or over attacker counts");
    add_shared(sweep, sweep_o);
    add_attack(sweep, sweep_a);
    sweep->add_option("--model-dir", sweep_o.model_dir, "checkpoint directory");
    sweep->add_option("--eps0-grid", eps0_grid, "comma-separated eps0 values")->capture_default_str();
    sweep->add_option("--epsinf-grid", epsinf_grid, "comma-separated eps_inf values");
    sweep->add_option("--attacker-counts", counts, "comma-separated attacker counts (replaces the eps grid)");

    std::size_t distance_layers = 8;
    auto* distance = app.add_subcommand("distance", "accuracy by attacker-victim distance");
    add_shared(distance, dist_o);
    add_attack(distance, dist_a);
    distance->add_option("--model-dir", dist_o.model_dir, "checkpoint directory");
    distance->add_option("--depth", distance_layers, "layers of the retrained model")->capture_default_str();

    std::string adv_attacker = "random";
    std::size_t adv_iters = 5;
    std::optional<double> adv_eps0, adv_epsinf;
    auto* adv = app.add_subcommand("advtrain", "train adversarially, then attack");
    add_shared(adv, adv_o);
    add_attack(adv, adv_a);
    adv->add_option("--model-dir", adv_o.model_dir, "checkpoint directory");
    adv->add_option("--adv-attacker", adv_attacker, "random | topology")->capture_default_str();
    adv->add_option("--adv-iters", adv_iters, "inner attack iterations")->capture_default_str();
    adv->add_option("--adv-eps0", adv_eps0, "inner attack eps0 (default: the attack's)");
    adv->add_option("--adv-epsinf", adv_epsinf, "inner attack eps_inf (default: the attack's)");

    std::string bundle_path;
    auto* validate = app.add_subcommand("validate-bundle", "check a graph bundle and list every problem");
    validate->add_option("path", bundle_path, "bundle file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    if (validate->parsed()) {
        const auto problems = graph::validate_bundle(bundle_path);
        for (const auto& p : problems) std::cout << p << '\n';
        if (problems.empty()) std::cout << bundle_path << ": valid\n";
        return problems.empty() ? ok : data_error;
    }

    if (train->parsed()) {
        ExperimentConfig c = base_config(train_o);
        c.model_dir = train_o.out;
        const graph::Graph g = graph::load_bundle(c.dataset);
        const auto trained = harness::prepare_models(g, c);
        std::cout.setf(std::ios::fixed);
        std::cout.precision(2);
        for (const auto& sm : trained) {
            const double acc = models::accuracy(models::predict(sm.model.params, g), g, g.test_mask());
            std::cout << "seed " << sm.seed << ": val " << 100 * sm.model.best_val_accuracy << ", test " << 100 * acc
                      << " (best epoch " << sm.model.best_epoch << ")\n";
        }
        std::cout << "checkpoints in " << train_o.out << '\n';
        return ok;
    }

    std::optional<graph::Graph> loaded;
    auto prepare = [&loaded](const SharedOptions& so, const AttackOptions& ao) {
        ExperimentConfig c = base_config(so);
        loaded.emplace(graph::load_bundle(c.dataset));
        c.attack = attack_spec(ao, loaded->feature_kind());
        if (!ao.log.empty()) c.log_path = ao.log;
        return c;
    };

    if (attack->parsed()) {
        const ExperimentConfig c = prepare(attack_o, attack_a);
        const graph::Graph& g = *loaded;
        return finish(harness::run_experiment(g, c), attack_o.out);
    }
    if (sweep->parsed()) {
        const ExperimentConfig c = prepare(sweep_o, sweep_a);
        const graph::Graph& g = *loaded;
        if (!counts.empty())
            return finish(harness::attacker_count_study(g, c, parse_list<std::size_t>(counts, "attacker count")),
                          sweep_o.out);
        const auto inf = epsinf_grid.empty() ? std::vector<double>{} : parse_list<double>(epsinf_grid, "eps_inf");
        return finish(harness::sweep_eps(g, c, parse_list<double>(eps0_grid, "eps0"), inf), sweep_o.out);
    }
    if (distance->parsed()) {
        const ExperimentConfig c = prepare(dist_o, dist_a);
        const graph::Graph& g = *loaded;
        return finish(harness::distance_study(g, c, distance_layers), dist_o.out);
    }
    if (adv->parsed()) {
        ExperimentConfig c = prepare(adv_o, adv_a);
        const graph::Graph& g = *loaded;
        advtrain::AdvTrainConfig a;
        a.base = c.train;
        a.strategy = advtrain::strategy_from_string(adv_attacker);
        a.inner = c.attack.budget;
        a.inner.iterations = adv_iters;
        if (adv_eps0) a.inner.eps0 = *adv_eps0;
        if (adv_epsinf) a.inner.eps_inf = *adv_epsinf;
        a.inner.gamma.reset();
        a.validate(g.feature_kind());
        c.adversarial = a;
        return finish(harness::run_experiment(g, c), adv_o.out);
    }
    return config_error;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const ValidationError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return runtime_error;
    }
}
