#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gnnevade/advtrain/advtrain.hpp"
#include "gnnevade/attacks/attacks.hpp"
#include "gnnevade/models/train.hpp"

namespace gnnevade::harness {

using graph::Graph;
using models::Architecture;

enum class AttackKind { none, single_node, single_edge, multi_edge, zero_features, injection };
enum class AttackerChoice { random, gradchoice, topology, direct, hops };

const char* to_string(AttackKind k) noexcept;
const char* to_string(AttackerChoice c) noexcept;
AttackKind attack_kind_from_string(const std::string& s);
AttackerChoice attacker_choice_from_string(const std::string& s);

struct TargetSpec {
    enum class Mode { none, fixed, random };
    Mode mode = Mode::none;
    int target = 0;  ///< fixed mode only

    /// "random" or a class index.
    static TargetSpec parse(const std::string& s);
};

/// One attack configuration: which attack, how attackers are chosen and the
/// budget it must respect.
struct AttackSpec {
    AttackKind kind = AttackKind::single_node;
    AttackerChoice attacker = AttackerChoice::random;
    std::size_t num_attackers = 1;
    attacks::Budget budget;
    TargetSpec target;
    std::size_t edge_budget = 1;  ///< multi-edge only
    bool global_edges = false;    ///< edge attacks: GradChoice over all nodes instead of a random attacker
    /// When set, the attacker is drawn among nodes at exactly this distance;
    /// victims without one are skipped.
    std::optional<std::size_t> distance;

    void validate(graph::FeatureKind kind) const;
    bool targeted() const noexcept { return target.mode != TargetSpec::Mode::none; }
};

nlohmann::json to_json(const AttackSpec& spec);

/// Budget presets for the benchmark datasets. Binary graphs use eps0 = 0.01.
/// Continuous graphs use eps0 = 0.05 with eps_inf 0.04 ("table") or 0.1 ("text").
enum class ContinuousPreset { table, text };
ContinuousPreset continuous_preset_from_string(const std::string& s);
const char* to_string(ContinuousPreset p) noexcept;
attacks::Budget preset_budget(graph::FeatureKind kind, ContinuousPreset preset);

struct ExperimentConfig {
    std::filesystem::path dataset;
    Architecture arch = Architecture::gcn;
    models::TrainConfig train;  ///< seed is replaced by each run seed
    std::optional<advtrain::AdvTrainConfig> adversarial;  ///< train adversarially instead
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    AttackSpec attack;
    /// Checkpoints are read from here when present and written otherwise.
    std::optional<std::filesystem::path> model_dir;
    /// Per-victim outcome log (JSON lines).
    std::optional<std::filesystem::path> log_path;
    std::size_t threads = 0;  ///< 0 = hardware concurrency

    void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);

struct Stat {
    double mean = 0.0;
    double std = 0.0;  ///< population std over seeds
    std::vector<double> per_seed;
};

Stat summarize(std::vector<double> per_seed);

struct CellReport {
    nlohmann::json params;  ///< grid coordinates of the cell
    Stat accuracy;          ///< test accuracy after the attack
    std::optional<Stat> success_rate;  ///< targeted attacks only
    std::size_t victims = 0;           ///< attacked victims summed over seeds
    std::size_t unattackable = 0;      ///< victims without a legal attacker, left unchanged
    std::size_t skipped = 0;           ///< victims dropped from the denominator
    std::size_t budget_checked = 0;
    std::size_t budget_violations = 0;
};

struct ExperimentReport {
    nlohmann::json config;
    Stat clean_accuracy;
    std::vector<double> best_val_accuracy;
    std::vector<CellReport> cells;
    double wall_time_seconds = 0.0;

    /// Canonical form. Everything but "wall_time_seconds" is a pure function
    /// of the configuration.
    nlohmann::json to_json() const;
    /// One row per cell.
    std::string to_csv() const;
    std::size_t total_violations() const;
};

void write_report(const ExperimentReport& report, const std::filesystem::path& json_path);

/// One grid point: its coordinates (echoed in the report) and attack.
struct Cell {
    nlohmann::json params = nlohmann::json::object();
    AttackSpec attack;
};

/// A trained model for one run seed.
struct SeedModel {
    std::uint64_t seed = 0;
    models::TrainedModel model;
};

/// Trains (or loads from config.model_dir) one model per seed.
std::vector<SeedModel> prepare_models(const Graph& g, const ExperimentConfig& config);

/// Attacks every test node of every seed for each cell. Victims of one seed
/// run in parallel; each owns the random stream stream_seed(seed, victim).
ExperimentReport run_cells(const Graph& g, const ExperimentConfig& config, const std::vector<SeedModel>& models,
                           const std::vector<Cell>& cells);

/// Loads the dataset, prepares models and runs config.attack as one cell.
ExperimentReport run_experiment(const ExperimentConfig& config);
ExperimentReport run_experiment(const Graph& g, const ExperimentConfig& config);

/// Cartesian grid over eps0 x eps_inf (an empty eps_inf list keeps the
/// configured value). Models are shared across points.
ExperimentReport sweep_eps(const ExperimentConfig& config, const std::vector<double>& eps0_grid,
                           const std::vector<double>& eps_inf_grid = {});
ExperimentReport sweep_eps(const Graph& g, const ExperimentConfig& config, const std::vector<double>& eps0_grid,
                           const std::vector<double>& eps_inf_grid = {});

/// Retrains with `layers` layers and attacks from every exact distance 1..layers.
ExperimentReport distance_study(ExperimentConfig config, std::size_t layers = 8);
ExperimentReport distance_study(const Graph& g, ExperimentConfig config, std::size_t layers = 8);

/// Single-node attack with 1..max_count random attackers.
ExperimentReport attacker_count_study(const ExperimentConfig& config, const std::vector<std::size_t>& counts);
ExperimentReport attacker_count_study(const Graph& g, const ExperimentConfig& config,
                                      const std::vector<std::size_t>& counts);

}  // namespace gnnevade::harness
