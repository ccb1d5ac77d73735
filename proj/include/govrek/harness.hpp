#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "govrek/dilemma.hpp"
#include "govrek/governance.hpp"
#include "govrek/grid_env.hpp"
#include "govrek/learner.hpp"
#include "govrek/scheduler.hpp"

namespace govrek {

enum class EnvKind { Grid, Dilemma };
enum class GovernanceKind { None, Mors, Fixed, Search };

struct ExperimentConfig {
    std::string name = "experiment";
    EnvKind env_kind = EnvKind::Grid;
    GridEnvConfig grid;
    DilemmaConfig dilemma;

    GovernanceKind governance_kind = GovernanceKind::None;
    std::vector<KernelSpec> kernels; // Fixed governance
    ShapingMode shaping_mode = ShapingMode::Additive;
    double shaping_gamma = 0.99;

    LearnerConfig learner;
    std::int64_t budget = 10000;

    SearchOptions search; // Search governance

    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string out_dir = "runs/out";
};

// Parses and validates; errors name the offending field path.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);
std::uint64_t config_hash(const ExperimentConfig& config);

// Builds the (possibly governed) environment for one seed.
std::unique_ptr<MultiAgentEnv> make_env(const ExperimentConfig& config, std::uint64_t seed);

struct AggregateCurve {
    std::vector<std::int64_t> timesteps;
    std::vector<double> reward_mean, reward_ci95, eplen_mean, eplen_ci95;
    int n_seeds = 0;
};

// Mean and normal-approximation 95% CI (1.96 * sd / sqrt(n)) per sample point.
AggregateCurve aggregate_seeds(const std::vector<TrialResult>& per_seed);

// Columns: timestep,reward_mean,reward_ci95,eplen_mean,eplen_ci95
std::string render_plot_data(const AggregateCurve& aggregate);
void emit_plot_data(const AggregateCurve& aggregate, const std::string& path);

struct RunOutput {
    std::filesystem::path dir;
    std::vector<TrialResult> per_seed;
    AggregateCurve aggregate;
};

// Runs every seed (concurrently up to `workers`), writes per-seed curve CSVs,
// the aggregate CSV, and a manifest with the config hash. Reruns are
// byte-identical for identical inputs. workers <= 0 reads GOVREK_WORKERS.
RunOutput run_experiment(const ExperimentConfig& config, int workers = 0);

struct SearchOutput {
    std::filesystem::path dir;
    SearchResult result;
};

// Executes the kernel search configured in the experiment and writes the plan
// dump, per-trial metrics, and the winners manifest.
SearchOutput run_search(const ExperimentConfig& config, int workers = 0);

struct ComparisonRow {
    std::string name;
    double first_success_median = -1.0; // -1 encodes "never"
    double final_reward = 0.0;
    double final_eplen = 0.0;
    double auc = 0.0; // trapezoid area under the reward curve
};

// Reads run directories and ranks them by the chosen metric:
// first-success | final-reward | final-eplen | auc.
std::vector<ComparisonRow> compare_runs(const std::vector<std::string>& run_dirs,
                                        const std::string& metric);

int env_workers_cap(); // GOVREK_WORKERS, default 1

} // namespace govrek
