#include "govrek/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>

#include "govrek/csv.hpp"
#include "govrek/serialize.hpp"

namespace govrek {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kCodeVersion = "govrek 0.1.0";
constexpr int kManifestSchema = 1;

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

template <typename T>
T get_field(const json& j, const std::string& path, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        config_fail(path + "." + key, e.what());
    }
}

template <typename T>
T require_field(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) config_fail(path + "." + key, "missing required field");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        config_fail(path + "." + key, e.what());
    }
}

Randomization randomization_from_name(const std::string& name, const std::string& path) {
    if (name == "fixed") return Randomization::Fixed;
    if (name == "random_init") return Randomization::RandomInit;
    if (name == "random_per_episode") return Randomization::RandomPerEpisode;
    config_fail(path, "unknown randomization '" + name + "'");
}

std::string randomization_name(Randomization r) {
    switch (r) {
        case Randomization::Fixed: return "fixed";
        case Randomization::RandomInit: return "random_init";
        case Randomization::RandomPerEpisode: return "random_per_episode";
    }
    return "fixed";
}

GridEnvConfig parse_grid_section(const json& j, const std::string& path) {
    GridEnvConfig grid;
    grid.dims = require_field<std::vector<std::int64_t>>(j, path, "dims");
    grid.n_blockers = get_field<int>(j, path, "n_blockers", 0);
    grid.randomization =
        randomization_from_name(get_field<std::string>(j, path, "randomization", "fixed"), path);
    grid.agent2_delay = get_field<std::int64_t>(j, path, "agent2_delay", 0);
    grid.fuel = get_field<std::vector<std::int64_t>>(j, path, "fuel", {});
    grid.max_episode_len = get_field<std::int64_t>(j, path, "max_episode_len", 0);
    grid.goal_reward = get_field<double>(j, path, "goal_reward", 2.5);
    grid.agent_starts = get_field<std::vector<std::vector<std::int64_t>>>(j, path, "agent_starts", {});
    grid.package_start = get_field<std::vector<std::int64_t>>(j, path, "package", {});
    grid.goal = get_field<std::vector<std::int64_t>>(j, path, "goal", {});
    try {
        return grid.resolved();
    } catch (const Error& e) {
        config_fail(path, e.what());
    }
}

DilemmaConfig parse_dilemma_section(const json& j, const std::string& path) {
    DilemmaConfig d;
    d.n_agents = get_field<int>(j, path, "n_agents", 16);
    d.episode_len = get_field<std::int64_t>(j, path, "episode_len", 16);
    const std::string profile = get_field<std::string>(j, path, "profile", "homogeneous");
    if (profile == "homogeneous")
        d.profile = PayoffProfile::Homogeneous;
    else if (profile == "heterogeneous")
        d.profile = PayoffProfile::Heterogeneous;
    else
        config_fail(path + ".profile", "unknown profile '" + profile + "'");
    const std::string sparsity = get_field<std::string>(j, path, "sparsity", "sparse");
    if (sparsity == "baseline")
        d.sparsity = PayoffSparsity::Baseline;
    else if (sparsity == "sparse")
        d.sparsity = PayoffSparsity::Sparse;
    else
        config_fail(path + ".sparsity", "unknown sparsity '" + sparsity + "'");
    d.temptation = get_field<double>(j, path, "temptation", 0.5);
    d.max_rewards = get_field<std::vector<double>>(j, path, "max_rewards", {});
    const std::string mode = get_field<std::string>(j, path, "index_mode", "lexicographic");
    if (mode == "lexicographic")
        d.index_mode = JointIndexMode::Lexicographic;
    else if (mode == "cooperator_count")
        d.index_mode = JointIndexMode::CooperatorCount;
    else
        config_fail(path + ".index_mode", "unknown index mode '" + mode + "'");
    try {
        return d.resolved();
    } catch (const Error& e) {
        config_fail(path, e.what());
    }
}

LearnerConfig parse_learner_section(const json& j, const std::string& path) {
    LearnerConfig cfg;
    const std::string algo = get_field<std::string>(j, path, "algorithm", "tabular_q");
    if (algo == "tabular_q")
        cfg.algorithm = Algorithm::TabularQ;
    else if (algo == "policy_gradient")
        cfg.algorithm = Algorithm::PolicyGradient;
    else
        config_fail(path + ".algorithm", "unknown algorithm '" + algo + "'");
    const std::string paradigm = get_field<std::string>(j, path, "paradigm", "ctce");
    if (paradigm == "ctce")
        cfg.paradigm = Paradigm::CTCE;
    else if (paradigm == "ctde")
        cfg.paradigm = Paradigm::CTDE;
    else
        config_fail(path + ".paradigm", "unknown paradigm '" + paradigm + "'");
    cfg.gamma = get_field<double>(j, path, "gamma", cfg.gamma);
    cfg.learning_rate = get_field<double>(
        j, path, "learning_rate", cfg.algorithm == Algorithm::PolicyGradient ? 3e-3 : cfg.learning_rate);
    cfg.exploration.eps_start = get_field<double>(j, path, "epsilon_start", 1.0);
    cfg.exploration.eps_end = get_field<double>(j, path, "epsilon_end", 0.05);
    cfg.exploration.decay_steps = get_field<std::int64_t>(j, path, "epsilon_decay_steps", 0);
    cfg.clip_ratio = get_field<double>(j, path, "clip_ratio", 0.2);
    cfg.rollout_horizon = get_field<std::int64_t>(j, path, "rollout_horizon", 256);
    cfg.hidden_width = get_field<int>(j, path, "hidden_width", 32);
    cfg.pg_epochs = get_field<int>(j, path, "pg_epochs", 4);
    cfg.eval_every = get_field<std::int64_t>(j, path, "eval_every", 0);
    cfg.eval_episodes = get_field<int>(j, path, "eval_episodes", 20);
    try {
        cfg.validate();
    } catch (const Error& e) {
        config_fail(path, e.what());
    }
    return cfg;
}

} // namespace

ExperimentConfig parse_experiment_config(const json& j) {
    ExperimentConfig config;
    config.name = get_field<std::string>(j, "", "name", "experiment");

    if (!j.contains("env")) config_fail("env", "missing required section");
    const json& env = j.at("env");
    const std::string kind = require_field<std::string>(env, "env", "kind");
    if (kind == "grid") {
        config.env_kind = EnvKind::Grid;
        config.grid = parse_grid_section(env, "env");
    } else if (kind == "dilemma") {
        config.env_kind = EnvKind::Dilemma;
        config.dilemma = parse_dilemma_section(env, "env");
    } else {
        config_fail("env.kind", "unknown env kind '" + kind + "'");
    }

    const bool has_search = j.contains("search");
    if (j.contains("governance")) {
        const json& gov = j.at("governance");
        if (gov.is_string()) {
            const std::string name = gov.get<std::string>();
            if (name == "none")
                config.governance_kind = GovernanceKind::None;
            else if (name == "mors")
                config.governance_kind = GovernanceKind::Mors;
            else
                config_fail("governance", "expected 'none', 'mors', or a section");
        } else {
            config.governance_kind = GovernanceKind::Fixed;
            const std::string mode = get_field<std::string>(gov, "governance", "mode", "additive");
            if (mode == "additive")
                config.shaping_mode = ShapingMode::Additive;
            else if (mode == "potential")
                config.shaping_mode = ShapingMode::Potential;
            else
                config_fail("governance.mode", "unknown mode '" + mode + "'");
            config.shaping_gamma = get_field<double>(gov, "governance", "gamma", 0.99);
            if (!gov.contains("kernels") || !gov.at("kernels").is_array() || gov.at("kernels").empty())
                config_fail("governance.kernels", "at least one kernel spec required");
            std::size_t idx = 0;
            for (const json& k : gov.at("kernels")) {
                const std::string path = "governance.kernels[" + std::to_string(idx) + "]";
                try {
                    if (k.is_string()) {
                        std::ifstream in(k.get<std::string>());
                        if (!in) config_fail(path, "cannot open spec file " + k.get<std::string>());
                        json spec_json;
                        in >> spec_json;
                        config.kernels.push_back(kernel_spec_from_json(spec_json));
                    } else {
                        config.kernels.push_back(kernel_spec_from_json(k));
                    }
                } catch (const ConfigError&) {
                    throw;
                } catch (const Error& e) {
                    config_fail(path, e.what());
                }
                ++idx;
            }
        }
    }

    if (has_search) {
        if (config.governance_kind != GovernanceKind::None)
            config_fail("search", "search cannot be combined with fixed/mors governance");
        config.governance_kind = GovernanceKind::Search;
        const json& s = j.at("search");
        config.search.total_budget = get_field<std::int64_t>(s, "search", "total_budget", 81);
        config.search.rounds = get_field<int>(s, "search", "rounds", 1);
        config.search.eta = get_field<int>(s, "search", "eta", 3);
        config.search.top_k = get_field<std::size_t>(s, "search", "top_k", 4);
        config.search.mutation_prob = get_field<double>(s, "search", "mutation_prob", 0.5);
        config.search.superimpose_prob = get_field<double>(s, "search", "superimpose_prob", 0.5);
        config.search.seed = get_field<std::uint64_t>(s, "search", "seed", 0);
        config.search.objective.scalarized = get_field<bool>(s, "search", "scalarized", false);
        config.search.objective.lambda = get_field<double>(s, "search", "lambda", 0.1);
        config.search.steps_per_unit = get_field<std::int64_t>(s, "search", "steps_per_unit", 1);
        if (config.search.steps_per_unit < 1)
            config_fail("search.steps_per_unit", "must be >= 1");
        config.search.fresh_retrain = get_field<bool>(s, "search", "fresh_retrain", false);
    }

    if (j.contains("learner")) config.learner = parse_learner_section(j.at("learner"), "learner");
    config.budget = get_field<std::int64_t>(j.contains("learner") ? j.at("learner") : json::object(),
                                            "learner", "budget", 10000);
    if (config.budget < 1) config_fail("learner.budget", "budget must be >= 1");

    config.seeds = get_field<std::vector<std::uint64_t>>(j, "", "seeds", {1, 2, 3, 4, 5});
    if (config.seeds.empty()) config_fail("seeds", "at least one seed required");
    std::vector<std::uint64_t> sorted = config.seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        config_fail("seeds", "seeds must be distinct");

    config.out_dir = get_field<std::string>(j, "", "out_dir", "runs/" + config.name);

    // A fixed-governance section must be compatible with the env's domain.
    if (config.governance_kind == GovernanceKind::Fixed) {
        const DomainDescriptor domain = config.env_kind == EnvKind::Grid
                                            ? DomainDescriptor::grid(config.grid.dims)
                                            : DomainDescriptor::joint_action(
                                                  config.dilemma.joint_space_size());
        std::size_t idx = 0;
        for (const KernelSpec& spec : config.kernels) {
            if (!spec.admits_dims(domain.ndim()))
                config_fail("governance.kernels[" + std::to_string(idx) + "]",
                            family_name(spec.family) + " kernel is not admissible on " +
                                domain.to_string());
            const int n_agents =
                config.env_kind == EnvKind::Grid ? config.grid.n_agents : config.dilemma.n_agents;
            if (spec.scope.agent_specific && spec.scope.agent_id >= n_agents)
                config_fail("governance.kernels[" + std::to_string(idx) + "]",
                            "agent id out of range");
            ++idx;
        }
    }
    if (config.governance_kind == GovernanceKind::Mors && config.env_kind != EnvKind::Grid)
        config_fail("governance", "mors applies to the package delivery env only");

    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_experiment_config(j);
}

json experiment_config_to_json(const ExperimentConfig& config) {
    json j;
    j["name"] = config.name;
    if (config.env_kind == EnvKind::Grid) {
        json env;
        env["kind"] = "grid";
        env["dims"] = config.grid.dims;
        env["n_blockers"] = config.grid.n_blockers;
        env["randomization"] = randomization_name(config.grid.randomization);
        env["agent2_delay"] = config.grid.agent2_delay;
        env["fuel"] = config.grid.fuel;
        env["max_episode_len"] = config.grid.max_episode_len;
        env["goal_reward"] = config.grid.goal_reward;
        env["agent_starts"] = config.grid.agent_starts;
        env["package"] = config.grid.package_start;
        env["goal"] = config.grid.goal;
        j["env"] = env;
    } else {
        json env;
        env["kind"] = "dilemma";
        env["n_agents"] = config.dilemma.n_agents;
        env["episode_len"] = config.dilemma.episode_len;
        env["profile"] = config.dilemma.profile == PayoffProfile::Homogeneous ? "homogeneous"
                                                                              : "heterogeneous";
        env["sparsity"] =
            config.dilemma.sparsity == PayoffSparsity::Baseline ? "baseline" : "sparse";
        env["temptation"] = config.dilemma.temptation;
        env["max_rewards"] = config.dilemma.max_rewards;
        env["index_mode"] = config.dilemma.index_mode == JointIndexMode::Lexicographic
                                ? "lexicographic"
                                : "cooperator_count";
        j["env"] = env;
    }

    switch (config.governance_kind) {
        case GovernanceKind::None: j["governance"] = "none"; break;
        case GovernanceKind::Mors: j["governance"] = "mors"; break;
        case GovernanceKind::Fixed: {
            json gov;
            gov["mode"] = config.shaping_mode == ShapingMode::Additive ? "additive" : "potential";
            gov["gamma"] = config.shaping_gamma;
            json kernels = json::array();
            for (const KernelSpec& spec : config.kernels) kernels.push_back(kernel_spec_to_json(spec));
            gov["kernels"] = kernels;
            j["governance"] = gov;
            break;
        }
        case GovernanceKind::Search: {
            j["governance"] = "none";
            json s;
            s["total_budget"] = config.search.total_budget;
            s["rounds"] = config.search.rounds;
            s["eta"] = config.search.eta;
            s["top_k"] = config.search.top_k;
            s["mutation_prob"] = config.search.mutation_prob;
            s["superimpose_prob"] = config.search.superimpose_prob;
            s["seed"] = config.search.seed;
            s["scalarized"] = config.search.objective.scalarized;
            s["lambda"] = config.search.objective.lambda;
            s["steps_per_unit"] = config.search.steps_per_unit;
            s["fresh_retrain"] = config.search.fresh_retrain;
            j["search"] = s;
            break;
        }
    }

    json learner;
    learner["algorithm"] = config.learner.algorithm == Algorithm::TabularQ ? "tabular_q" : "policy_gradient";
    learner["paradigm"] = config.learner.paradigm == Paradigm::CTCE ? "ctce" : "ctde";
    learner["gamma"] = config.learner.gamma;
    learner["learning_rate"] = config.learner.learning_rate;
    learner["epsilon_start"] = config.learner.exploration.eps_start;
    learner["epsilon_end"] = config.learner.exploration.eps_end;
    learner["epsilon_decay_steps"] = config.learner.exploration.decay_steps;
    learner["clip_ratio"] = config.learner.clip_ratio;
    learner["rollout_horizon"] = config.learner.rollout_horizon;
    learner["hidden_width"] = config.learner.hidden_width;
    learner["pg_epochs"] = config.learner.pg_epochs;
    learner["eval_every"] = config.learner.eval_every;
    learner["eval_episodes"] = config.learner.eval_episodes;
    learner["budget"] = config.budget;
    j["learner"] = learner;

    j["seeds"] = config.seeds;
    j["out_dir"] = config.out_dir;
    return j;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    const std::string dump = experiment_config_to_json(config).dump();
    std::uint64_t h = 1469598103934665603ULL; // FNV-1a
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::unique_ptr<MultiAgentEnv> make_env(const ExperimentConfig& config, std::uint64_t seed) {
    std::unique_ptr<MultiAgentEnv> env;
    if (config.env_kind == EnvKind::Grid)
        env = std::make_unique<GridEnv>(config.grid, derive_seed(seed, {0x656e76ULL}));
    else
        env = std::make_unique<DilemmaEnv>(config.dilemma, derive_seed(seed, {0x656e76ULL}));

    switch (config.governance_kind) {
        case GovernanceKind::None:
        case GovernanceKind::Search:
            return env;
        case GovernanceKind::Mors:
            return std::make_unique<MorsEnv>(std::move(env));
        case GovernanceKind::Fixed: {
            GovernanceConfig gov;
            try {
                gov = build_governance(config.kernels, *env, config.shaping_mode, config.shaping_gamma,
                                       derive_seed(seed, {0x6e6fULL}));
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                throw ConfigError(std::string("governance: ") + e.what());
            }
            return std::make_unique<GovernedEnv>(std::move(env), std::move(gov));
        }
    }
    throw ConfigError("unhandled governance kind");
}

AggregateCurve aggregate_seeds(const std::vector<TrialResult>& per_seed) {
    if (per_seed.size() < 2) throw AlignmentError("aggregation needs at least 2 seeds");
    const std::size_t samples = per_seed.front().curve.size();
    for (const TrialResult& r : per_seed) {
        if (r.curve.size() != samples) throw AlignmentError("curves have different sample counts");
        for (std::size_t i = 0; i < samples; ++i)
            if (r.curve[i].timestep != per_seed.front().curve[i].timestep)
                throw AlignmentError("curves sampled at different timesteps");
    }

    AggregateCurve agg;
    agg.n_seeds = static_cast<int>(per_seed.size());
    const double n = static_cast<double>(per_seed.size());
    for (std::size_t i = 0; i < samples; ++i) {
        agg.timesteps.push_back(per_seed.front().curve[i].timestep);
        double reward_mean = 0.0, eplen_mean = 0.0;
        for (const TrialResult& r : per_seed) {
            reward_mean += r.curve[i].avg_reward;
            eplen_mean += r.curve[i].avg_ep_len;
        }
        reward_mean /= n;
        eplen_mean /= n;
        double reward_var = 0.0, eplen_var = 0.0;
        for (const TrialResult& r : per_seed) {
            reward_var += (r.curve[i].avg_reward - reward_mean) * (r.curve[i].avg_reward - reward_mean);
            eplen_var += (r.curve[i].avg_ep_len - eplen_mean) * (r.curve[i].avg_ep_len - eplen_mean);
        }
        // Sample standard deviation, normal-approximation CI.
        reward_var /= (n - 1.0);
        eplen_var /= (n - 1.0);
        agg.reward_mean.push_back(reward_mean);
        agg.reward_ci95.push_back(1.96 * std::sqrt(reward_var) / std::sqrt(n));
        agg.eplen_mean.push_back(eplen_mean);
        agg.eplen_ci95.push_back(1.96 * std::sqrt(eplen_var) / std::sqrt(n));
    }
    return agg;
}

std::string render_plot_data(const AggregateCurve& aggregate) {
    std::string out = "timestep,reward_mean,reward_ci95,eplen_mean,eplen_ci95\n";
    for (std::size_t i = 0; i < aggregate.timesteps.size(); ++i) {
        out += csv_row({std::to_string(aggregate.timesteps[i]), format_double(aggregate.reward_mean[i]),
                        format_double(aggregate.reward_ci95[i]), format_double(aggregate.eplen_mean[i]),
                        format_double(aggregate.eplen_ci95[i])});
    }
    return out;
}

void emit_plot_data(const AggregateCurve& aggregate, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << render_plot_data(aggregate);
}

int env_workers_cap() {
    const char* raw = std::getenv("GOVREK_WORKERS");
    if (!raw) return 1;
    const int v = std::atoi(raw);
    return v >= 1 ? v : 1;
}

namespace {

std::string trial_csv(const TrialResult& result) {
    std::string out = "timestep,avg_reward,avg_ep_len,success_rate\n";
    for (const CurveSample& s : result.curve)
        out += csv_row({std::to_string(s.timestep), format_double(s.avg_reward),
                        format_double(s.avg_ep_len), format_double(s.success_rate)});
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

} // namespace

RunOutput run_experiment(const ExperimentConfig& config, int workers) {
    if (workers <= 0) workers = env_workers_cap();
    if (config.governance_kind == GovernanceKind::Search)
        throw ConfigError("use run_search for experiments with a search section");

    RunOutput output;
    output.dir = fs::path(config.out_dir);
    fs::create_directories(output.dir);

    const std::size_t n_seeds = config.seeds.size();
    output.per_seed.resize(n_seeds);
    std::vector<std::string> errors(n_seeds);

    auto run_seed = [&](std::size_t idx) {
        try {
            const std::uint64_t seed = config.seeds[idx];
            auto env = make_env(config, seed);
            LearnerConfig learner = config.learner;
            learner.seed = seed;
            env->seed(derive_seed(seed, {0x7365656443ULL}));
            TrainOutcome outcome = train(*env, learner, config.budget);
            output.per_seed[idx] = outcome.result;
        } catch (const std::exception& e) {
            errors[idx] = e.what();
        }
    };

    if (workers < 2 || n_seeds < 2) {
        for (std::size_t i = 0; i < n_seeds; ++i) run_seed(i);
    } else {
        std::size_t next = 0;
        while (next < n_seeds) {
            const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(workers), n_seeds - next);
            std::vector<std::future<void>> futures;
            for (std::size_t k = 0; k < batch; ++k)
                futures.push_back(std::async(std::launch::async, run_seed, next + k));
            for (auto& f : futures) f.get();
            next += batch;
        }
    }

    bool partial = false;
    for (const std::string& e : errors)
        if (!e.empty()) partial = true;
    if (partial) {
        std::string detail;
        for (std::size_t i = 0; i < n_seeds; ++i)
            if (!errors[i].empty())
                detail += "seed " + std::to_string(config.seeds[i]) + ": " + errors[i] + "; ";
        // Still write what we have, flagged in the manifest.
        json manifest;
        manifest["schema_version"] = kManifestSchema;
        manifest["code_version"] = kCodeVersion;
        manifest["name"] = config.name;
        manifest["status"] = "partial";
        manifest["errors"] = detail;
        write_text(output.dir / "manifest.json", manifest.dump(2) + "\n");
        throw ConfigError("experiment failed: " + detail);
    }

    // Per-seed CSVs, iterating seeds in config order.
    json seed_summaries = json::array();
    for (std::size_t i = 0; i < n_seeds; ++i) {
        const TrialResult& r = output.per_seed[i];
        const std::string file = "seed_" + std::to_string(config.seeds[i]) + ".csv";
        write_text(output.dir / file, trial_csv(r));
        json s;
        s["seed"] = config.seeds[i];
        s["file"] = file;
        s["steps_to_first_success"] = r.steps_to_first_success;
        s["final_avg_reward"] = r.avg_reward;
        s["final_avg_ep_len"] = r.avg_episode_length;
        s["final_success_rate"] = r.success_rate;
        s["total_timesteps"] = r.total_timesteps;
        seed_summaries.push_back(s);
    }

    if (n_seeds >= 2) {
        output.aggregate = aggregate_seeds(output.per_seed);
        write_text(output.dir / "aggregate.csv", render_plot_data(output.aggregate));
    }

    json manifest;
    manifest["schema_version"] = kManifestSchema;
    manifest["code_version"] = kCodeVersion;
    manifest["name"] = config.name;
    manifest["status"] = "complete";
    manifest["config_hash"] = config_hash(config);
    manifest["config"] = experiment_config_to_json(config);
    manifest["seeds"] = seed_summaries;
    manifest["aggregate_file"] = n_seeds >= 2 ? "aggregate.csv" : "";
    write_text(output.dir / "manifest.json", manifest.dump(2) + "\n");

    return output;
}

namespace {

std::string provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Sampled: return "sampled";
        case Provenance::Mutated: return "mutated";
        case Provenance::Superimposed: return "superimposed";
    }
    return "sampled";
}

} // namespace

SearchOutput run_search(const ExperimentConfig& config, int workers) {
    if (workers <= 0) workers = env_workers_cap();
    if (config.governance_kind != GovernanceKind::Search)
        throw ConfigError("config has no search section");

    SearchOutput output;
    output.dir = fs::path(config.out_dir);
    fs::create_directories(output.dir);

    // Probe env for the field domain and anchor repertoire.
    auto probe = make_env(config, config.seeds.front());
    const DomainDescriptor domain = probe->field_domain();
    const std::int64_t eplen_scale = probe->max_episode_len();

    std::vector<KernelScope> scopes;
    if (config.env_kind == EnvKind::Grid) {
        for (int a = 0; a < probe->n_agents(); ++a) scopes.push_back(KernelScope::agent(a));
        scopes.push_back(KernelScope::agnostic());
    } else {
        scopes = {KernelScope::agnostic(), KernelScope::agnostic()};
    }

    GeneticOps genetics;
    genetics.sample_config = [domain, scopes](Rng& rng) {
        return sample_kernel_population(static_cast<int>(scopes.size()), domain, scopes, rng);
    };
    genetics.mutate_spec = [](const KernelSpec& spec, Rng& rng) { return mutate(spec, rng, 1.0); };

    const ExperimentConfig& cfg = config;
    TrainerFn trainer = [&cfg](const ConfigRecord& record, std::int64_t budget, int rung,
                               std::shared_ptr<void> resume) -> TrialOutcome {
        auto env = make_env(cfg, cfg.seeds.front());
        const std::uint64_t trial_seed = derive_seed(cfg.search.seed, {record.id});
        GovernanceConfig gov = build_governance(record.specs, *env, cfg.shaping_mode,
                                                cfg.shaping_gamma, trial_seed);
        GovernedEnv governed(std::move(env), std::move(gov));
        governed.seed(derive_seed(trial_seed, {static_cast<std::uint64_t>(rung)}));

        LearnerConfig learner = cfg.learner;
        learner.seed = trial_seed;

        TrialOutcome out;
        auto prior = std::static_pointer_cast<TrainerState>(resume);
        TrainOutcome trained =
            train(governed, learner, budget * std::max<std::int64_t>(1, cfg.search.steps_per_unit),
                  prior.get());
        out.metrics = trained.result;
        out.resume_state = std::static_pointer_cast<void>(trained.state);
        out.policy = std::shared_ptr<const Policy>(std::move(trained.policy));
        return out;
    };

    SearchOptions options = config.search;
    options.workers = workers;
    options.objective.eplen_scale = static_cast<double>(eplen_scale);

    output.result = run_gov_rek(options, genetics, trainer);

    // Plan dump.
    json plan;
    plan["total_budget"] = output.result.plan.total_budget;
    plan["rounds"] = output.result.plan.rounds;
    plan["eta"] = output.result.plan.eta;
    plan["round_budgets"] = output.result.plan.round_budgets;
    json rounds = json::array();
    for (const auto& round : output.result.plan.brackets) {
        json brackets = json::array();
        for (const Bracket& b : round) {
            json bj;
            bj["s"] = b.s;
            bj["n_initial"] = b.n_initial;
            bj["r_initial"] = b.r_initial;
            json rungs = json::array();
            for (const Rung& r : b.rungs)
                rungs.push_back(json{{"n_configs", r.n_configs}, {"budget", r.budget}});
            bj["rungs"] = rungs;
            bj["budget_cap"] = b.budget_cap;
            brackets.push_back(bj);
        }
        rounds.push_back(brackets);
    }
    plan["brackets"] = rounds;
    write_text(output.dir / "plan.json", plan.dump(2) + "\n");

    // Per-trial metrics CSV.
    std::string trials = "config_id,parent_id,provenance,rung_reached,budget,avg_reward,avg_ep_len,failed\n";
    for (const ScoredConfig& sc : output.result.all_trials) {
        const ScorePoint last =
            sc.config.history.empty() ? ScorePoint{} : sc.config.history.back();
        trials += csv_row({std::to_string(sc.config.id),
                           sc.config.parent_id ? std::to_string(*sc.config.parent_id) : "",
                           provenance_name(sc.config.provenance), std::to_string(sc.rung_reached),
                           std::to_string(last.budget), format_double(last.avg_reward),
                           format_double(last.avg_episode_length), sc.failed ? "1" : "0"});
    }
    write_text(output.dir / "trials.csv", trials);

    // Winners manifest with lineage and kernel specs.
    json winners = json::array();
    for (const ScoredConfig& sc : output.result.global_top) {
        json w;
        w["id"] = sc.config.id;
        if (sc.config.parent_id) w["parent_id"] = *sc.config.parent_id;
        w["provenance"] = provenance_name(sc.config.provenance);
        json specs = json::array();
        for (const KernelSpec& spec : sc.config.specs) specs.push_back(kernel_spec_to_json(spec));
        w["kernels"] = specs;
        json history = json::array();
        for (const ScorePoint& p : sc.config.history)
            history.push_back(json{{"budget", p.budget},
                                   {"avg_reward", p.avg_reward},
                                   {"avg_episode_length", p.avg_episode_length}});
        w["history"] = history;
        winners.push_back(w);

        if (sc.policy)
            write_text(output.dir / ("policy_" + std::to_string(sc.config.id) + ".json"),
                       sc.policy->to_json_string() + "\n");
    }
    json fallbacks = json::array();
    for (const FallbackDecision& d : output.result.fallbacks)
        fallbacks.push_back(json{{"parent_id", d.parent_id},
                                 {"child_id", d.child_id},
                                 {"budget", d.budget},
                                 {"parent_reward", d.parent_reward},
                                 {"child_reward", d.child_reward},
                                 {"accepted_child", d.accepted_child}});
    json manifest;
    manifest["schema_version"] = kManifestSchema;
    manifest["code_version"] = kCodeVersion;
    manifest["name"] = config.name;
    manifest["config_hash"] = config_hash(config);
    manifest["winners"] = winners;
    manifest["fallbacks"] = fallbacks;
    write_text(output.dir / "winners.json", manifest.dump(2) + "\n");

    return output;
}

std::vector<ComparisonRow> compare_runs(const std::vector<std::string>& run_dirs,
                                        const std::string& metric) {
    if (run_dirs.size() < 2) throw InvalidInput("compare needs at least 2 run directories");

    std::vector<ComparisonRow> rows;
    for (const std::string& dir : run_dirs) {
        const fs::path base(dir);
        std::ifstream in(base / "manifest.json");
        if (!in) throw MissingRun("no manifest.json in " + dir);
        json manifest;
        in >> manifest;
        if (manifest.value("status", "") != "complete")
            throw MissingRun("run " + dir + " is not complete");

        ComparisonRow row;
        row.name = manifest.value("name", dir);

        std::vector<double> first_success;
        for (const json& s : manifest.at("seeds")) {
            const std::int64_t v = s.at("steps_to_first_success").get<std::int64_t>();
            first_success.push_back(v < 0 ? std::numeric_limits<double>::infinity()
                                          : static_cast<double>(v));
        }
        std::sort(first_success.begin(), first_success.end());
        const double median = first_success[(first_success.size() - 1) / 2];
        row.first_success_median = std::isinf(median) ? -1.0 : median;

        const std::string agg_file = manifest.value("aggregate_file", "");
        if (agg_file.empty()) throw MissingRun("run " + dir + " has no aggregate");
        const CsvTable table = read_csv((base / agg_file).string());
        if (table.rows.empty()) throw MissingRun("aggregate of " + dir + " is empty");
        row.final_reward = std::stod(table.rows.back()[1]);
        row.final_eplen = std::stod(table.rows.back()[3]);
        double auc = 0.0;
        for (std::size_t i = 1; i < table.rows.size(); ++i) {
            const double t0 = std::stod(table.rows[i - 1][0]);
            const double t1 = std::stod(table.rows[i][0]);
            const double r0 = std::stod(table.rows[i - 1][1]);
            const double r1 = std::stod(table.rows[i][1]);
            auc += (t1 - t0) * (r0 + r1) / 2.0;
        }
        row.auc = auc;
        rows.push_back(row);
    }

    if (metric != "first-success" && metric != "final-reward" && metric != "final-eplen" &&
        metric != "auc")
        throw InvalidInput("unknown metric '" + metric + "'");
    // Ties rank in name order.
    std::sort(rows.begin(), rows.end(),
              [](const ComparisonRow& a, const ComparisonRow& b) { return a.name < b.name; });
    auto never_last = [](double v) { return v < 0 ? std::numeric_limits<double>::infinity() : v; };
    std::stable_sort(rows.begin(), rows.end(), [&](const ComparisonRow& a, const ComparisonRow& b) {
        if (metric == "first-success")
            return never_last(a.first_success_median) < never_last(b.first_success_median);
        if (metric == "final-reward") return a.final_reward > b.final_reward;
        if (metric == "final-eplen") return a.final_eplen < b.final_eplen;
        return a.auc > b.auc;
    });
    return rows;
}

} // namespace govrek
