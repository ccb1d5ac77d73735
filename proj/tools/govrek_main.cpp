#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "govrek/csv.hpp"
#include "govrek/harness.hpp"
#include "govrek/serialize.hpp"

namespace {

using govrek::format_double;
using json = nlohmann::json;

int cmd_run(const std::string& config_path, int workers) {
    const govrek::ExperimentConfig config = govrek::load_experiment_config(config_path);
    const govrek::RunOutput out = govrek::run_experiment(config, workers);
    std::cout << "wrote " << out.dir.string() << " (" << out.per_seed.size() << " seeds)\n";
    for (std::size_t i = 0; i < out.per_seed.size(); ++i) {
        const govrek::TrialResult& r = out.per_seed[i];
        std::cout << "  seed " << config.seeds[i] << ": avg_reward=" << format_double(r.avg_reward)
                  << " avg_ep_len=" << format_double(r.avg_episode_length) << " first_success="
                  << (r.steps_to_first_success < 0 ? std::string("inf")
                                                   : std::to_string(r.steps_to_first_success))
                  << "\n";
    }
    return 0;
}

int cmd_search(const std::string& config_path, int workers, const std::string& out_dir) {
    govrek::ExperimentConfig config = govrek::load_experiment_config(config_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    try {
        const govrek::SearchOutput out = govrek::run_search(config, workers);
        std::cout << "wrote " << out.dir.string() << "\n";
        for (const govrek::ScoredConfig& sc : out.result.global_top) {
            const govrek::ScorePoint last =
                sc.config.history.empty() ? govrek::ScorePoint{} : sc.config.history.back();
            std::cout << "  config " << sc.config.id << ": avg_reward=" << format_double(last.avg_reward)
                      << " avg_ep_len=" << format_double(last.avg_episode_length) << "\n";
        }
        return 0;
    } catch (const govrek::BracketExhausted& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& metric) {
    const auto rows = govrek::compare_runs(dirs, metric);
    std::cout << "name,first_success_median,final_reward,final_eplen,auc\n";
    for (const govrek::ComparisonRow& row : rows) {
        std::cout << row.name << ','
                  << (row.first_success_median < 0 ? std::string("inf")
                                                   : format_double(row.first_success_median))
                  << ',' << format_double(row.final_reward) << ',' << format_double(row.final_eplen)
                  << ',' << format_double(row.auc) << "\n";
    }
    return 0;
}

int cmd_eval(const std::string& policy_path, const std::string& config_path, int episodes,
             std::uint64_t seed) {
    std::ifstream in(policy_path);
    if (!in) throw govrek::ConfigError("cannot open policy file " + policy_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto policy = govrek::Policy::from_json_string(text);

    const govrek::ExperimentConfig config = govrek::load_experiment_config(config_path);
    auto env = govrek::make_env(config, seed);
    const govrek::EvalMetrics m = govrek::evaluate(*policy, *env, episodes, seed);
    std::cout << "avg_reward=" << format_double(m.avg_reward)
              << " avg_ep_len=" << format_double(m.avg_episode_length)
              << " success_rate=" << format_double(m.success_rate) << "\n";
    return 0;
}

int cmd_kernel_render(const std::string& spec_path, const std::string& domain_text,
                      const std::string& out_path, int n_agents) {
    std::ifstream in(spec_path);
    if (!in) throw govrek::ConfigError("cannot open spec file " + spec_path);
    json spec_json;
    in >> spec_json;
    const govrek::KernelSpec spec = govrek::kernel_spec_from_json(spec_json);
    const govrek::DomainDescriptor domain = govrek::parse_grid_domain(domain_text);

    govrek::AnchorContext ctx;
    ctx.goal = domain.cell_point(domain.cell_count() - 1);
    // Agent-specific specs render against a start at the low corner.
    ctx.agent_starts.assign(4, domain.cell_point(0));

    const govrek::RewardField raw = govrek::build_reward_field(spec, domain, ctx);
    const govrek::RewardField norm = govrek::normalize_field(raw, n_agents, spec.sign_mode);

    std::string csv;
    csv += domain.ndim() == 3 ? "row,col,layer,raw,normalized\n" : "row,col,raw,normalized\n";
    for (std::int64_t cell = 0; cell < domain.cell_count(); ++cell) {
        const govrek::Point p = domain.cell_point(cell);
        std::vector<std::string> cells;
        for (int i = 0; i < domain.ndim(); ++i)
            cells.push_back(std::to_string(static_cast<std::int64_t>(p[i])));
        if (domain.ndim() == 1) cells.push_back("0"); // single-row grid
        cells.push_back(format_double(raw.values[static_cast<std::size_t>(cell)]));
        cells.push_back(format_double(norm.values[static_cast<std::size_t>(cell)]));
        csv += govrek::csv_row(cells);
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw govrek::ConfigError("cannot write " + out_path);
    out << csv;
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_env_rollout(const std::string& config_path, const std::string& policy_name,
                    std::uint64_t seed, const std::string& out_path) {
    const govrek::ExperimentConfig config = govrek::load_experiment_config(config_path);
    if (config.env_kind != govrek::EnvKind::Grid)
        throw govrek::ConfigError("rollout logging targets the delivery env");
    if (policy_name != "random")
        throw govrek::ConfigError("only the 'random' rollout policy is available");

    auto env_owner = govrek::make_env(config, seed);
    env_owner->seed(govrek::derive_seed(seed, {0x726f6cULL}));
    env_owner->reset();
    govrek::Rng rng(govrek::derive_seed(seed, {0x616374ULL}));

    const int nd = static_cast<int>(config.grid.dims.size());
    std::string csv = "step";
    for (int a = 0; a < config.grid.n_agents; ++a) {
        csv += ",agent" + std::to_string(a) + "_row,agent" + std::to_string(a) + "_col";
        if (nd == 3) csv += ",agent" + std::to_string(a) + "_layer";
        csv += ",fuel" + std::to_string(a);
    }
    csv += ",package";
    for (int a = 0; a < config.grid.n_agents; ++a) csv += ",action" + std::to_string(a);
    for (int a = 0; a < config.grid.n_agents; ++a) csv += ",reward" + std::to_string(a);
    for (int a = 0; a < config.grid.n_agents; ++a) csv += ",base" + std::to_string(a);
    for (int a = 0; a < config.grid.n_agents; ++a) csv += ",added" + std::to_string(a);
    csv += "\n";

    // The underlying delivery env is reachable through the shaping wrappers
    // only for state reporting; the rollout steps the outermost env.
    const govrek::DomainDescriptor domain = govrek::DomainDescriptor::grid(config.grid.dims);
    std::int64_t step = 0;
    while (!env_owner->done()) {
        std::vector<int> actions(static_cast<std::size_t>(config.grid.n_agents));
        for (int& a : actions)
            a = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(env_owner->n_actions())));

        std::vector<std::string> cells{std::to_string(step)};
        // positions & fuel before the step
        std::vector<std::int64_t> pos;
        std::vector<std::int64_t> fuel;
        std::string package;
        {
            const auto* grid = dynamic_cast<const govrek::GridEnv*>(env_owner.get());
            if (!grid) {
                if (const auto* governed = dynamic_cast<const govrek::GovernedEnv*>(env_owner.get()))
                    grid = dynamic_cast<const govrek::GridEnv*>(
                        &const_cast<govrek::GovernedEnv*>(governed)->inner());
            }
            if (!grid) throw govrek::ConfigError("rollout needs a grid-backed env");
            pos = grid->state().positions;
            fuel = grid->state().fuel;
            package = grid->state().holder >= 0
                          ? "agent" + std::to_string(grid->state().holder)
                          : std::to_string(grid->state().package_cell);
        }
        for (int a = 0; a < config.grid.n_agents; ++a) {
            const govrek::Point p = domain.cell_point(pos[static_cast<std::size_t>(a)]);
            for (int i = 0; i < nd; ++i)
                cells.push_back(std::to_string(static_cast<std::int64_t>(p[i])));
            cells.push_back(std::to_string(fuel[static_cast<std::size_t>(a)]));
        }
        cells.push_back(package);

        const govrek::StepResult r = env_owner->step(actions);
        for (int a : actions) cells.push_back(std::to_string(a));
        for (double v : r.rewards) cells.push_back(format_double(v));
        for (double v : r.base_rewards) cells.push_back(format_double(v));
        for (int a = 0; a < config.grid.n_agents; ++a)
            cells.push_back(format_double(r.added.empty() ? 0.0 : r.added[static_cast<std::size_t>(a)]));
        csv += govrek::csv_row(cells);
        step += 1;
    }

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw govrek::ConfigError("cannot write " + out_path);
    out << csv;
    std::cout << "wrote " << out_path << " (" << step << " steps)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GOV-REK: governance-kernel reward shaping for sparse multi-agent RL"};
    app.require_subcommand(1);

    std::string config_path, out_dir, metric = "first-success", policy_path, spec_path;
    std::string domain_text = "5x5", policy_name = "random", out_path = "out.csv";
    std::vector<std::string> compare_dirs;
    int workers = 0, episodes = 20, n_agents = 2;
    std::uint64_t seed = 1;

    CLI::App* run = app.add_subcommand("run", "run a seeded experiment from a config file");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--workers", workers, "concurrent seed runs (default GOVREK_WORKERS)");

    CLI::App* search = app.add_subcommand("search", "run the kernel configuration search");
    search->add_option("--config", config_path, "experiment config JSON with a search section")->required();
    search->add_option("--workers", workers, "concurrent trials (default GOVREK_WORKERS)");
    search->add_option("--out-dir", out_dir, "override the output directory");

    CLI::App* compare = app.add_subcommand("compare", "rank finished runs by a metric");
    compare->add_option("dirs", compare_dirs, "run directories")->expected(-2);
    compare->add_option("--metric", metric, "first-success | final-reward | final-eplen | auc");

    CLI::App* eval = app.add_subcommand("eval", "re-evaluate a serialized policy");
    eval->add_option("--policy", policy_path, "policy JSON file")->required();
    eval->add_option("--config", config_path, "experiment config for the env")->required();
    eval->add_option("--episodes", episodes, "evaluation episodes");
    eval->add_option("--seed", seed, "evaluation seed");

    CLI::App* kernel = app.add_subcommand("kernel", "kernel utilities");
    CLI::App* render = kernel->add_subcommand("render", "evaluate a kernel spec over a grid");
    render->add_option("--spec", spec_path, "kernel spec JSON")->required();
    render->add_option("--domain", domain_text, "grid extents, e.g. 5x5 or 3x3x3");
    render->add_option("--out", out_path, "output CSV")->required();
    render->add_option("--n-agents", n_agents, "normalization divisor");

    CLI::App* envcmd = app.add_subcommand("env", "environment utilities");
    CLI::App* rollout = envcmd->add_subcommand("rollout", "log a random-policy trajectory");
    rollout->add_option("--config", config_path, "experiment config JSON")->required();
    rollout->add_option("--policy", policy_name, "rollout policy (random)");
    rollout->add_option("--seed", seed, "episode seed");
    rollout->add_option("--out", out_path, "output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, workers);
        if (search->parsed()) return cmd_search(config_path, workers, out_dir);
        if (compare->parsed()) return cmd_compare(compare_dirs, metric);
        if (eval->parsed()) return cmd_eval(policy_path, config_path, episodes, seed);
        if (kernel->parsed() && render->parsed())
            return cmd_kernel_render(spec_path, domain_text, out_path, n_agents);
        if (envcmd->parsed() && rollout->parsed())
            return cmd_env_rollout(config_path, policy_name, seed, out_path);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const govrek::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
