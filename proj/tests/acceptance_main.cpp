// Acceptance suite: one pass/fail line per criterion, exit 1 on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "govrek/dilemma.hpp"
#include "govrek/governance.hpp"
#include "govrek/grid_env.hpp"
#include "govrek/harness.hpp"
#include "govrek/learner.hpp"
#include "govrek/mdp.hpp"
#include "govrek/paths.hpp"
#include "govrek/scheduler.hpp"
#include "support/test_util.hpp"

using namespace govrek;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int id;
    const char* label;
    bool passed;
    double seconds;
    std::string detail;
};

std::vector<Criterion> g_results;

template <typename Fn>
void run_criterion(int id, const char* label, double time_limit_s, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
        detail = fn();
        ok = true;
    } catch (const std::exception& e) {
        detail = e.what();
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && time_limit_s > 0 && elapsed > time_limit_s) {
        ok = false;
        detail += " [exceeded time limit]";
    }
    g_results.push_back({id, label, ok, elapsed, detail});
}

#define ACCEPT_CHECK(cond, msg)                                  \
    do {                                                         \
        if (!(cond)) throw std::runtime_error(std::string(msg)); \
    } while (0)

double field_total(const RewardField& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s;
}

// --------------------------------------------------------------------------
// 1. Kernel normalization across families and domains.

std::string criterion_normalization() {
    Rng rng(20240301);
    int checked = 0;

    struct DomainSetup {
        DomainDescriptor domain;
        AnchorContext context;
        std::vector<KernelScope> scopes;
        int count;
    };
    AnchorContext grid2d_ctx;
    grid2d_ctx.agent_starts = {Point(1.0, 0.0), Point(3.0, 4.0)};
    grid2d_ctx.goal = Point(4.0, 4.0);
    AnchorContext grid3d_ctx;
    grid3d_ctx.agent_starts = {Point(2.0, 0.0, 0.0), Point(1.0, 2.0, 2.0)};
    grid3d_ctx.goal = Point(2.0, 2.0, 2.0);
    AnchorContext joint_ctx;
    joint_ctx.goal = Point(4095.0);

    std::vector<DomainSetup> setups{
        {DomainDescriptor::grid({5, 5}), grid2d_ctx,
         {KernelScope::agent(0), KernelScope::agent(1), KernelScope::agnostic()}, 70},
        {DomainDescriptor::grid({3, 3, 3}), grid3d_ctx,
         {KernelScope::agent(0), KernelScope::agent(1), KernelScope::agnostic()}, 70},
        {DomainDescriptor::joint_action(4096), joint_ctx, {KernelScope::agnostic()}, 60}};

    for (const DomainSetup& setup : setups) {
        int produced = 0;
        int guard = 0;
        while (produced < setup.count) {
            ACCEPT_CHECK(++guard < setup.count * 50, "sampler exhausted by degenerate fields");
            const auto specs = sample_kernel_population(1, setup.domain, setup.scopes, rng);
            KernelSpec spec = specs.front();
            if (spec.scope.agent_specific && setup.context.agent_starts.empty())
                spec.scope = KernelScope::agnostic();
            RewardField raw;
            try {
                raw = build_reward_field(spec, setup.domain, setup.context, rng.next_u64());
            } catch (const MissingContext&) {
                continue;
            }
            const int n_agents = 1 + static_cast<int>(rng.uniform_int(5));
            RewardField pos;
            try {
                pos = normalize_field(raw, n_agents, SignMode::AllPositive);
            } catch (const DegenerateField&) {
                continue; // flat field (surface outside the grid); resample
            }
            ACCEPT_CHECK(std::abs(field_total(pos) - 1.0 / n_agents) <= 1e-9,
                         "all-positive sum invariant violated");
            for (double v : pos.values) ACCEPT_CHECK(v >= 0.0, "all-positive min invariant violated");
            const RewardField zm = normalize_field(raw, n_agents, SignMode::ZeroMean);
            ACCEPT_CHECK(std::abs(field_total(zm)) <= 1e-9, "zero-mean sum invariant violated");
            ++produced;
            ++checked;
        }
    }
    ACCEPT_CHECK(checked == 200, "expected 200 sampled specs");
    return "200 sampled specs across 6 families, grid and joint-action domains";
}

// --------------------------------------------------------------------------
// 2. PBRS policy invariance.

std::string criterion_policy_invariance() {
    Rng rng(77001);
    const double gamma = 0.93;
    for (int trial = 0; trial < 20; ++trial) {
        const std::int64_t n = 20 + static_cast<std::int64_t>(rng.uniform_int(181)); // <= 200
        const EnumerableMdp mdp = make_random_mdp(n, 2 + static_cast<int>(rng.uniform_int(4)), 3, rng);
        std::vector<double> phi(static_cast<std::size_t>(n));
        for (double& p : phi) p = rng.uniform(-2.0, 2.0);
        const auto base = value_iteration(mdp, gamma, 1e-12);
        const auto shaped = value_iteration(shaped_mdp(mdp, phi, gamma), gamma, 1e-12);
        for (std::int64_t s = 0; s < n; ++s)
            ACCEPT_CHECK(base.greedy[static_cast<std::size_t>(s)] ==
                             shaped.greedy[static_cast<std::size_t>(s)],
                         "greedy set changed on a random MDP");
    }

    GridEnvConfig cfg;
    cfg.dims = {3, 3};
    cfg = cfg.resolved();
    const JointMdp joint = build_joint_mdp(cfg);

    GridEnv env(cfg, 0);
    std::vector<KernelSpec> specs;
    for (int agent = 0; agent < 2; ++agent) {
        KernelSpec se;
        se.family = KernelFamily::SquaredExponential;
        se.scope = KernelScope::agent(agent);
        se.anchor = Anchor::agent_start();
        specs.push_back(se);
    }
    KernelSpec lin;
    lin.family = KernelFamily::Linear;
    lin.anchor = Anchor::goal();
    lin.offset_c = -1.0;
    specs.push_back(lin);
    const GovernanceConfig gov = build_governance(specs, env, ShapingMode::Potential, 0.95);

    std::vector<double> phi(static_cast<std::size_t>(joint.mdp.n_states), 0.0);
    for (std::int64_t s = 0; s < joint.mdp.n_states; ++s)
        for (int agent = 0; agent < 2; ++agent) {
            const std::int64_t cell =
                joint.agent_cells[static_cast<std::size_t>(s)][static_cast<std::size_t>(agent)];
            for (const RewardField& f : gov.fields)
                if (f.owner_agent == agent || f.shared())
                    phi[static_cast<std::size_t>(s)] += f.values[static_cast<std::size_t>(cell)];
        }

    const auto base = value_iteration(joint.mdp, 0.95, 1e-10);
    const auto shaped = value_iteration(shaped_mdp(joint.mdp, phi, 0.95), 0.95, 1e-10);
    for (std::int64_t s = 0; s < joint.mdp.n_states; ++s)
        ACCEPT_CHECK(base.greedy[static_cast<std::size_t>(s)] ==
                         shaped.greedy[static_cast<std::size_t>(s)],
                     "greedy set changed on the delivery joint MDP");
    return "20 random MDPs + " + std::to_string(joint.mdp.n_states) +
           "-state delivery joint MDP, exact greedy-set equality";
}

// --------------------------------------------------------------------------
// 3. Telescoping identity.

std::string criterion_telescoping() {
    GridEnvConfig cfg;
    cfg.dims = {3, 3};
    const double gamma = 0.97;
    auto base = std::make_unique<GridEnv>(cfg.resolved(), 5);
    std::vector<KernelSpec> specs;
    for (int agent = 0; agent < 2; ++agent) {
        KernelSpec se;
        se.family = KernelFamily::SquaredExponential;
        se.scope = KernelScope::agent(agent);
        se.anchor = Anchor::agent_start();
        specs.push_back(se);
    }
    KernelSpec lin;
    lin.family = KernelFamily::Linear;
    lin.anchor = Anchor::goal();
    lin.offset_c = -1.0;
    specs.push_back(lin);
    GovernanceConfig gov = build_governance(specs, *base, ShapingMode::Potential, gamma);
    GovernedEnv env(std::move(base), std::move(gov));

    Rng rng(314159);
    double worst = 0.0;
    for (int episode = 0; episode < 1000; ++episode) {
        env.reset();
        std::vector<double> phi0{env.potential(0), env.potential(1)};
        std::vector<double> sums(2, 0.0);
        double discount = 1.0;
        std::int64_t T = 0;
        bool delivered = false;
        while (!env.done()) {
            std::vector<int> actions{static_cast<int>(rng.uniform_int(6)),
                                     static_cast<int>(rng.uniform_int(6))};
            const StepResult r = env.step(actions);
            for (int a = 0; a < 2; ++a) sums[static_cast<std::size_t>(a)] += discount * r.added[static_cast<std::size_t>(a)];
            discount *= gamma;
            ++T;
            delivered = r.info.delivered;
        }
        for (int a = 0; a < 2; ++a) {
            const double phi_T = delivered ? 0.0 : env.potential(a);
            const double expected =
                std::pow(gamma, static_cast<double>(T)) * phi_T - phi0[static_cast<std::size_t>(a)];
            worst = std::max(worst, std::abs(sums[static_cast<std::size_t>(a)] - expected));
        }
    }
    ACCEPT_CHECK(worst <= 1e-9, "telescoping deviation " + std::to_string(worst));
    return "1000 episodes, max |deviation| = " + std::to_string(worst);
}

// --------------------------------------------------------------------------
// 4. Path-count oracle.

std::string criterion_paths() {
    ACCEPT_CHECK(count_monotone_paths({5, 5}) == 70, "(5,5) must be 70");
    ACCEPT_CHECK(count_monotone_paths({3, 3, 3}) == 90, "(3,3,3) must be 90");
    int grids = 0;
    for (std::int64_t l = 1; l <= 14; ++l)
        for (std::int64_t w = 1; w <= 14; ++w) {
            std::uint64_t closed;
            try {
                closed = count_monotone_paths({l, w});
            } catch (const Overflow&) {
                continue;
            }
            if (closed > 10000) continue;
            ACCEPT_CHECK(closed == govrek_test::brute_force_monotone_paths({l, w}),
                         "2D mismatch at " + std::to_string(l) + "x" + std::to_string(w));
            ++grids;
        }
    for (std::int64_t l = 1; l <= 7; ++l)
        for (std::int64_t w = 1; w <= 7; ++w)
            for (std::int64_t h = 1; h <= 7; ++h) {
                const std::uint64_t closed = count_monotone_paths({l, w, h});
                if (closed > 10000) continue;
                ACCEPT_CHECK(closed == govrek_test::brute_force_monotone_paths({l, w, h}),
                             "3D mismatch");
                ++grids;
            }
    return std::to_string(grids) + " grids matched brute-force enumeration";
}

// --------------------------------------------------------------------------
// 5. Hyperband accounting.

std::string criterion_hyperband() {
    const SearchPlan plan = plan_rounds(27, 1, 3);
    const auto& round = plan.brackets.at(0);
    ACCEPT_CHECK(round.size() == 4, "expected 4 brackets for R=27, eta=3");
    const std::vector<std::tuple<int, std::int64_t, double>> expected{
        {3, 27, 1.0}, {2, 12, 3.0}, {1, 6, 9.0}, {0, 4, 27.0}};
    for (std::size_t i = 0; i < expected.size(); ++i) {
        ACCEPT_CHECK(round[i].s == std::get<0>(expected[i]), "bracket s mismatch");
        ACCEPT_CHECK(round[i].n_initial == std::get<1>(expected[i]), "bracket n mismatch");
        ACCEPT_CHECK(std::abs(round[i].r_initial - std::get<2>(expected[i])) < 1e-12,
                     "bracket r mismatch");
        ACCEPT_CHECK(static_cast<double>(round[i].consumed_budget()) <= round[i].budget_cap + 1e-9,
                     "bracket exceeds the exact budget bound");
    }

    const SearchPlan rounds = plan_rounds(81, 3, 3);
    ACCEPT_CHECK((rounds.round_budgets == std::vector<std::int64_t>{81, 54, 27}),
                 "round budgets must be [81, 54, 27]");
    for (const auto& r : rounds.brackets)
        for (const Bracket& b : r)
            ACCEPT_CHECK(static_cast<double>(b.consumed_budget()) <= b.budget_cap + 1e-9,
                         "bracket exceeds the exact budget bound");
    return "brackets (3,27,1),(2,12,3),(1,6,9),(0,4,27); budgets [81,54,27]; bounds hold";
}

// --------------------------------------------------------------------------
// Shared experiment setup for criteria 6/7.

ExperimentConfig delivery_experiment(const std::string& name, GovernanceKind kind,
                                     const fs::path& out_dir) {
    ExperimentConfig config;
    config.name = name;
    config.env_kind = EnvKind::Grid;
    config.grid.dims = {5, 5};
    config.grid.max_episode_len = 40;
    config.grid.fuel = {8, 12}; // cooperation still forced; agent 2 gets slack
    config.grid = config.grid.resolved();

    config.governance_kind = kind;
    if (kind == GovernanceKind::Fixed) {
        for (int agent = 0; agent < 2; ++agent) {
            KernelSpec se;
            se.family = KernelFamily::SquaredExponential;
            se.scope = KernelScope::agent(agent);
            se.anchor = Anchor::agent_start();
            se.length_scale = agent == 0 ? 1.2 : 6.0;
            se.decay = 0.5;
            config.kernels.push_back(se);
        }
        KernelSpec lin;
        lin.family = KernelFamily::Linear;
        lin.anchor = Anchor::goal();
        lin.offset_c = -1.0;
        lin.decay = 0.5;
        config.kernels.push_back(lin);
        config.shaping_mode = ShapingMode::Additive;
        config.shaping_gamma = 0.99;
    }

    config.learner.algorithm = Algorithm::TabularQ;
    config.learner.paradigm = Paradigm::CTCE;
    config.learner.gamma = 0.95;
    config.learner.learning_rate = 0.3;
    config.learner.exploration.eps_end = 0.25;
    config.learner.exploration.decay_steps = 100000;
    config.learner.eval_every = 100000;
    config.learner.eval_episodes = 20;
    config.budget = 500000;
    config.seeds = {1, 2, 3, 4, 5};
    config.out_dir = out_dir.string();
    return config;
}

double median_first_success(const std::vector<TrialResult>& per_seed) {
    std::vector<double> values;
    for (const TrialResult& r : per_seed)
        values.push_back(r.steps_to_first_success < 0
                             ? std::numeric_limits<double>::infinity()
                             : static_cast<double>(r.steps_to_first_success));
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

fs::path acceptance_dir() {
    const fs::path dir = fs::temp_directory_path() / "govrek_acceptance";
    fs::create_directories(dir);
    return dir;
}

RunOutput g_governed_run; // shared between criteria 6 and 7

std::string criterion_jumpstart() {
    const fs::path dir = acceptance_dir();
    const ExperimentConfig governed =
        delivery_experiment("acc6_governed", GovernanceKind::Fixed, dir / "gov");
    const ExperimentConfig plain =
        delivery_experiment("acc6_ungoverned", GovernanceKind::None, dir / "plain");

    g_governed_run = run_experiment(governed, 5);
    const RunOutput plain_run = run_experiment(plain, 5);

    const double gov_median = median_first_success(g_governed_run.per_seed);
    const double plain_median = median_first_success(plain_run.per_seed);

    ACCEPT_CHECK(std::isfinite(gov_median), "governed median never reached a success");
    ACCEPT_CHECK(gov_median < plain_median, "governed median " + std::to_string(gov_median) +
                                                " not below ungoverned " +
                                                std::to_string(plain_median));
    return "median first success: governed " + std::to_string(static_cast<long long>(gov_median)) +
           " vs ungoverned " +
           (std::isfinite(plain_median) ? std::to_string(static_cast<long long>(plain_median))
                                        : std::string("inf"));
}

std::string criterion_mors() {
    const fs::path dir = acceptance_dir();
    const ExperimentConfig mors =
        delivery_experiment("acc7_mors", GovernanceKind::Mors, dir / "mors");
    const RunOutput mors_run = run_experiment(mors, 5);
    ACCEPT_CHECK(!g_governed_run.per_seed.empty(), "criterion 6 must run first");

    auto final_eplen = [](const RunOutput& run) {
        double total = 0.0;
        for (const TrialResult& r : run.per_seed) total += r.avg_episode_length;
        return total / static_cast<double>(run.per_seed.size());
    };
    const double governed_eplen = final_eplen(g_governed_run);
    const double mors_eplen = final_eplen(mors_run);
    ACCEPT_CHECK(governed_eplen <= mors_eplen + 1e-9,
                 "governed eplen " + std::to_string(governed_eplen) + " above MORS " +
                     std::to_string(mors_eplen));
    return "final avg episode length: governed " + std::to_string(governed_eplen) + " <= MORS " +
           std::to_string(mors_eplen);
}

// --------------------------------------------------------------------------
// 8. Social dilemma.

ExperimentConfig dilemma_experiment(const std::string& name, bool governed, const fs::path& out) {
    ExperimentConfig config;
    config.name = name;
    config.env_kind = EnvKind::Dilemma;
    config.dilemma.n_agents = 16;
    config.dilemma.episode_len = 16;
    config.dilemma.sparsity = PayoffSparsity::Sparse;
    config.dilemma.profile = PayoffProfile::Homogeneous;
    // Cooperator-count flattening: every agent sees the same joint-action
    // gradient instead of an exponentially vanishing bit weight.
    config.dilemma.index_mode = JointIndexMode::CooperatorCount;
    config.dilemma = config.dilemma.resolved();

    if (governed) {
        config.governance_kind = GovernanceKind::Fixed;
        KernelSpec lin;
        lin.family = KernelFamily::Linear;
        lin.anchor = Anchor::goal();
        lin.offset_c = -1.0;
        lin.sign_mode = SignMode::ZeroMean;
        KernelSpec per;
        per.family = KernelFamily::Periodic;
        per.anchor = Anchor::goal();
        per.period = 2.0;
        per.length_scale = 1.0;
        per.sign_mode = SignMode::ZeroMean;
        config.kernels = {lin, per};
        config.shaping_mode = ShapingMode::Additive;
        config.shaping_gamma = 0.99;
    } else {
        config.governance_kind = GovernanceKind::None;
    }

    config.learner.algorithm = Algorithm::TabularQ;
    config.learner.paradigm = Paradigm::CTDE;
    config.learner.gamma = 0.9;
    config.learner.learning_rate = 0.1;
    config.learner.exploration.eps_end = 0.05;
    config.learner.eval_every = 10000;
    config.learner.eval_episodes = 10;
    config.budget = 200000;
    config.seeds = {1, 2, 3, 4, 5};
    config.out_dir = out.string();
    return config;
}

std::string criterion_dilemma() {
    const fs::path dir = acceptance_dir();
    const RunOutput governed = run_experiment(dilemma_experiment("acc8_governed", true, dir / "d_gov"), 5);
    const RunOutput plain = run_experiment(dilemma_experiment("acc8_ungoverned", false, dir / "d_plain"), 5);

    auto final_tenth = [](const TrialResult& r) {
        double total = 0.0;
        int count = 0;
        for (const CurveSample& s : r.curve)
            if (s.timestep > r.total_timesteps * 9 / 10) {
                total += s.avg_reward;
                ++count;
            }
        return count ? total / count : 0.0;
    };
    auto median_of = [&](const RunOutput& run) {
        std::vector<double> v;
        for (const TrialResult& r : run.per_seed) v.push_back(final_tenth(r));
        std::sort(v.begin(), v.end());
        return v[(v.size() - 1) / 2];
    };
    const double gov_median = median_of(governed);
    const double plain_median = median_of(plain);
    ACCEPT_CHECK(gov_median >= plain_median,
                 "governed " + std::to_string(gov_median) + " below ungoverned " +
                     std::to_string(plain_median));
    return "final-10% avg per-agent reward: governed " + std::to_string(gov_median) +
           " >= ungoverned " + std::to_string(plain_median);
}

// --------------------------------------------------------------------------
// 9. Gradient check.

std::string criterion_gradient() {
    double worst = 0.0;
    for (std::uint64_t batch_seed = 1; batch_seed <= 10; ++batch_seed) {
        Rng init_rng(batch_seed);
        PgNet net = PgNet::init(9, 8, 4, init_rng);
        EnumerableMdp mdp;
        {
            Rng mdp_rng(batch_seed * 31 + 7);
            mdp = make_random_mdp(9, 4, 2, mdp_rng);
        }
        MdpEnv env(mdp, batch_seed, 40);
        Rng rollout_rng(batch_seed * 101 + 3);
        PgBatch batch = collect_pg_batch(env, net, rollout_rng, 96, 0.95);
        // Check both at the sampling point and after one update (clipping live).
        worst = std::max(worst, finite_difference_gradient_check(net, batch, 0.2, 1e-5));
        const std::vector<double> grad = pg_surrogate_gradient(net, batch, 0.2);
        for (std::size_t i = 0; i < net.params.size(); ++i) net.params[i] += 0.5 * grad[i];
        worst = std::max(worst, finite_difference_gradient_check(net, batch, 0.2, 1e-5));
    }
    ACCEPT_CHECK(worst <= 1e-4, "max relative error " + std::to_string(worst));
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", worst);
    return std::string("10 seeded batches, max relative error ") + buf;
}

// --------------------------------------------------------------------------
// 10. Determinism across reruns and worker counts.

std::string criterion_determinism() {
    const fs::path dir = acceptance_dir() / "det";
    fs::remove_all(dir);

    ExperimentConfig config;
    config.name = "acc10";
    config.env_kind = EnvKind::Grid;
    config.grid.dims = {3, 3};
    config.grid = config.grid.resolved();
    config.governance_kind = GovernanceKind::Fixed;
    KernelSpec se;
    se.family = KernelFamily::SquaredExponential;
    se.scope = KernelScope::agent(0);
    se.anchor = Anchor::agent_start();
    se.decay = 0.5;
    KernelSpec lin;
    lin.family = KernelFamily::Linear;
    lin.anchor = Anchor::goal();
    lin.offset_c = -1.0;
    config.kernels = {se, lin};
    config.learner.gamma = 0.95;
    config.learner.learning_rate = 0.2;
    config.learner.eval_episodes = 5;
    config.budget = 5000;
    config.seeds = {1, 2, 3};

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        ACCEPT_CHECK(static_cast<bool>(in), "missing output file " + p.string());
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    auto tree = [&](const fs::path& root) {
        std::vector<std::pair<std::string, std::string>> files;
        for (const auto& entry : fs::recursive_directory_iterator(root))
            if (entry.is_regular_file())
                files.emplace_back(entry.path().filename().string(), slurp(entry.path()));
        std::sort(files.begin(), files.end());
        return files;
    };

    // Identical config (including out_dir): rerun in place at workers 1, 1, 4
    // and snapshot the full tree between runs.
    config.out_dir = (dir / "run").string();
    run_experiment(config, 1);
    const auto t1 = tree(dir / "run");
    run_experiment(config, 1);
    const auto t2 = tree(dir / "run");
    run_experiment(config, 4);
    const auto t4 = tree(dir / "run");

    ACCEPT_CHECK(t1.size() == t2.size() && t1.size() == t4.size(), "output tree shape differs");
    int compared = 0;
    for (std::size_t i = 0; i < t1.size(); ++i) {
        ACCEPT_CHECK(t1[i].first == t2[i].first && t1[i].first == t4[i].first,
                     "output file names differ");
        ACCEPT_CHECK(t1[i].second == t2[i].second, "rerun differs in " + t1[i].first);
        ACCEPT_CHECK(t1[i].second == t4[i].second, "worker count changed " + t1[i].first);
        ++compared;
    }
    ACCEPT_CHECK(compared >= 5, "expected per-seed CSVs, aggregate and manifest");
    return std::to_string(compared) + " files byte-identical across rerun and workers 1/4";
}

} // namespace

int main() {
    std::printf("GOV-REK acceptance suite\n");

    run_criterion(1, "kernel normalization (200 sampled specs)", 10.0, criterion_normalization);
    run_criterion(2, "PBRS policy invariance (random MDPs + delivery joint MDP)", 60.0,
                  criterion_policy_invariance);
    run_criterion(3, "potential telescoping identity (1000 episodes)", 0.0, criterion_telescoping);
    run_criterion(4, "monotone path count oracle", 0.0, criterion_paths);
    run_criterion(5, "hyperband bracket arithmetic and budget bounds", 0.0, criterion_hyperband);
    run_criterion(6, "jumpstart: governed vs ungoverned first success", 600.0, criterion_jumpstart);
    run_criterion(7, "episode length: governed vs MORS", 0.0, criterion_mors);
    run_criterion(8, "social dilemma: governed vs ungoverned CTDE", 300.0, criterion_dilemma);
    run_criterion(9, "policy-gradient finite-difference check", 0.0, criterion_gradient);
    run_criterion(10, "byte-identical reruns at workers 1 and 4", 0.0, criterion_determinism);

    bool all_ok = true;
    for (const Criterion& c : g_results) {
        std::printf("%s criterion %2d [%6.2fs] %s — %s\n", c.passed ? "PASS" : "FAIL", c.id,
                    c.seconds, c.label, c.detail.c_str());
        all_ok = all_ok && c.passed;
    }
    std::printf(all_ok ? "acceptance: all criteria passed\n" : "acceptance: FAILURES present\n");
    return all_ok ? 0 : 1;
}
