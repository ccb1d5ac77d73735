#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "govrek/governance.hpp"
#include "govrek/grid_env.hpp"
#include "govrek/mdp.hpp"

using namespace govrek;

namespace {

GridEnvConfig fixed_3x3() {
    GridEnvConfig config;
    config.dims = {3, 3};
    return config.resolved();
}

std::vector<KernelSpec> paper_combo_specs() {
    // Agent-specific SE around each start plus an agent-agnostic linear
    // gradient toward the goal.
    std::vector<KernelSpec> specs;
    for (int agent = 0; agent < 2; ++agent) {
        KernelSpec se;
        se.family = KernelFamily::SquaredExponential;
        se.scope = KernelScope::agent(agent);
        se.anchor = Anchor::agent_start();
        se.length_scale = 1.5;
        specs.push_back(se);
    }
    KernelSpec lin;
    lin.family = KernelFamily::Linear;
    lin.anchor = Anchor::goal();
    lin.offset_c = -1.0;
    specs.push_back(lin);
    return specs;
}

} // namespace

TEST_CASE("potential_shaping arithmetic") {
    CHECK(potential_shaping(0.5, 0.5, 0.99) == doctest::Approx(-0.005));
    CHECK(potential_shaping(1.23, 1.23, 1.0) == doctest::Approx(0.0));
    CHECK(potential_shaping(0.0, 1.0, 0.9) == doctest::Approx(0.9));
    CHECK_THROWS_AS(potential_shaping(0.0, 0.0, 0.0), InvalidInput);
    CHECK_THROWS_AS(potential_shaping(0.0, 0.0, 1.5), InvalidInput);
}

TEST_CASE("build_governance composes one field per owner") {
    GridEnv env(fixed_3x3(), 0);
    const GovernanceConfig gov =
        build_governance(paper_combo_specs(), env, ShapingMode::Additive, 0.99);
    REQUIRE(gov.fields.size() == 3); // agent 0, agent 1, shared
    int shared = 0, owned = 0;
    for (const RewardField& f : gov.fields) {
        if (f.shared())
            ++shared;
        else
            ++owned;
        double sum = 0.0;
        for (double v : f.values) sum += v;
        CHECK(std::abs(sum - 0.5) <= 1e-9); // AllPositive over 2 agents
    }
    CHECK(shared == 1);
    CHECK(owned == 2);
}

TEST_CASE("governed step: additive collection on entry, decay applied after") {
    GridEnvConfig cfg = fixed_3x3();
    auto base = std::make_unique<GridEnv>(cfg, 0);
    const GridEnv* base_view = base.get();

    std::vector<KernelSpec> specs = paper_combo_specs();
    for (KernelSpec& s : specs) s.decay = 0.5;
    GovernanceConfig gov = build_governance(specs, *base, ShapingMode::Additive, 0.99);
    const std::vector<RewardField> fields_copy = gov.fields;
    GovernedEnv env(std::move(base), std::move(gov));

    const int up = 0;
    const int stay = env.n_actions() - 2;

    // Agent 0 moves up into a fresh cell: collects own + shared field values.
    const std::int64_t before = base_view->state().positions[0];
    const auto r = env.step({up, stay});
    const std::int64_t entered = base_view->state().positions[0];
    REQUIRE(entered != before);

    double expected = 0.0;
    for (const RewardField& f : fields_copy)
        if (f.owner_agent == 0 || f.shared()) expected += f.values[static_cast<std::size_t>(entered)];
    CHECK(r.added[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(r.rewards[0] == doctest::Approx(expected).epsilon(1e-12)); // base is zero here
    // Agent 1 stayed: no entry, no collection.
    CHECK(r.added[1] == doctest::Approx(0.0));

    // Re-entering the same cell yields half the value (decay 0.5 per visit).
    const int down = 1;
    env.step({down, stay});
    const auto r2 = env.step({up, stay});
    CHECK(r2.added[0] == doctest::Approx(0.5 * expected).epsilon(1e-12));
}

TEST_CASE("governed step: staying collects nothing in additive mode") {
    auto base = std::make_unique<GridEnv>(fixed_3x3(), 0);
    GovernanceConfig gov = build_governance(paper_combo_specs(), *base, ShapingMode::Additive, 0.99);
    GovernedEnv env(std::move(base), std::move(gov));
    const int stay = env.n_actions() - 2;
    const auto r = env.step({stay, stay});
    CHECK(r.added[0] == 0.0);
    CHECK(r.added[1] == 0.0);
}

TEST_CASE("governed step: potential mode is gamma*phi(s') - phi(s) per agent") {
    auto base = std::make_unique<GridEnv>(fixed_3x3(), 0);
    const double gamma = 0.99;
    GovernanceConfig gov = build_governance(paper_combo_specs(), *base, ShapingMode::Potential, gamma);
    GovernedEnv env(std::move(base), std::move(gov));

    const int up = 0;
    const int stay = env.n_actions() - 2;

    const double phi0_before = env.potential(0);
    const double phi1_before = env.potential(1);
    const auto r = env.step({up, stay});
    const double phi0_after = env.potential(0);
    CHECK(r.added[0] == doctest::Approx(gamma * phi0_after - phi0_before).epsilon(1e-12));
    // A staying agent still pays the (gamma - 1) * phi drift.
    CHECK(r.added[1] == doctest::Approx(gamma * phi1_before - phi1_before).epsilon(1e-12));
}

TEST_CASE("governed step: zero field shapes nothing") {
    auto base = std::make_unique<GridEnv>(fixed_3x3(), 0);
    GovernanceConfig gov;
    gov.mode = ShapingMode::Potential;
    gov.gamma = 0.99;
    GovernedEnv env(std::move(base), std::move(gov));
    const int up = 0, stay = env.n_actions() - 2;
    const auto r = env.step({up, stay});
    CHECK(r.rewards[0] == r.base_rewards[0]);
    CHECK(r.added[0] == 0.0);
}

TEST_CASE("governance never alters dynamics") {
    GridEnvConfig cfg = fixed_3x3();
    GridEnv plain(cfg, 0);
    auto wrapped_base = std::make_unique<GridEnv>(cfg, 0);
    const GridEnv* wrapped_view = wrapped_base.get();
    GovernanceConfig gov =
        build_governance(paper_combo_specs(), *wrapped_base, ShapingMode::Additive, 0.99);
    GovernedEnv governed(std::move(wrapped_base), std::move(gov));

    Rng rng(42);
    for (int episode = 0; episode < 20; ++episode) {
        if (plain.done()) {
            plain.reset();
            governed.reset();
        }
        while (!plain.done()) {
            std::vector<int> actions{static_cast<int>(rng.uniform_int(6)),
                                     static_cast<int>(rng.uniform_int(6))};
            const auto a = plain.step(actions);
            const auto b = governed.step(actions);
            CHECK(plain.state_id() == wrapped_view->state_id());
            CHECK(a.done == b.done);
            CHECK(a.base_rewards == b.base_rewards);
        }
    }
}

TEST_CASE("governed step: domain mismatch is rejected") {
    auto base = std::make_unique<GridEnv>(fixed_3x3(), 0);
    GovernanceConfig gov;
    RewardField wrong;
    wrong.domain = DomainDescriptor::grid({5, 5});
    wrong.values.assign(25, 0.1);
    wrong.visit_decay.assign(25, 1.0);
    gov.fields.push_back(wrong);
    CHECK_THROWS_AS(GovernedEnv(std::move(base), std::move(gov)), DomainMismatch);
}

TEST_CASE("episode_added_reward separates base and added components") {
    auto base = std::make_unique<GridEnv>(fixed_3x3(), 0);
    GovernanceConfig gov = build_governance(paper_combo_specs(), *base, ShapingMode::Additive, 0.99);
    GovernedEnv env(std::move(base), std::move(gov));

    Rng rng(3);
    std::vector<StepResult> log;
    while (!env.done()) {
        std::vector<int> actions{static_cast<int>(rng.uniform_int(6)),
                                 static_cast<int>(rng.uniform_int(6))};
        log.push_back(env.step(actions));
    }
    const auto totals = episode_added_reward(log, 2);
    double check0 = 0.0;
    for (const StepResult& r : log) check0 += r.added[0];
    CHECK(totals[0] == doctest::Approx(check0));

    // An ungoverned log has no added component.
    GridEnv plain(fixed_3x3(), 0);
    std::vector<StepResult> plain_log;
    plain_log.push_back(plain.step({4, 4}));
    const auto zeros = episode_added_reward(plain_log, 2);
    CHECK(zeros[0] == 0.0);
    CHECK(zeros[1] == 0.0);
}

TEST_CASE("additive + decay 0: per-agent added total is bounded by 1/n") {
    GridEnvConfig cfg = fixed_3x3();
    auto base = std::make_unique<GridEnv>(cfg, 0);
    std::vector<KernelSpec> specs = paper_combo_specs();
    for (KernelSpec& s : specs) s.decay = 0.0; // collect each cell at most once
    GovernanceConfig gov = build_governance(specs, *base, ShapingMode::Additive, 0.99);
    GovernedEnv env(std::move(base), std::move(gov));

    Rng rng(9);
    for (int episode = 0; episode < 50; ++episode) {
        env.reset();
        std::vector<double> totals(2, 0.0);
        while (!env.done()) {
            std::vector<int> actions{static_cast<int>(rng.uniform_int(6)),
                                     static_cast<int>(rng.uniform_int(6))};
            const auto r = env.step(actions);
            totals[0] += r.added[0];
            totals[1] += r.added[1];
        }
        // Own field caps at 1/n and the shared field at 1/n across agents.
        CHECK(totals[0] + totals[1] <= 3.0 * 0.5 + 1e-9);
        CHECK(totals[0] <= 2.0 * 0.5 + 1e-9);
    }
}

TEST_CASE("additive + decay d: per-cell collection bounded by value/(1-d)") {
    auto base = std::make_unique<GridEnv>(fixed_3x3(), 0);
    KernelSpec se;
    se.family = KernelFamily::SquaredExponential;
    se.scope = KernelScope::agent(0);
    se.anchor = Anchor::agent_start();
    se.decay = 0.5;
    GovernanceConfig gov = build_governance({se}, *base, ShapingMode::Additive, 0.99);
    const RewardField field = gov.fields.front();
    GovernedEnv env(std::move(base), std::move(gov));

    // Agent 0 oscillates between two cells for the whole episode.
    const int up = 0, down = 1, stay = env.n_actions() - 2;
    std::vector<double> collected(field.values.size(), 0.0);
    auto* grid = dynamic_cast<GridEnv*>(&env.inner());
    bool forward = true;
    while (!env.done()) {
        const auto r = env.step({forward ? up : down, stay});
        const std::int64_t cell = grid->state().positions[0];
        collected[static_cast<std::size_t>(cell)] += r.added[0];
        forward = !forward;
    }
    for (std::size_t i = 0; i < collected.size(); ++i)
        CHECK(collected[i] <= field.values[i] / (1.0 - 0.5) + 1e-9);
}

TEST_CASE("potential telescoping identity over random episodes") {
    GridEnvConfig cfg = fixed_3x3();
    const double gamma = 0.97;
    auto base = std::make_unique<GridEnv>(cfg, 0);
    GovernanceConfig gov = build_governance(paper_combo_specs(), *base, ShapingMode::Potential, gamma);
    GovernedEnv env(std::move(base), std::move(gov));

    Rng rng(123);
    for (int episode = 0; episode < 200; ++episode) {
        env.reset();
        std::vector<double> phi0(2);
        for (int a = 0; a < 2; ++a) phi0[static_cast<std::size_t>(a)] = env.potential(a);

        std::vector<double> discounted(2, 0.0);
        double discount = 1.0;
        std::int64_t T = 0;
        bool delivered = false;
        while (!env.done()) {
            std::vector<int> actions{static_cast<int>(rng.uniform_int(6)),
                                     static_cast<int>(rng.uniform_int(6))};
            const auto r = env.step(actions);
            for (int a = 0; a < 2; ++a) discounted[static_cast<std::size_t>(a)] += discount * r.added[static_cast<std::size_t>(a)];
            discount *= gamma;
            T += 1;
            delivered = r.info.delivered;
        }
        // gamma^T * phi(s_T) - phi(s_0); phi of a delivered terminal is zero.
        for (int a = 0; a < 2; ++a) {
            const double phi_T = delivered ? 0.0 : env.potential(a);
            const double expected = std::pow(gamma, static_cast<double>(T)) * phi_T -
                                    phi0[static_cast<std::size_t>(a)];
            CHECK(std::abs(discounted[static_cast<std::size_t>(a)] - expected) <= 1e-9);
        }
    }
}

TEST_CASE("MORS: subtask bonuses") {
    GridEnvConfig cfg = fixed_3x3();
    MorsEnv env(std::make_unique<GridEnv>(cfg, 0));
    const int up = 0, down = 1, right = 3;
    const int stay = env.n_actions() - 2, handover = env.n_actions() - 1;

    SUBCASE("no events, no progress: shaped equals base") {
        const auto r = env.step({stay, stay});
        CHECK(r.rewards == r.base_rewards);
    }
    SUBCASE("first pickup pays 0.1; progress pays 0.02 per cell") {
        env.step({up, stay});
        const auto r = env.step({up, stay}); // picks up at (0,0); no distance change
        CHECK(r.info.first_pickup);
        CHECK(r.added[0] == doctest::Approx(MorsEnv::kPickupBonus));
        const auto r2 = env.step({right, stay}); // carries one cell toward the goal
        CHECK(r2.added[0] == doctest::Approx(MorsEnv::kProgressBonus));
    }
    SUBCASE("handover pays both participants; exchanges can be farmed") {
        env.step({up, stay});
        env.step({up, stay});
        env.step({down, stay});
        env.step({right, stay}); // agent0 at (1,1), agent1 at (1,2)
        const auto r = env.step({handover, stay});
        CHECK(r.added[0] == doctest::Approx(MorsEnv::kHandoverBonus));
        // The receiving agent stands a cell closer to the goal, so the
        // handover also counts as package progress.
        CHECK(r.added[1] == doctest::Approx(MorsEnv::kHandoverBonus + MorsEnv::kProgressBonus));
        // Handing straight back pays again: the positive reward cycle. The
        // backward move earns no progress bonus (progress is one-sided).
        const auto r2 = env.step({stay, handover});
        CHECK(r2.added[0] == doctest::Approx(MorsEnv::kHandoverBonus));
        CHECK(r2.added[1] == doctest::Approx(MorsEnv::kHandoverBonus));
    }
}

TEST_CASE("MORS rejects non-delivery environments") {
    EnumerableMdp mdp;
    mdp.n_states = 2;
    mdp.n_actions = 1;
    mdp.transitions = {{{{1, 1.0, 0.0, false}}}, {{{0, 1.0, 0.0, false}}}};
    CHECK_THROWS_AS(MorsEnv(std::make_unique<MdpEnv>(mdp, 0)), DomainMismatch);
}

TEST_CASE("value iteration: geometric series and chain oracles") {
    SUBCASE("single state self-loop") {
        EnumerableMdp mdp;
        mdp.n_states = 1;
        mdp.n_actions = 1;
        mdp.transitions = {{{{0, 1.0, 1.0, false}}}};
        const auto vi = value_iteration(mdp, 0.5, 1e-12);
        CHECK(vi.values[0] == doctest::Approx(2.0).epsilon(1e-9));
    }
    SUBCASE("two-state chain with terminal reward at gamma=1") {
        EnumerableMdp mdp;
        mdp.n_states = 2;
        mdp.n_actions = 1;
        mdp.transitions.resize(2);
        mdp.transitions[0] = {{{1, 1.0, 1.0, true}}};
        mdp.transitions[1] = {{{1, 1.0, 0.0, true}}};
        const auto vi = value_iteration(mdp, 1.0, 1e-12);
        CHECK(vi.values[0] == doctest::Approx(1.0));
    }
    SUBCASE("random MDP: Bellman residual below tolerance") {
        Rng rng(2024);
        const EnumerableMdp mdp = make_random_mdp(50, 4, 3, rng);
        const double gamma = 0.9;
        const auto vi = value_iteration(mdp, gamma, 1e-12);
        for (std::int64_t s = 0; s < mdp.n_states; ++s) {
            double best = -1e300;
            for (int a = 0; a < mdp.n_actions; ++a) {
                double q = 0.0;
                for (const MdpTransition& t : mdp.transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)])
                    q += t.prob * (t.reward + (t.terminal ? 0.0 : gamma * vi.values[static_cast<std::size_t>(t.next)]));
                best = std::max(best, q);
            }
            CHECK(std::abs(best - vi.values[static_cast<std::size_t>(s)]) <= 1e-9);
        }
    }
}

TEST_CASE("PBRS policy invariance on random MDPs") {
    Rng rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const EnumerableMdp mdp = make_random_mdp(60, 3, 2, rng);
        std::vector<double> phi(60);
        for (double& p : phi) p = rng.uniform(-1.0, 1.0);
        const double gamma = 0.93;
        const auto base = value_iteration(mdp, gamma, 1e-12);
        const auto shaped = value_iteration(shaped_mdp(mdp, phi, gamma), gamma, 1e-12);
        for (std::int64_t s = 0; s < mdp.n_states; ++s)
            CHECK(base.greedy[static_cast<std::size_t>(s)] == shaped.greedy[static_cast<std::size_t>(s)]);
    }
}

TEST_CASE("joint MDP of the fixed 3x3 delivery env") {
    const JointMdp joint = build_joint_mdp(fixed_3x3());
    CHECK(joint.mdp.n_states > 100);
    CHECK(joint.mdp.n_actions == 36);
    CHECK(joint.agent_cells.size() == static_cast<std::size_t>(joint.mdp.n_states));

    // Delivery must be reachable and optimal play must collect 2.5 total.
    const auto vi = value_iteration(joint.mdp, 0.95, 1e-10);
    CHECK(vi.values[static_cast<std::size_t>(joint.mdp.initial_state)] > 0.0);
}
