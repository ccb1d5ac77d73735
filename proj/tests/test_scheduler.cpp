#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "govrek/scheduler.hpp"

using namespace govrek;

namespace {

// Stub trainer whose score equals the config id; deterministic, never fails.
TrainerFn id_score_trainer() {
    return [](const ConfigRecord& config, std::int64_t, int, std::shared_ptr<void>) {
        TrialOutcome out;
        out.metrics.avg_reward = static_cast<double>(config.id);
        out.metrics.avg_episode_length = 10.0;
        return out;
    };
}

GeneticOps null_genetics() {
    GeneticOps ops;
    ops.sample_config = [](Rng&) {
        KernelSpec spec;
        return std::vector<KernelSpec>{spec};
    };
    ops.mutate_spec = [](const KernelSpec& spec, Rng& rng) {
        KernelSpec out = spec;
        out.sigma = spec.sigma * rng.uniform(0.5, 2.0);
        return out;
    };
    return ops;
}

std::vector<ConfigRecord> make_population(std::int64_t n) {
    std::vector<ConfigRecord> population;
    for (std::int64_t i = 0; i < n; ++i) {
        ConfigRecord cfg;
        cfg.id = static_cast<std::uint64_t>(i + 1);
        cfg.specs = {KernelSpec{}};
        population.push_back(cfg);
    }
    return population;
}

} // namespace

TEST_CASE("plan_rounds: round budgets follow the reverse-sorted schedule") {
    const SearchPlan plan = plan_rounds(81, 3, 3);
    CHECK(plan.round_budgets == std::vector<std::int64_t>{81, 54, 27});
    CHECK(plan.brackets.size() == 3);
    CHECK_THROWS_AS(plan_rounds(2, 1, 3), InvalidBudget);
    CHECK_THROWS_AS(plan_rounds(81, 0, 3), InvalidBudget);
    CHECK_THROWS_AS(plan_rounds(81, 3, 1), InvalidBudget);
}

TEST_CASE("plan_rounds: bracket geometry for R=27, eta=3") {
    const SearchPlan plan = plan_rounds(27, 1, 3);
    REQUIRE(plan.brackets.size() == 1);
    const auto& round = plan.brackets[0];
    REQUIRE(round.size() == 4); // s = 3, 2, 1, 0

    const std::vector<std::tuple<int, std::int64_t, double>> expected{
        {3, 27, 1.0}, {2, 12, 3.0}, {1, 6, 9.0}, {0, 4, 27.0}};
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(round[i].s == std::get<0>(expected[i]));
        CHECK(round[i].n_initial == std::get<1>(expected[i]));
        CHECK(round[i].r_initial == doctest::Approx(std::get<2>(expected[i])));
    }

    // Inner rungs of the s=2 bracket: (12,3), (4,9), (1,27).
    const Bracket& b2 = round[1];
    REQUIRE(b2.rungs.size() == 3);
    CHECK(b2.rungs[0].n_configs == 12);
    CHECK(b2.rungs[0].budget == doctest::Approx(3.0));
    CHECK(b2.rungs[1].n_configs == 4);
    CHECK(b2.rungs[1].budget == doctest::Approx(9.0));
    CHECK(b2.rungs[2].n_configs == 1);
    CHECK(b2.rungs[2].budget == doctest::Approx(27.0));
}

TEST_CASE("plan_rounds: budget accounting bound per bracket") {
    for (std::int64_t T : {27, 81, 100, 250}) {
        const SearchPlan plan = plan_rounds(T, 2, 3);
        for (const auto& round : plan.brackets) {
            for (const Bracket& bracket : round) {
                // Monotone pruning and the exact-eta budget growth.
                for (std::size_t j = 0; j + 1 < bracket.rungs.size(); ++j) {
                    CHECK(bracket.rungs[j + 1].budget ==
                          doctest::Approx(bracket.rungs[j].budget * 3.0));
                    if (bracket.rungs[j].n_configs > 1)
                        CHECK(bracket.rungs[j + 1].n_configs < bracket.rungs[j].n_configs);
                }
                CHECK(static_cast<double>(bracket.consumed_budget()) <=
                      bracket.budget_cap + 1e-9);
            }
        }
    }
}

TEST_CASE("run_bracket: survivors shrink per rung and ranking follows the stub scores") {
    const SearchPlan plan = plan_rounds(27, 1, 3);
    const Bracket& bracket = plan.brackets[0][2]; // s=1: rungs (6,9), (2,27)
    REQUIRE(bracket.n_initial == 6);

    const auto standings =
        run_bracket(bracket, make_population(6), id_score_trainer(), SelectionObjective{});
    REQUIRE(standings.size() == 6);
    // Highest ids survive; rung 1 trains exactly 2 configs.
    CHECK(standings[0].config.id == 6);
    CHECK(standings[1].config.id == 5);
    CHECK(standings[0].rung_reached == 1);
    CHECK(standings[1].rung_reached == 1);
    for (std::size_t i = 2; i < 6; ++i) CHECK(standings[i].rung_reached == 0);

    // Score history carries cumulative budgets 9 then 9+27.
    REQUIRE(standings[0].config.history.size() == 2);
    CHECK(standings[0].config.history[0].budget == 9);
    CHECK(standings[0].config.history[1].budget == 36);
}

TEST_CASE("run_bracket: population size precondition and total failure") {
    const SearchPlan plan = plan_rounds(27, 1, 3);
    const Bracket& bracket = plan.brackets[0][2];
    CHECK_THROWS_AS(
        run_bracket(bracket, make_population(3), id_score_trainer(), SelectionObjective{}),
        InvalidInput);

    TrainerFn failing = [](const ConfigRecord&, std::int64_t, int, std::shared_ptr<void>) -> TrialOutcome {
        throw std::runtime_error("trainer exploded");
    };
    CHECK_THROWS_AS(run_bracket(bracket, make_population(6), failing, SelectionObjective{}),
                    BracketExhausted);
}

TEST_CASE("run_bracket: a single failing config is ranked last, bracket continues") {
    const SearchPlan plan = plan_rounds(27, 1, 3);
    const Bracket& bracket = plan.brackets[0][2];
    TrainerFn trainer = [](const ConfigRecord& config, std::int64_t, int,
                           std::shared_ptr<void>) -> TrialOutcome {
        if (config.id == 6) throw std::runtime_error("boom");
        TrialOutcome out;
        out.metrics.avg_reward = static_cast<double>(config.id);
        return out;
    };
    const auto standings = run_bracket(bracket, make_population(6), trainer, SelectionObjective{});
    CHECK(standings.back().failed);
    CHECK(standings.back().config.id == 6);
    CHECK(standings[0].config.id == 5);
}

TEST_CASE("run_bracket: worker count does not change the outcome") {
    const SearchPlan plan = plan_rounds(27, 1, 3);
    const Bracket& bracket = plan.brackets[0][1]; // n=12
    const auto seq =
        run_bracket(bracket, make_population(12), id_score_trainer(), SelectionObjective{}, 1);
    const auto par =
        run_bracket(bracket, make_population(12), id_score_trainer(), SelectionObjective{}, 4);
    REQUIRE(seq.size() == par.size());
    for (std::size_t i = 0; i < seq.size(); ++i) CHECK(seq[i].config.id == par[i].config.id);
}

TEST_CASE("selection objective: lexicographic order with id tiebreak") {
    const SelectionObjective obj;
    ScorePoint hi{0, 1.0, 20.0}, lo{0, 0.5, 5.0};
    CHECK(obj.better(hi, 1, lo, 2));       // reward first
    ScorePoint shorter{0, 1.0, 10.0};
    CHECK(obj.better(shorter, 3, hi, 1));  // episode length second
    CHECK(obj.better(hi, 1, hi, 2));       // id last
    CHECK_FALSE(obj.better(hi, 2, hi, 1));
}

TEST_CASE("top_configs: no genetic ops returns the top verbatim") {
    Rng rng(1);
    std::uint64_t next_id = 100;
    std::vector<ScoredConfig> results;
    for (std::uint64_t id : {1, 2, 3, 4, 5}) {
        ScoredConfig sc;
        sc.config.id = id;
        sc.config.specs = {KernelSpec{}};
        sc.config.history = {{10, static_cast<double>(id), 5.0}};
        results.push_back(sc);
    }
    const auto top = top_configs(3, results, 0.0, 0.0, null_genetics(), SelectionObjective{}, rng,
                                 &next_id);
    REQUIRE(top.size() == 3);
    CHECK(top[0].config.id == 5);
    CHECK(top[1].config.id == 4);
    CHECK(top[2].config.id == 3);
    CHECK(next_id == 100); // nothing minted

    // t_k larger than the result count: everything returned, no padding.
    const auto all = top_configs(99, results, 0.0, 0.0, null_genetics(), SelectionObjective{}, rng,
                                 &next_id);
    CHECK(all.size() == 5);
}

TEST_CASE("top_configs: m=1 makes every output a mutated child with lineage") {
    Rng rng(9);
    std::uint64_t next_id = 100;
    std::vector<ScoredConfig> results;
    for (std::uint64_t id : {1, 2, 3}) {
        ScoredConfig sc;
        sc.config.id = id;
        sc.config.specs = {KernelSpec{}};
        sc.config.history = {{10, static_cast<double>(id), 5.0}};
        results.push_back(sc);
    }
    const auto top =
        top_configs(3, results, 1.0, 0.0, null_genetics(), SelectionObjective{}, rng, &next_id);
    for (const ScoredConfig& sc : top) {
        CHECK(sc.config.provenance == Provenance::Mutated);
        REQUIRE(sc.config.parent_id.has_value());
        CHECK(sc.config.id >= 100);
        CHECK(sc.config.history.empty());
    }
}

TEST_CASE("top_configs: superimposition concatenates a partner's specs") {
    Rng rng(4);
    std::uint64_t next_id = 50;
    std::vector<ScoredConfig> results;
    for (std::uint64_t id : {1, 2}) {
        ScoredConfig sc;
        sc.config.id = id;
        sc.config.specs = {KernelSpec{}};
        sc.config.history = {{10, static_cast<double>(id), 5.0}};
        results.push_back(sc);
    }
    const auto top =
        top_configs(2, results, 0.0, 1.0, null_genetics(), SelectionObjective{}, rng, &next_id);
    for (const ScoredConfig& sc : top) {
        CHECK(sc.config.provenance == Provenance::Superimposed);
        CHECK(sc.config.specs.size() == 2);
        CHECK(sc.config.parent_id.has_value());
    }
}

TEST_CASE("select_with_fallback: strict improvement required") {
    auto scored = [](std::uint64_t id, double reward, double eplen) {
        ScoredConfig sc;
        sc.config.id = id;
        sc.config.history = {{100, reward, eplen}};
        return sc;
    };
    const SelectionObjective obj;

    const ScoredConfig parent = scored(1, 1.0, 10.0);
    const ScoredConfig worse = scored(2, 0.5, 10.0);
    const ScoredConfig tie = scored(3, 1.0, 10.0);
    const ScoredConfig better = scored(4, 1.5, 10.0);

    CHECK(select_with_fallback(parent, worse, obj).config.id == 1);
    CHECK(select_with_fallback(parent, tie, obj).config.id == 1);
    CHECK(select_with_fallback(parent, better, obj).config.id == 4);
}

TEST_CASE("run_gov_rek: single round reduces to successive halving, deterministic") {
    SearchOptions options;
    options.total_budget = 27;
    options.rounds = 1;
    options.eta = 3;
    options.top_k = 4;
    options.mutation_prob = 0.0;
    options.superimpose_prob = 0.0;
    options.seed = 17;

    const SearchResult a = run_gov_rek(options, null_genetics(), id_score_trainer());
    const SearchResult b = run_gov_rek(options, null_genetics(), id_score_trainer());
    REQUIRE(!a.global_top.empty());
    REQUIRE(a.global_top.size() == b.global_top.size());
    for (std::size_t i = 0; i < a.global_top.size(); ++i) {
        CHECK(a.global_top[i].config.id == b.global_top[i].config.id);
        CHECK(a.global_top[i].metrics.avg_reward == b.global_top[i].metrics.avg_reward);
    }
    // With the id-scoring stub the best sampled id must win.
    std::uint64_t max_id = 0;
    for (const ScoredConfig& sc : a.all_trials) max_id = std::max(max_id, sc.config.id);
    CHECK(a.global_top[0].config.id == max_id);
}

TEST_CASE("run_gov_rek: later rounds seed children and fallback blocks regressions") {
    SearchOptions options;
    options.total_budget = 27;
    options.rounds = 3;
    options.eta = 3;
    options.top_k = 3;
    options.mutation_prob = 1.0;
    options.superimpose_prob = 0.5;
    options.seed = 5;

    // Children always score worse than their parents (higher ids get lower
    // scores here), so fallback must keep the round-one winners on top.
    TrainerFn decreasing = [](const ConfigRecord& config, std::int64_t, int,
                              std::shared_ptr<void>) {
        TrialOutcome out;
        out.metrics.avg_reward = 1000.0 - static_cast<double>(config.id);
        out.metrics.avg_episode_length = 10.0;
        return out;
    };

    const SearchResult result = run_gov_rek(options, null_genetics(), decreasing);
    CHECK(!result.fallbacks.empty());
    for (const FallbackDecision& d : result.fallbacks) {
        CHECK_FALSE(d.accepted_child); // every child regressed
        CHECK(d.child_reward < d.parent_reward);
    }
    // Winner lineage contains no accepted regression.
    for (const ScoredConfig& sc : result.global_top) {
        if (!sc.config.parent_id) continue;
        for (const FallbackDecision& d : result.fallbacks)
            if (d.child_id == sc.config.id) CHECK(d.accepted_child);
    }
    // The global winner is the best config of the big first round.
    CHECK(result.global_top[0].metrics.avg_reward == doctest::Approx(999.0));
}

TEST_CASE("run_gov_rek: the scheduler treats configs as opaque payloads") {
    // Specs with out-of-range values would throw in any kernel-aware code
    // path; the scheduler must pass them through untouched.
    GeneticOps opaque;
    opaque.sample_config = [](Rng&) {
        KernelSpec weird;
        weird.sigma = -123.0; // invalid on purpose; never validated by the scheduler
        return std::vector<KernelSpec>{weird};
    };
    opaque.mutate_spec = [](const KernelSpec& spec, Rng&) { return spec; };

    SearchOptions options;
    options.total_budget = 9;
    options.rounds = 1;
    options.eta = 3;
    options.top_k = 2;
    options.mutation_prob = 0.0;
    options.superimpose_prob = 0.0;

    int observed = 0;
    TrainerFn trainer = [&observed](const ConfigRecord& config, std::int64_t, int,
                                    std::shared_ptr<void>) {
        if (config.specs[0].sigma == -123.0) ++observed;
        TrialOutcome out;
        out.metrics.avg_reward = static_cast<double>(config.id);
        return out;
    };
    const SearchResult result = run_gov_rek(options, opaque, trainer);
    CHECK(observed > 0);
    CHECK(!result.global_top.empty());
}

TEST_CASE("run_gov_rek: resume state flows rung to rung") {
    // The trainer counts rung invocations per config via the resume pointer.
    TrainerFn counting = [](const ConfigRecord&, std::int64_t, int rung,
                            std::shared_ptr<void> resume) {
        auto count = resume ? std::static_pointer_cast<int>(resume) : std::make_shared<int>(0);
        *count += 1;
        TrialOutcome out;
        out.metrics.avg_reward = static_cast<double>(*count);
        out.resume_state = count;
        (void)rung;
        return out;
    };
    SearchOptions options;
    options.total_budget = 9; // s_max = 2: brackets s=2 (3 rungs), s=1, s=0
    options.rounds = 1;
    options.eta = 3;
    options.top_k = 1;
    options.mutation_prob = 0.0;
    options.superimpose_prob = 0.0;

    const SearchResult result = run_gov_rek(options, null_genetics(), counting);
    // The deepest surviving config of the s=2 bracket saw all 3 rungs.
    double max_count = 0.0;
    for (const ScoredConfig& sc : result.all_trials)
        max_count = std::max(max_count, sc.metrics.avg_reward);
    CHECK(max_count == doctest::Approx(3.0));
}
