#include "govrek/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <future>

namespace govrek {

std::int64_t Bracket::consumed_budget() const {
    std::int64_t total = 0;
    for (const Rung& rung : rungs)
        total += rung.n_configs * std::max<std::int64_t>(1, std::llround(rung.budget));
    return total;
}

SearchPlan plan_rounds(std::int64_t T, int rounds, int eta) {
    if (eta < 2) throw InvalidBudget("eta must be >= 2");
    if (rounds < 1) throw InvalidBudget("at least one round is required");
    if (T < eta) throw InvalidBudget("total budget below eta");

    SearchPlan plan;
    plan.total_budget = T;
    plan.rounds = rounds;
    plan.eta = eta;

    for (int i = 1; i <= rounds; ++i)
        plan.round_budgets.push_back(T * static_cast<std::int64_t>(i) / rounds);
    std::sort(plan.round_budgets.rbegin(), plan.round_budgets.rend());
    for (std::int64_t R : plan.round_budgets)
        if (R < 1) throw InvalidBudget("a round received a zero budget; reduce rounds");

    for (std::int64_t R : plan.round_budgets) {
        const int s_max = static_cast<int>(
            std::floor(std::log(static_cast<double>(R)) / std::log(static_cast<double>(eta)) + 1e-12));
        const double B = static_cast<double>(s_max + 1) * static_cast<double>(R);
        std::vector<Bracket> round;
        for (int s = s_max; s >= 0; --s) {
            Bracket bracket;
            bracket.s = s;
            bracket.n_initial = static_cast<std::int64_t>(
                std::ceil(B / static_cast<double>(R) * std::pow(eta, s) / static_cast<double>(s + 1) - 1e-12));
            bracket.r_initial = static_cast<double>(R) * std::pow(eta, -s);
            double slack = 0.0;
            for (int j = 0; j <= s; ++j) {
                Rung rung;
                rung.n_configs = static_cast<std::int64_t>(
                    std::floor(static_cast<double>(bracket.n_initial) * std::pow(eta, -j) + 1e-12));
                rung.budget = bracket.r_initial * std::pow(eta, j);
                slack += rung.budget;
                bracket.rungs.push_back(rung);
            }
            bracket.budget_cap = B + slack;
            round.push_back(bracket);
        }
        plan.brackets.push_back(std::move(round));
    }
    return plan;
}

bool SelectionObjective::better(const ScorePoint& a, std::uint64_t id_a, const ScorePoint& b,
                                std::uint64_t id_b) const {
    if (scalarized) {
        const double sa = a.avg_reward - lambda * a.avg_episode_length / eplen_scale;
        const double sb = b.avg_reward - lambda * b.avg_episode_length / eplen_scale;
        if (sa != sb) return sa > sb;
        return id_a < id_b;
    }
    if (a.avg_reward != b.avg_reward) return a.avg_reward > b.avg_reward;
    if (a.avg_episode_length != b.avg_episode_length)
        return a.avg_episode_length < b.avg_episode_length;
    return id_a < id_b;
}

namespace {

ScorePoint latest_score(const ScoredConfig& sc) {
    if (!sc.config.history.empty()) return sc.config.history.back();
    return ScorePoint{};
}

// Latest score recorded at or below the given budget (the earliest point when
// nothing qualifies), for like-for-like comparisons across rounds.
ScorePoint score_at_or_below(const ScoredConfig& sc, std::int64_t budget) {
    ScorePoint chosen = sc.config.history.empty() ? ScorePoint{} : sc.config.history.front();
    for (const ScorePoint& p : sc.config.history)
        if (p.budget <= budget) chosen = p;
    return chosen;
}

// Failed configs sink to the bottom; otherwise the objective decides.
bool ranked_before(const ScoredConfig& a, const ScoredConfig& b, const SelectionObjective& objective) {
    if (a.failed != b.failed) return !a.failed;
    return objective.better(latest_score(a), a.config.id, latest_score(b), b.config.id);
}

// Runs trials for one rung, at most `workers` at a time. Results land in
// per-config slots, so concurrency cannot affect the later ranking.
void run_rung_trials(std::vector<ScoredConfig>& alive, std::int64_t budget_steps, int rung_index,
                     const TrainerFn& trainer, int workers) {
    auto run_one = [budget_steps, rung_index, &trainer](ScoredConfig& sc) {
        if (sc.failed) return;
        try {
            TrialOutcome out = trainer(sc.config, budget_steps, rung_index, sc.resume_state);
            sc.failed = out.failed;
            sc.metrics = out.metrics;
            sc.resume_state = out.resume_state;
            sc.policy = out.policy;
        } catch (const std::exception&) {
            sc.failed = true;
        }
    };

    if (workers < 2 || alive.size() < 2) {
        for (ScoredConfig& sc : alive) run_one(sc);
        return;
    }
    std::size_t next = 0;
    while (next < alive.size()) {
        const std::size_t batch =
            std::min<std::size_t>(static_cast<std::size_t>(workers), alive.size() - next);
        std::vector<std::future<void>> futures;
        futures.reserve(batch);
        for (std::size_t k = 0; k < batch; ++k) {
            ScoredConfig& sc = alive[next + k];
            futures.push_back(std::async(std::launch::async, [&run_one, &sc] { run_one(sc); }));
        }
        for (auto& f : futures) f.get();
        next += batch;
    }
}

} // namespace

std::vector<ScoredConfig> run_bracket(const Bracket& bracket, std::vector<ConfigRecord> population,
                                      const TrainerFn& trainer, const SelectionObjective& objective,
                                      int workers, bool fresh_retrain) {
    if (static_cast<std::int64_t>(population.size()) != bracket.n_initial)
        throw InvalidInput("population size must equal the bracket's n_gov");

    std::vector<ScoredConfig> alive;
    alive.reserve(population.size());
    for (ConfigRecord& cfg : population)
        alive.push_back(ScoredConfig{std::move(cfg), {}, nullptr, nullptr, false, -1});

    std::vector<ScoredConfig> eliminated;
    std::int64_t cumulative = 0;

    for (std::size_t j = 0; j < bracket.rungs.size(); ++j) {
        const Rung& rung = bracket.rungs[j];
        const std::int64_t budget_steps = std::max<std::int64_t>(1, std::llround(rung.budget));
        cumulative += budget_steps;

        if (fresh_retrain)
            for (ScoredConfig& sc : alive) sc.resume_state = nullptr;
        run_rung_trials(alive, budget_steps, static_cast<int>(j), trainer, workers);

        for (ScoredConfig& sc : alive) {
            sc.rung_reached = static_cast<int>(j);
            if (!sc.failed)
                sc.config.history.push_back(
                    ScorePoint{cumulative, sc.metrics.avg_reward, sc.metrics.avg_episode_length});
        }

        std::sort(alive.begin(), alive.end(), [&](const ScoredConfig& a, const ScoredConfig& b) {
            return ranked_before(a, b, objective);
        });

        if (std::all_of(alive.begin(), alive.end(), [](const ScoredConfig& sc) { return sc.failed; }))
            throw BracketExhausted("every configuration failed in rung " + std::to_string(j));

        if (j + 1 < bracket.rungs.size()) {
            const std::size_t keep =
                static_cast<std::size_t>(std::max<std::int64_t>(1, bracket.rungs[j + 1].n_configs));
            while (alive.size() > keep) {
                eliminated.push_back(std::move(alive.back()));
                alive.pop_back();
            }
        }
    }

    // Final standings: deepest-rung ranking first, eliminations after in
    // reverse elimination order.
    std::vector<ScoredConfig> standings = std::move(alive);
    for (auto it = eliminated.rbegin(); it != eliminated.rend(); ++it)
        standings.push_back(std::move(*it));
    return standings;
}

std::vector<ScoredConfig> top_configs(std::size_t t_k, std::vector<ScoredConfig> results, double m,
                                      double s_prob, const GeneticOps& genetics,
                                      const SelectionObjective& objective, Rng& rng,
                                      std::uint64_t* next_id) {
    if (results.empty()) throw InvalidInput("top_configs needs a non-empty result set");
    std::sort(results.begin(), results.end(),
              [&](const ScoredConfig& a, const ScoredConfig& b) { return ranked_before(a, b, objective); });
    if (results.size() > t_k) results.resize(t_k);

    std::vector<ScoredConfig> out = results;
    for (std::size_t i = 0; i < out.size(); ++i) {
        ScoredConfig& sc = out[i];
        const std::uint64_t original_id = sc.config.id;
        bool changed = false;

        if (rng.bernoulli(m)) {
            for (KernelSpec& spec : sc.config.specs) spec = genetics.mutate_spec(spec, rng);
            sc.config.provenance = Provenance::Mutated;
            changed = true;
        }
        if (out.size() > 1 && rng.bernoulli(s_prob)) {
            // Merge with another top config's specs; the per-owner fields get
            // superimposed when the governance is built.
            std::size_t partner = static_cast<std::size_t>(rng.uniform_int(out.size() - 1));
            if (partner >= i) partner += 1;
            const std::vector<KernelSpec>& extra = results[partner].config.specs;
            sc.config.specs.insert(sc.config.specs.end(), extra.begin(), extra.end());
            sc.config.provenance = Provenance::Superimposed;
            changed = true;
        }
        if (changed) {
            sc.config.id = (*next_id)++;
            sc.config.parent_id = original_id;
            sc.config.history.clear();
            sc.resume_state = nullptr; // children retrain from scratch
            sc.policy = nullptr;
            sc.metrics = TrialResult{};
            sc.failed = false;
            sc.rung_reached = -1;
        }
    }
    return out;
}

const ScoredConfig& select_with_fallback(const ScoredConfig& parent, const ScoredConfig& child,
                                         const SelectionObjective& objective) {
    const ScorePoint ps = latest_score(parent);
    const ScorePoint cs = latest_score(child);
    // Strict improvement required; exact ties keep the parent.
    if (cs.avg_reward == ps.avg_reward && cs.avg_episode_length == ps.avg_episode_length) return parent;
    return objective.better(cs, child.config.id, ps, parent.config.id) ? child : parent;
}

SearchResult run_gov_rek(const SearchOptions& options, const GeneticOps& genetics,
                         const TrainerFn& trainer) {
    SearchResult result;
    result.plan = plan_rounds(options.total_budget, options.rounds, options.eta);

    Rng rng(derive_seed(options.seed, {0x736368ULL}));
    std::uint64_t next_id = 1;

    std::vector<ScoredConfig> carried;     // winners seeding the next round
    std::vector<ScoredConfig> global_pool; // best configs seen so far

    for (std::size_t round = 0; round < result.plan.brackets.size(); ++round) {
        std::vector<ScoredConfig> round_pool;

        for (const Bracket& bracket : result.plan.brackets[round]) {
            // Population: genetic children of earlier winners, then fresh
            // samples up to n_gov. Children retrain inside the new bracket.
            std::vector<ConfigRecord> population;
            if (!carried.empty()) {
                std::vector<ScoredConfig> children =
                    top_configs(static_cast<std::size_t>(bracket.n_initial), carried,
                                options.mutation_prob, options.superimpose_prob, genetics,
                                options.objective, rng, &next_id);
                for (ScoredConfig& child : children) {
                    if (static_cast<std::int64_t>(population.size()) >= bracket.n_initial) break;
                    ConfigRecord cfg = child.config;
                    cfg.history.clear();
                    population.push_back(std::move(cfg));
                }
            }
            while (static_cast<std::int64_t>(population.size()) < bracket.n_initial) {
                ConfigRecord cfg;
                cfg.id = next_id++;
                cfg.specs = genetics.sample_config(rng);
                population.push_back(std::move(cfg));
            }

            std::vector<ScoredConfig> standings =
                run_bracket(bracket, std::move(population), trainer, options.objective,
                            options.workers, options.fresh_retrain);
            for (ScoredConfig& sc : standings) {
                result.all_trials.push_back(sc);
                round_pool.push_back(std::move(sc));
            }
        }

        // Parent fallback: a child that does not strictly beat its parent at a
        // comparable budget is dropped in favour of the parent.
        std::vector<ScoredConfig> accepted;
        for (ScoredConfig& sc : round_pool) {
            if (sc.failed) continue;
            bool keep_child = true;
            if (sc.config.parent_id) {
                const auto parent_it =
                    std::find_if(global_pool.begin(), global_pool.end(), [&](const ScoredConfig& p) {
                        return p.config.id == *sc.config.parent_id;
                    });
                if (parent_it != global_pool.end()) {
                    const std::int64_t at = latest_score(sc).budget;
                    ScoredConfig parent_view = *parent_it;
                    if (!parent_view.config.history.empty())
                        parent_view.config.history = {score_at_or_below(*parent_it, at)};
                    const ScoredConfig& chosen = select_with_fallback(parent_view, sc, options.objective);
                    FallbackDecision decision;
                    decision.parent_id = parent_it->config.id;
                    decision.child_id = sc.config.id;
                    decision.budget = at;
                    decision.parent_reward = latest_score(parent_view).avg_reward;
                    decision.child_reward = latest_score(sc).avg_reward;
                    decision.accepted_child = &chosen == &sc;
                    result.fallbacks.push_back(decision);
                    keep_child = decision.accepted_child;
                }
            }
            if (keep_child) accepted.push_back(sc);
        }

        for (ScoredConfig& sc : accepted) global_pool.push_back(std::move(sc));
        std::sort(global_pool.begin(), global_pool.end(),
                  [&](const ScoredConfig& a, const ScoredConfig& b) {
                      return ranked_before(a, b, options.objective);
                  });
        if (global_pool.size() > options.top_k * 4) global_pool.resize(options.top_k * 4);

        carried.clear();
        for (const ScoredConfig& sc : global_pool) {
            if (carried.size() >= options.top_k) break;
            if (!sc.failed) carried.push_back(sc);
        }
    }

    for (const ScoredConfig& sc : global_pool) {
        if (result.global_top.size() >= options.top_k) break;
        result.global_top.push_back(sc);
    }
    if (result.global_top.empty()) throw BracketExhausted("search produced no surviving configuration");
    return result;
}

} // namespace govrek
