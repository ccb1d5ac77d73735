#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "govrek/kernel.hpp"
#include "govrek/learner.hpp"
#include "govrek/rng.hpp"

namespace govrek {

// One elimination stage of a Successive-Halving bracket.
struct Rung {
    std::int64_t n_configs = 0; // floor(n_gov * eta^-j)
    double budget = 0.0;        // r_gov * eta^j, per surviving config
};

struct Bracket {
    int s = 0;
    std::int64_t n_initial = 0; // ceil((B/R) * eta^s / (s+1))
    double r_initial = 0.0;     // R * eta^-s
    std::vector<Rung> rungs;    // j = 0..s
    // Exact consumption bound: B plus the slack the outer ceil can add
    // (at most one extra config per rung).
    double budget_cap = 0.0;

    std::int64_t consumed_budget() const; // sum over rungs of n_j * round(r_j)
};

// The repeated-Hyperband bookkeeping for one search.
struct SearchPlan {
    std::int64_t total_budget = 0; // T
    int rounds = 0;                // N_r
    int eta = 0;
    std::vector<std::int64_t> round_budgets;     // descending R per round
    std::vector<std::vector<Bracket>> brackets;  // per round, s = s_max..0
};

SearchPlan plan_rounds(std::int64_t T, int rounds, int eta);

enum class Provenance { Sampled, Mutated, Superimposed };

struct ScorePoint {
    std::int64_t budget = 0; // cumulative training steps when scored
    double avg_reward = 0.0;
    double avg_episode_length = 0.0;
};

// One kernel configuration under search. The scheduler treats the spec list
// as an opaque payload; only the injected genetic hooks look inside.
struct ConfigRecord {
    std::uint64_t id = 0;
    std::vector<KernelSpec> specs;
    std::optional<std::uint64_t> parent_id;
    Provenance provenance = Provenance::Sampled;
    std::vector<ScorePoint> history;
};

// Deterministic total order: avg_reward desc, avg_episode_length asc, id asc.
// The scalarized alternative ranks by reward - lambda * eplen / eplen_scale.
struct SelectionObjective {
    bool scalarized = false;
    double lambda = 0.1;
    double eplen_scale = 1.0;

    bool better(const ScorePoint& a, std::uint64_t id_a, const ScorePoint& b, std::uint64_t id_b) const;
};

struct TrialOutcome {
    TrialResult metrics;
    std::shared_ptr<void> resume_state; // opaque trainer state
    std::shared_ptr<const Policy> policy;
    bool failed = false;
};

// Trains one config for `budget` additional steps, resuming from the given
// state when present. Must be safe to call concurrently for distinct configs.
using TrainerFn = std::function<TrialOutcome(const ConfigRecord& config, std::int64_t budget,
                                             int rung_index, std::shared_ptr<void> resume_state)>;

// Genetic hooks; the scheduler applies the m / s probabilities itself.
struct GeneticOps {
    std::function<std::vector<KernelSpec>(Rng&)> sample_config; // fresh spec set
    std::function<KernelSpec(const KernelSpec&, Rng&)> mutate_spec;
};

struct ScoredConfig {
    ConfigRecord config;
    TrialResult metrics;
    std::shared_ptr<void> resume_state;
    std::shared_ptr<const Policy> policy;
    bool failed = false;
    int rung_reached = -1;
};

// Runs one SH bracket: trains every survivor per rung (resuming from the
// previous rung's state unless fresh_retrain), prunes to floor(n * eta^-j),
// and returns all participants (deepest-rung ranking first, eliminations
// after). Throws BracketExhausted when every config failed.
std::vector<ScoredConfig> run_bracket(const Bracket& bracket, std::vector<ConfigRecord> population,
                                      const TrainerFn& trainer, const SelectionObjective& objective,
                                      int workers = 1, bool fresh_retrain = false);

// Ranks, keeps the top t_k, and independently mutates (probability m) and
// superimposes (probability s_prob) each kept config. Children get fresh ids
// and carry their parent's id.
std::vector<ScoredConfig> top_configs(std::size_t t_k, std::vector<ScoredConfig> results, double m,
                                      double s_prob, const GeneticOps& genetics,
                                      const SelectionObjective& objective, Rng& rng,
                                      std::uint64_t* next_id);

// Child replaces parent only on strict objective improvement.
const ScoredConfig& select_with_fallback(const ScoredConfig& parent, const ScoredConfig& child,
                                         const SelectionObjective& objective);

struct FallbackDecision {
    std::uint64_t parent_id = 0;
    std::uint64_t child_id = 0;
    std::int64_t budget = 0; // comparison budget
    double parent_reward = 0.0;
    double child_reward = 0.0;
    bool accepted_child = false;
};

struct SearchResult {
    SearchPlan plan;
    std::vector<ScoredConfig> global_top;
    std::vector<FallbackDecision> fallbacks;
    std::vector<ScoredConfig> all_trials; // every scored config, audit trail
};

struct SearchOptions {
    std::int64_t total_budget = 81; // in budget units
    int rounds = 1;
    int eta = 3;
    std::size_t top_k = 4;
    double mutation_prob = 0.5;
    double superimpose_prob = 0.5;
    std::uint64_t seed = 0;
    int workers = 1;
    SelectionObjective objective;
    // Training timesteps per budget unit. The bracket arithmetic runs in
    // units; trainers receive unit * steps_per_unit timesteps.
    std::int64_t steps_per_unit = 1;
    // Retrain each rung from scratch instead of resuming the previous rung.
    bool fresh_retrain = false;
};

// Repeated Hyperband rounds over kernel configurations; later rounds seed
// their brackets from the mutated/superimposed winners of earlier rounds plus
// fresh samples, with parent fallback on regression.
SearchResult run_gov_rek(const SearchOptions& options, const GeneticOps& genetics,
                         const TrainerFn& trainer);

} // namespace govrek
