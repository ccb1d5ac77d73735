#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "govrek/env.hpp"
#include "govrek/pg.hpp"
#include "govrek/rng.hpp"

namespace govrek {

enum class Algorithm { TabularQ, PolicyGradient };
enum class Paradigm { CTCE, CTDE };

struct ExplorationSchedule {
    double eps_start = 1.0;
    double eps_end = 0.05;
    std::int64_t decay_steps = 0; // 0 -> half of the first training budget
};

struct LearnerConfig {
    Algorithm algorithm = Algorithm::TabularQ;
    Paradigm paradigm = Paradigm::CTCE;
    double gamma = 0.95;
    double learning_rate = 0.1;
    ExplorationSchedule exploration;
    double clip_ratio = 0.2;       // PG only
    std::int64_t rollout_horizon = 256;
    int hidden_width = 32;
    int pg_epochs = 4;
    std::uint64_t seed = 0;
    std::int64_t eval_every = 0;   // 0 -> max(budget/100, 500)
    int eval_episodes = 20;

    void validate() const;
};

struct CurveSample {
    std::int64_t timestep = 0;
    double avg_reward = 0.0;
    double avg_ep_len = 0.0;
    double success_rate = 0.0;
};

// Metrics of one (configuration, budget, seed) training run.
struct TrialResult {
    double avg_reward = 0.0;
    double avg_episode_length = 0.0;
    double success_rate = 0.0;
    std::int64_t steps_to_first_success = -1; // -1 encodes "never"
    std::int64_t total_timesteps = 0;
    std::uint64_t seed = 0;
    std::vector<CurveSample> curve;
};

// A trained decision rule; greedy by construction.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::vector<int> act(const MultiAgentEnv& env) const = 0;
    virtual std::string kind() const = 0;
    virtual std::unique_ptr<Policy> clone() const = 0;

    std::string to_json_string() const;
    static std::unique_ptr<Policy> from_json_string(const std::string& text);

protected:
    friend struct PolicyCodec;
};

struct EvalMetrics {
    double avg_reward = 0.0;        // per-episode mean of per-agent-mean shaped reward
    double avg_episode_length = 0.0;
    double success_rate = 0.0;
};

// Greedy rollouts on a dedicated copy of the env; deterministic given seed.
EvalMetrics evaluate(const Policy& policy, MultiAgentEnv& env, int n_episodes, std::uint64_t seed);

// Opaque resume handle: Q tables / nets plus step bookkeeping and RNG state.
struct TrainerState;

struct TrainOutcome {
    TrialResult result;
    std::unique_ptr<Policy> policy;
    std::shared_ptr<TrainerState> state;
};

// Trains for `budget` timesteps, resuming from `resume` when given. Throws
// CapacityExceeded when the joint state space does not fit tabular training.
TrainOutcome train(MultiAgentEnv& env, const LearnerConfig& config, std::int64_t budget,
                   const TrainerState* resume = nullptr);

// Instrumentation for the CTDE isolation contract: number of cross-agent
// table reads observed while training (must stay zero).
std::int64_t ctde_cross_agent_reads(const TrainerState& state);

std::vector<int> decode_joint_action(std::int64_t joint, int n_agents, int n_actions);

} // namespace govrek
