#include "govrek/dilemma.hpp"

#include <algorithm>

namespace govrek {

DilemmaConfig DilemmaConfig::resolved() const {
    DilemmaConfig c = *this;
    if (c.n_agents < 2) throw ConfigError("dilemma needs at least 2 agents");
    if (c.n_agents > 62 && c.index_mode == JointIndexMode::Lexicographic)
        throw ConfigError("lexicographic joint index overflows past 62 agents");
    if (c.episode_len < 1) throw ConfigError("episode_len must be >= 1");
    if (c.temptation < 0.0) throw ConfigError("temptation must be >= 0");
    if (c.max_rewards.empty()) {
        c.max_rewards.resize(static_cast<std::size_t>(c.n_agents));
        for (int i = 0; i < c.n_agents; ++i)
            c.max_rewards[static_cast<std::size_t>(i)] =
                c.profile == PayoffProfile::Homogeneous ? 1.0 : (i % 2 == 0 ? 1.0 : 2.0);
    }
    if (static_cast<int>(c.max_rewards.size()) != c.n_agents)
        throw ConfigError("max_rewards must list one value per agent");
    return c;
}

std::int64_t DilemmaConfig::joint_space_size() const {
    if (index_mode == JointIndexMode::CooperatorCount) return n_agents + 1;
    return std::int64_t{1} << n_agents;
}

std::vector<double> dilemma_step(const DilemmaConfig& config, const std::vector<int>& joint_action) {
    if (static_cast<int>(joint_action.size()) != config.n_agents)
        throw InvalidInput("one action per agent required");
    int cooperators = 0;
    for (int a : joint_action) {
        if (a != 0 && a != 1) throw InvalidInput("dilemma actions are 0 (defect) or 1 (cooperate)");
        cooperators += a;
    }

    std::vector<double> rewards(static_cast<std::size_t>(config.n_agents), 0.0);
    if (config.sparsity == PayoffSparsity::Sparse) {
        if (cooperators == config.n_agents)
            for (int i = 0; i < config.n_agents; ++i)
                rewards[static_cast<std::size_t>(i)] = config.max_rewards[static_cast<std::size_t>(i)];
        return rewards;
    }

    const double frac = static_cast<double>(cooperators) / static_cast<double>(config.n_agents);
    for (int i = 0; i < config.n_agents; ++i) {
        const double r = config.max_rewards[static_cast<std::size_t>(i)];
        rewards[static_cast<std::size_t>(i)] =
            joint_action[static_cast<std::size_t>(i)] == 1 ? r * frac : config.temptation * r;
    }
    return rewards;
}

std::int64_t flatten_joint_action(const std::vector<int>& joint_action, const DilemmaConfig& config) {
    if (static_cast<int>(joint_action.size()) != config.n_agents)
        throw InvalidInput("one action per agent required");
    if (config.index_mode == JointIndexMode::CooperatorCount) {
        std::int64_t k = 0;
        for (int a : joint_action) k += a;
        return k;
    }
    std::int64_t index = 0;
    for (int a : joint_action) index = index * 2 + a;
    return index;
}

DilemmaEnv::DilemmaEnv(DilemmaConfig config, std::uint64_t seed)
    : config_(config.resolved()) {
    (void)seed; // the game itself is deterministic
    reset();
}

void DilemmaEnv::reset() {
    step_count_ = 0;
    done_ = false;
    last_joint_index_ = -1;
    prev_actions_.assign(static_cast<std::size_t>(config_.n_agents), -1);
    prev_reward_sign_.assign(static_cast<std::size_t>(config_.n_agents), 1);
}

StepResult DilemmaEnv::step(const std::vector<int>& actions) {
    if (done_) throw EpisodeFinished("step() on a finished episode");
    StepResult result;
    result.rewards = dilemma_step(config_, actions);
    result.base_rewards = result.rewards;
    last_joint_index_ = flatten_joint_action(actions, config_);
    prev_actions_ = actions;
    note_observed_rewards(result.rewards);
    step_count_ += 1;
    if (step_count_ >= config_.episode_len) {
        done_ = true;
        result.info.timeout = true;
    }
    result.done = done_;
    return result;
}

void DilemmaEnv::note_observed_rewards(const std::vector<double>& rewards) {
    constexpr double eps = 1e-15;
    for (int i = 0; i < config_.n_agents; ++i) {
        const double r = rewards[static_cast<std::size_t>(i)];
        prev_reward_sign_[static_cast<std::size_t>(i)] = r > eps ? 2 : (r < -eps ? 0 : 1);
    }
}

std::uint64_t DilemmaEnv::obs_id(int agent) const {
    // (step index, own previous action, own previous reward sign)
    const std::uint64_t pa =
        static_cast<std::uint64_t>(prev_actions_[static_cast<std::size_t>(agent)] + 1); // -1,0,1 -> 0,1,2
    const std::uint64_t rs = static_cast<std::uint64_t>(prev_reward_sign_[static_cast<std::size_t>(agent)]);
    return (static_cast<std::uint64_t>(step_count_) * 3 + pa) * 3 + rs;
}

std::uint64_t DilemmaEnv::obs_space_size() const {
    return (static_cast<std::uint64_t>(config_.episode_len) + 1) * 9;
}

AnchorContext DilemmaEnv::anchor_context() const {
    AnchorContext ctx;
    // The "goal" of a joint-action domain is the full-cooperation corner.
    ctx.goal = Point(static_cast<double>(config_.joint_space_size() - 1));
    return ctx;
}

bool DilemmaEnv::last_step_success(const StepResult& r) const {
    for (double b : r.base_rewards)
        if (b > 0.0) return true;
    return false;
}

std::unique_ptr<MultiAgentEnv> DilemmaEnv::clone() const {
    return std::make_unique<DilemmaEnv>(*this);
}

} // namespace govrek
