#pragma once

#include <cstdint>
#include <vector>

#include "govrek/env.hpp"

namespace govrek {

enum class PayoffProfile { Homogeneous, Heterogeneous };
enum class PayoffSparsity { Baseline, Sparse };

// Flattening of the joint action space for joint-action kernels.
enum class JointIndexMode { Lexicographic, CooperatorCount };

// N-player social dilemma (static game). Actions: 0 = Defect, 1 = Cooperate.
struct DilemmaConfig {
    int n_agents = 16;
    std::int64_t episode_len = 16;
    PayoffProfile profile = PayoffProfile::Homogeneous;
    PayoffSparsity sparsity = PayoffSparsity::Sparse;
    std::vector<double> max_rewards; // r_i per agent; empty -> derived from profile
    double temptation = 0.5;         // defector fraction of r_i in the baseline payoff
    JointIndexMode index_mode = JointIndexMode::Lexicographic;

    DilemmaConfig resolved() const;
    std::int64_t joint_space_size() const;
};

// Per-step payoff. Baseline: cooperators earn r_i * k/N, defectors t * r_i.
// Sparse: everyone earns r_i iff all N cooperate, otherwise nothing.
std::vector<double> dilemma_step(const DilemmaConfig& config, const std::vector<int>& joint_action);

// Flattened joint-action index: lexicographic with agent 0 most significant,
// or the cooperator count in the alternative mode.
std::int64_t flatten_joint_action(const std::vector<int>& joint_action, const DilemmaConfig& config);

class DilemmaEnv final : public MultiAgentEnv {
public:
    explicit DilemmaEnv(DilemmaConfig config, std::uint64_t seed = 0);

    int n_agents() const override { return config_.n_agents; }
    int n_actions() const override { return 2; }
    std::int64_t max_episode_len() const override { return config_.episode_len; }

    void seed(std::uint64_t) override {}
    void reset() override;
    StepResult step(const std::vector<int>& actions) override;
    bool done() const override { return done_; }

    std::uint64_t state_id() const override { return static_cast<std::uint64_t>(step_count_); }
    std::uint64_t state_space_size() const override {
        return static_cast<std::uint64_t>(config_.episode_len) + 1;
    }
    std::uint64_t obs_id(int agent) const override;
    std::uint64_t obs_space_size() const override;

    DomainDescriptor field_domain() const override {
        return DomainDescriptor::joint_action(config_.joint_space_size());
    }
    std::int64_t reward_cell(int) const override { return last_joint_index_; }
    bool always_enters() const override { return true; }
    AnchorContext anchor_context() const override;
    bool last_step_success(const StepResult& r) const override;

    void note_observed_rewards(const std::vector<double>& rewards) override;

    std::unique_ptr<MultiAgentEnv> clone() const override;

    const DilemmaConfig& config() const { return config_; }

private:
    DilemmaConfig config_;
    std::int64_t step_count_ = 0;
    bool done_ = false;
    std::int64_t last_joint_index_ = -1;
    std::vector<int> prev_actions_;    // -1 before the first step
    std::vector<int> prev_reward_sign_; // 0 neg, 1 zero, 2 pos
};

} // namespace govrek
