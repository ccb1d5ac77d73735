#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "govrek/env.hpp"
#include "govrek/kernel.hpp"

namespace govrek {

enum class ShapingMode { Additive, Potential };

// The composed reward fields injected between the agents and the environment.
struct GovernanceConfig {
    std::vector<RewardField> fields; // at most one per owner (agent or shared)
    ShapingMode mode = ShapingMode::Additive;
    double gamma = 0.99;
};

// F(s, s') = gamma * phi(s') - phi(s), the policy-invariant shaping form.
inline double potential_shaping(double phi_s, double phi_s_next, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must be in (0, 1]");
    return gamma * phi_s_next - phi_s;
}

// Builds normalized per-owner composite fields from kernel specs: each spec is
// evaluated on the env's field domain, normalized under its own sign mode, and
// specs sharing an owner are superimposed.
GovernanceConfig build_governance(const std::vector<KernelSpec>& specs, const MultiAgentEnv& env,
                                  ShapingMode mode, double gamma, std::uint64_t noise_seed = 0);

// Governance wrapper: forwards the dynamics untouched and augments rewards.
// Additive mode collects (and then decays) field values on cell entry;
// Potential mode applies gamma*phi(s') - phi(s) per agent, with phi of a
// task-terminal successor defined as zero.
class GovernedEnv final : public MultiAgentEnv {
public:
    GovernedEnv(std::unique_ptr<MultiAgentEnv> env, GovernanceConfig gov);

    int n_agents() const override { return env_->n_agents(); }
    int n_actions() const override { return env_->n_actions(); }
    std::int64_t max_episode_len() const override { return env_->max_episode_len(); }

    void seed(std::uint64_t s) override { env_->seed(s); }
    void reset() override;
    StepResult step(const std::vector<int>& actions) override;
    bool done() const override { return env_->done(); }

    std::uint64_t state_id() const override { return env_->state_id(); }
    std::uint64_t state_space_size() const override { return env_->state_space_size(); }
    std::uint64_t obs_id(int agent) const override { return env_->obs_id(agent); }
    std::uint64_t obs_space_size() const override { return env_->obs_space_size(); }

    DomainDescriptor field_domain() const override { return env_->field_domain(); }
    std::int64_t reward_cell(int agent) const override { return env_->reward_cell(agent); }
    bool always_enters() const override { return env_->always_enters(); }
    AnchorContext anchor_context() const override { return env_->anchor_context(); }
    bool last_step_success(const StepResult& r) const override { return env_->last_step_success(r); }

    std::unique_ptr<MultiAgentEnv> clone() const override;

    // Composite potential for one agent at its current collection cell.
    double potential(int agent) const;

    MultiAgentEnv& inner() { return *env_; }
    const GovernanceConfig& governance() const { return gov_; }

private:
    std::unique_ptr<MultiAgentEnv> env_;
    GovernanceConfig gov_;
    std::vector<RewardField*> agent_field_; // per agent, may be null
    RewardField* shared_field_ = nullptr;
    std::vector<std::int64_t> prev_cells_;

    double phi_at(int agent, std::int64_t cell) const;
    void index_fields();
};

// Multi-objective reward shaping baseline: hand-crafted subtask bonuses for
// pickup, handover, and package progress toward the goal.
class MorsEnv final : public MultiAgentEnv {
public:
    explicit MorsEnv(std::unique_ptr<MultiAgentEnv> env);

    int n_agents() const override { return env_->n_agents(); }
    int n_actions() const override { return env_->n_actions(); }
    std::int64_t max_episode_len() const override { return env_->max_episode_len(); }

    void seed(std::uint64_t s) override { env_->seed(s); }
    void reset() override { env_->reset(); }
    StepResult step(const std::vector<int>& actions) override;
    bool done() const override { return env_->done(); }

    std::uint64_t state_id() const override { return env_->state_id(); }
    std::uint64_t state_space_size() const override { return env_->state_space_size(); }
    std::uint64_t obs_id(int agent) const override { return env_->obs_id(agent); }
    std::uint64_t obs_space_size() const override { return env_->obs_space_size(); }

    DomainDescriptor field_domain() const override { return env_->field_domain(); }
    std::int64_t reward_cell(int agent) const override { return env_->reward_cell(agent); }
    AnchorContext anchor_context() const override { return env_->anchor_context(); }
    bool last_step_success(const StepResult& r) const override { return env_->last_step_success(r); }

    std::unique_ptr<MultiAgentEnv> clone() const override;

    static constexpr double kPickupBonus = 0.1;
    static constexpr double kHandoverBonus = 0.1;
    static constexpr double kProgressBonus = 0.02; // per cell of forward progress

private:
    std::unique_ptr<MultiAgentEnv> env_; // must wrap the delivery env
};

// Sums the governance-added component per agent over an episode log.
std::vector<double> episode_added_reward(const std::vector<StepResult>& log, int n_agents);

} // namespace govrek
