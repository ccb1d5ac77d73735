#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "govrek/domain.hpp"
#include "govrek/kernel.hpp"

namespace govrek {

// Per-step event record; consumed by shaping layers and trajectory logs.
struct StepInfo {
    bool delivered = false;
    bool timeout = false;
    int picked_up_by = -1;
    bool first_pickup = false;
    int handover_from = -1;
    int handover_to = -1;
    int package_goal_dist_before = -1;
    int package_goal_dist_after = -1;
};

struct StepResult {
    std::vector<double> rewards;       // what the learner sees (shaped if governed)
    std::vector<double> base_rewards;  // environment rewards before shaping
    std::vector<double> added;         // governance-added component, empty if ungoverned
    bool done = false;
    StepInfo info;
};

// Common surface for the trainable environments. Implementations are
// deterministic state machines seeded explicitly; instances are never shared
// across trials.
class MultiAgentEnv {
public:
    virtual ~MultiAgentEnv() = default;

    virtual int n_agents() const = 0;
    virtual int n_actions() const = 0; // per-agent action count
    virtual std::int64_t max_episode_len() const = 0;

    virtual void seed(std::uint64_t s) = 0;
    virtual void reset() = 0;
    virtual StepResult step(const std::vector<int>& actions) = 0;
    virtual bool done() const = 0;

    // Tabular encodings.
    virtual std::uint64_t state_id() const = 0;
    virtual std::uint64_t state_space_size() const = 0;
    virtual std::uint64_t obs_id(int agent) const = 0;
    virtual std::uint64_t obs_space_size() const = 0;

    // Governance hooks.
    virtual DomainDescriptor field_domain() const = 0;
    virtual std::int64_t reward_cell(int agent) const = 0; // -1 when undefined
    virtual bool always_enters() const { return false; }
    virtual AnchorContext anchor_context() const = 0;
    // Episode success from the task's point of view (delivery / full cooperation).
    virtual bool last_step_success(const StepResult& r) const = 0;

    // Lets wrappers report the rewards the agents actually observed, so
    // reward-conditioned observations stay consistent under shaping.
    virtual void note_observed_rewards(const std::vector<double>&) {}

    virtual std::unique_ptr<MultiAgentEnv> clone() const = 0;
};

} // namespace govrek
