#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "govrek/env.hpp"
#include "govrek/grid_env.hpp"
#include "govrek/rng.hpp"

namespace govrek {

struct MdpTransition {
    std::int64_t next = 0;
    double prob = 1.0;
    double reward = 0.0;
    bool terminal = false; // absorbing; no bootstrapping past it
};

// Fully enumerable MDP used as the exact-planning oracle.
struct EnumerableMdp {
    std::int64_t n_states = 0;
    int n_actions = 0;
    std::int64_t initial_state = 0;
    // transitions[s][a] -> outcome distribution
    std::vector<std::vector<std::vector<MdpTransition>>> transitions;
};

struct ValueIterationResult {
    std::vector<double> values;
    std::vector<std::vector<int>> greedy; // per state, actions within tie tolerance of the max
    int sweeps = 0;
};

// Sup-norm value iteration; greedy sets keep ties within 1e-9.
ValueIterationResult value_iteration(const EnumerableMdp& mdp, double gamma, double tol);

// Applies gamma*phi(s') - phi(s) shaping to every transition, with phi of a
// terminal successor taken as zero.
EnumerableMdp shaped_mdp(const EnumerableMdp& mdp, const std::vector<double>& phi, double gamma);

// Enumerates the reachable joint MDP of a Fixed-layout delivery env. The MDP
// is the stationary (post-delay, no step limit) game; delivery is absorbing.
// Rewards are system rewards (summed over agents). Also reports each state's
// per-agent cells so potentials over the grid can be lifted to joint states.
struct JointMdp {
    EnumerableMdp mdp;
    std::vector<std::vector<std::int64_t>> agent_cells; // per state, per agent
};
JointMdp build_joint_mdp(const GridEnvConfig& config, std::int64_t max_states = 1000000);

// Random enumerable MDP with the given branching factor; rewards in [0, 1].
EnumerableMdp make_random_mdp(std::int64_t n_states, int n_actions, int branching, Rng& rng);

// Single-agent environment view over an enumerable MDP; the oracle and the
// trainers can then be pointed at the same dynamics.
class MdpEnv final : public MultiAgentEnv {
public:
    MdpEnv(EnumerableMdp mdp, std::uint64_t seed, std::int64_t episode_cap = 200);

    int n_agents() const override { return 1; }
    int n_actions() const override { return mdp_.n_actions; }
    std::int64_t max_episode_len() const override { return episode_cap_; }

    void seed(std::uint64_t s) override;
    void reset() override;
    StepResult step(const std::vector<int>& actions) override;
    bool done() const override { return done_; }

    std::uint64_t state_id() const override { return static_cast<std::uint64_t>(state_); }
    std::uint64_t state_space_size() const override { return static_cast<std::uint64_t>(mdp_.n_states); }
    std::uint64_t obs_id(int) const override { return static_cast<std::uint64_t>(state_); }
    std::uint64_t obs_space_size() const override { return static_cast<std::uint64_t>(mdp_.n_states); }

    DomainDescriptor field_domain() const override {
        return DomainDescriptor::joint_action(mdp_.n_states);
    }
    std::int64_t reward_cell(int) const override { return state_; }
    AnchorContext anchor_context() const override {
        AnchorContext ctx;
        ctx.goal = Point(static_cast<double>(mdp_.n_states - 1));
        return ctx;
    }
    bool last_step_success(const StepResult& r) const override { return r.info.delivered; }

    std::unique_ptr<MultiAgentEnv> clone() const override { return std::make_unique<MdpEnv>(*this); }

    const EnumerableMdp& mdp() const { return mdp_; }

private:
    EnumerableMdp mdp_;
    std::int64_t state_ = 0;
    bool done_ = false;
    std::int64_t steps_ = 0;
    std::int64_t episode_cap_;
    Rng rng_;
};

} // namespace govrek
