#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "govrek/env.hpp"
#include "govrek/rng.hpp"

namespace govrek {

enum class Randomization { Fixed, RandomInit, RandomPerEpisode };

// Two-agent package delivery on a 2D or 3D grid. Actions per agent:
// 2*ndim axis moves, then Stay, then Handover.
struct GridEnvConfig {
    std::vector<std::int64_t> dims;          // (l, w) or (l, w, h), each >= 3
    int n_agents = 2;
    std::vector<std::vector<std::int64_t>> agent_starts; // empty -> canonical layout
    std::vector<std::int64_t> package_start;             // empty -> canonical layout
    std::vector<std::int64_t> goal;                      // empty -> canonical layout
    int n_blockers = 0;
    Randomization randomization = Randomization::Fixed;
    std::int64_t agent2_delay = 0;
    std::vector<std::int64_t> fuel;          // per agent; empty -> ceil(0.75 * sum(dims))
    std::int64_t max_episode_len = 0;        // 0 -> 10 * sum(dims)
    double goal_reward = 2.5;

    int ndim() const { return static_cast<int>(dims.size()); }
    std::int64_t default_fuel() const;
    std::int64_t default_max_episode_len() const;

    // Fills defaults and validates the cooperation-forcing invariants for the
    // fixed layout. Throws ConfigError / LayoutInfeasible on violations.
    GridEnvConfig resolved() const;
};

struct GridLayout {
    std::vector<std::int64_t> agent_starts; // cell indices
    std::int64_t package_start = -1;
    std::int64_t goal = -1;
    std::vector<std::int64_t> blockers;
};

struct GridEnvState {
    std::vector<std::int64_t> positions;   // cell index per agent
    std::vector<std::int64_t> fuel;
    std::int64_t package_cell = -1;        // valid iff holder < 0
    int holder = -1;                       // agent id carrying the package, -1 if grounded
    std::int64_t step_count = 0;
    bool done = false;
};

class GridEnv final : public MultiAgentEnv {
public:
    explicit GridEnv(GridEnvConfig config, std::uint64_t seed = 0);

    int n_agents() const override { return config_.n_agents; }
    int n_actions() const override { return 2 * config_.ndim() + 2; }
    std::int64_t max_episode_len() const override { return config_.max_episode_len; }

    void seed(std::uint64_t s) override;
    void reset() override;
    StepResult step(const std::vector<int>& actions) override;
    bool done() const override { return state_.done; }

    std::uint64_t state_id() const override;
    std::uint64_t state_space_size() const override;
    std::uint64_t obs_id(int agent) const override;
    std::uint64_t obs_space_size() const override;

    DomainDescriptor field_domain() const override { return DomainDescriptor::grid(config_.dims); }
    std::int64_t reward_cell(int agent) const override { return state_.positions[static_cast<std::size_t>(agent)]; }
    AnchorContext anchor_context() const override;
    bool last_step_success(const StepResult& r) const override { return r.info.delivered; }

    std::unique_ptr<MultiAgentEnv> clone() const override;

    const GridEnvConfig& config() const { return config_; }
    const GridEnvState& state() const { return state_; }
    const GridLayout& layout() const { return layout_; }

    // Replaces the dynamic state (layout unchanged); used by MDP enumeration.
    void set_state(const GridEnvState& s) { state_ = s; }

    int stay_action() const { return 2 * config_.ndim(); }
    int handover_action() const { return 2 * config_.ndim() + 1; }

    // Manhattan distance from the package (held or grounded) to the goal.
    std::int64_t package_goal_distance() const;

    bool is_blocker(std::int64_t cell) const { return blocker_mask_[static_cast<std::size_t>(cell)]; }

private:
    GridEnvConfig config_;
    DomainDescriptor domain_;
    GridLayout layout_;
    std::vector<char> blocker_mask_;
    GridEnvState state_;
    Rng rng_;
    std::uint64_t base_seed_ = 0;
    bool layout_drawn_ = false; // RandomInit draws once per seeded run
    bool pickup_seen_ = false;  // first-pickup tracking within the episode

    void apply_layout(const GridLayout& layout);
    GridLayout sample_layout();
    std::vector<std::int64_t> cell_coords(std::int64_t cell) const;
    std::int64_t manhattan(std::int64_t a, std::int64_t b) const;
};

// True iff a monotone (axis-forward) blocker-free path exists between the cells.
bool monotone_path_exists(const DomainDescriptor& domain, const std::vector<char>& blockers,
                          std::int64_t from, std::int64_t to);

// BFS shortest-path distances from a source, -1 for unreachable cells.
std::vector<std::int64_t> bfs_distances(const DomainDescriptor& domain,
                                        const std::vector<char>& blockers, std::int64_t from);

// Checks the full layout contract: entities distinct and off blockers, a
// monotone package->goal path exists, neither agent can deliver alone, and the
// two agents can deliver together via some handover cell.
bool layout_feasible(const DomainDescriptor& domain, const std::vector<char>& blockers,
                     const GridLayout& layout, const std::vector<std::int64_t>& fuel,
                     std::string* why = nullptr);

} // namespace govrek
