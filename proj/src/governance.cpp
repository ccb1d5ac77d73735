#include "govrek/governance.hpp"

#include <algorithm>
#include <map>

#include "govrek/grid_env.hpp"

namespace govrek {

GovernanceConfig build_governance(const std::vector<KernelSpec>& specs, const MultiAgentEnv& env,
                                  ShapingMode mode, double gamma, std::uint64_t noise_seed) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must be in (0, 1]");
    const DomainDescriptor domain = env.field_domain();
    const AnchorContext context = env.anchor_context();
    const int n_agents = env.n_agents();

    std::map<int, std::vector<RewardField>> by_owner;
    std::uint64_t spec_index = 0;
    for (const KernelSpec& spec : specs) {
        if (spec.scope.agent_specific && spec.scope.agent_id >= n_agents)
            throw ConfigError("kernel scope references agent " + std::to_string(spec.scope.agent_id) +
                              " but the env has " + std::to_string(n_agents));
        RewardField raw =
            build_reward_field(spec, domain, context, derive_seed(noise_seed, {spec_index++}));
        by_owner[raw.owner_agent].push_back(normalize_field(raw, n_agents, spec.sign_mode));
    }

    GovernanceConfig gov;
    gov.mode = mode;
    gov.gamma = gamma;
    for (auto& [owner, fields] : by_owner) {
        gov.fields.push_back(fields.size() == 1 ? std::move(fields.front())
                                                : superimpose(fields, n_agents));
    }
    return gov;
}

GovernedEnv::GovernedEnv(std::unique_ptr<MultiAgentEnv> env, GovernanceConfig gov)
    : env_(std::move(env)), gov_(std::move(gov)) {
    const DomainDescriptor domain = env_->field_domain();
    for (const RewardField& f : gov_.fields) {
        if (!(f.domain == domain))
            throw DomainMismatch("field domain " + f.domain.to_string() + " does not match env " +
                                 domain.to_string());
        if (f.owner_agent >= env_->n_agents())
            throw DomainMismatch("field owner out of range");
    }
    index_fields();
    prev_cells_.assign(static_cast<std::size_t>(env_->n_agents()), -1);
    for (int a = 0; a < env_->n_agents(); ++a)
        prev_cells_[static_cast<std::size_t>(a)] = env_->reward_cell(a);
}

void GovernedEnv::index_fields() {
    agent_field_.assign(static_cast<std::size_t>(env_->n_agents()), nullptr);
    shared_field_ = nullptr;
    for (RewardField& f : gov_.fields) {
        if (f.shared()) {
            if (shared_field_) throw DomainMismatch("more than one shared composite field");
            shared_field_ = &f;
        } else {
            auto& slot = agent_field_[static_cast<std::size_t>(f.owner_agent)];
            if (slot) throw DomainMismatch("more than one composite field for one agent");
            slot = &f;
        }
    }
}

void GovernedEnv::reset() {
    env_->reset();
    for (RewardField& f : gov_.fields) f.reset_decay();
    for (int a = 0; a < env_->n_agents(); ++a)
        prev_cells_[static_cast<std::size_t>(a)] = env_->reward_cell(a);
}

double GovernedEnv::phi_at(int agent, std::int64_t cell) const {
    if (cell < 0) return 0.0;
    double phi = 0.0;
    const RewardField* own = agent_field_[static_cast<std::size_t>(agent)];
    if (own) phi += own->values[static_cast<std::size_t>(cell)];
    if (shared_field_) phi += shared_field_->values[static_cast<std::size_t>(cell)];
    return phi;
}

double GovernedEnv::potential(int agent) const { return phi_at(agent, env_->reward_cell(agent)); }

StepResult GovernedEnv::step(const std::vector<int>& actions) {
    const int n = env_->n_agents();
    std::vector<std::int64_t> before = prev_cells_;

    StepResult result = env_->step(actions);
    result.added.assign(static_cast<std::size_t>(n), 0.0);

    const bool task_terminal = result.done && env_->last_step_success(result);

    for (int agent = 0; agent < n; ++agent) {
        const std::int64_t cell = env_->reward_cell(agent);
        prev_cells_[static_cast<std::size_t>(agent)] = cell;
        double added = 0.0;
        if (gov_.mode == ShapingMode::Additive) {
            const bool entered =
                cell >= 0 && (env_->always_enters() || cell != before[static_cast<std::size_t>(agent)]);
            if (entered) {
                if (RewardField* own = agent_field_[static_cast<std::size_t>(agent)]) {
                    added += own->effective_value(cell);
                    own->apply_decay(cell);
                }
                if (shared_field_) {
                    added += shared_field_->effective_value(cell);
                    shared_field_->apply_decay(cell);
                }
            }
        } else {
            const double phi_s = phi_at(agent, before[static_cast<std::size_t>(agent)]);
            const double phi_next = task_terminal ? 0.0 : phi_at(agent, cell);
            added = potential_shaping(phi_s, phi_next, gov_.gamma);
        }
        result.added[static_cast<std::size_t>(agent)] = added;
        result.rewards[static_cast<std::size_t>(agent)] += added;
    }

    env_->note_observed_rewards(result.rewards);
    return result;
}

std::unique_ptr<MultiAgentEnv> GovernedEnv::clone() const {
    auto copy = std::make_unique<GovernedEnv>(env_->clone(), gov_);
    copy->prev_cells_ = prev_cells_;
    return copy;
}

MorsEnv::MorsEnv(std::unique_ptr<MultiAgentEnv> env) : env_(std::move(env)) {
    if (dynamic_cast<GridEnv*>(env_.get()) == nullptr)
        throw DomainMismatch("MORS shaping is defined for the package delivery env only");
}

StepResult MorsEnv::step(const std::vector<int>& actions) {
    StepResult result = env_->step(actions);
    result.added.assign(result.rewards.size(), 0.0);

    auto credit = [&](int agent, double amount) {
        if (agent < 0) return;
        result.added[static_cast<std::size_t>(agent)] += amount;
        result.rewards[static_cast<std::size_t>(agent)] += amount;
    };

    if (result.info.first_pickup) credit(result.info.picked_up_by, kPickupBonus);
    if (result.info.handover_from >= 0) {
        credit(result.info.handover_from, kHandoverBonus);
        credit(result.info.handover_to, kHandoverBonus);
    }
    // Progress bonus rewards only forward movement, so cycling the package is
    // never penalized; this is the positive-reward-cycle exposure of MORS.
    const int progress = result.info.package_goal_dist_before - result.info.package_goal_dist_after;
    if (progress > 0) {
        auto* grid = dynamic_cast<GridEnv*>(env_.get());
        const int carrier = grid ? grid->state().holder : -1;
        credit(carrier, kProgressBonus * progress);
    }

    env_->note_observed_rewards(result.rewards);
    return result;
}

std::unique_ptr<MultiAgentEnv> MorsEnv::clone() const {
    return std::make_unique<MorsEnv>(env_->clone());
}

std::vector<double> episode_added_reward(const std::vector<StepResult>& log, int n_agents) {
    std::vector<double> totals(static_cast<std::size_t>(n_agents), 0.0);
    for (const StepResult& r : log) {
        if (r.added.empty()) continue;
        for (int a = 0; a < n_agents; ++a) totals[static_cast<std::size_t>(a)] += r.added[static_cast<std::size_t>(a)];
    }
    return totals;
}

} // namespace govrek
