#include "govrek/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

namespace govrek {

ValueIterationResult value_iteration(const EnumerableMdp& mdp, double gamma, double tol) {
    if (!(tol > 0.0)) throw InvalidInput("tolerance must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must be in (0, 1]");
    if (mdp.n_states > 1000000) throw CapacityExceeded("value iteration beyond 1e6 states");

    ValueIterationResult out;
    out.values.assign(static_cast<std::size_t>(mdp.n_states), 0.0);
    std::vector<double> next(out.values.size(), 0.0);

    const int max_sweeps = 1000000;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double delta = 0.0;
        for (std::int64_t s = 0; s < mdp.n_states; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < mdp.n_actions; ++a) {
                double q = 0.0;
                for (const MdpTransition& t : mdp.transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)])
                    q += t.prob * (t.reward + (t.terminal ? 0.0 : gamma * out.values[static_cast<std::size_t>(t.next)]));
                best = std::max(best, q);
            }
            if (mdp.n_actions == 0) best = 0.0;
            next[static_cast<std::size_t>(s)] = best;
            delta = std::max(delta, std::abs(best - out.values[static_cast<std::size_t>(s)]));
        }
        out.values.swap(next);
        out.sweeps = sweep + 1;
        if (delta < tol) break;
        if (sweep + 1 == max_sweeps) throw InvalidInput("value iteration did not converge");
    }

    constexpr double tie_eps = 1e-9;
    out.greedy.resize(static_cast<std::size_t>(mdp.n_states));
    for (std::int64_t s = 0; s < mdp.n_states; ++s) {
        std::vector<double> q(static_cast<std::size_t>(mdp.n_actions), 0.0);
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < mdp.n_actions; ++a) {
            double v = 0.0;
            for (const MdpTransition& t : mdp.transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)])
                v += t.prob * (t.reward + (t.terminal ? 0.0 : gamma * out.values[static_cast<std::size_t>(t.next)]));
            q[static_cast<std::size_t>(a)] = v;
            best = std::max(best, v);
        }
        for (int a = 0; a < mdp.n_actions; ++a)
            if (q[static_cast<std::size_t>(a)] >= best - tie_eps) out.greedy[static_cast<std::size_t>(s)].push_back(a);
    }
    return out;
}

EnumerableMdp shaped_mdp(const EnumerableMdp& mdp, const std::vector<double>& phi, double gamma) {
    if (static_cast<std::int64_t>(phi.size()) != mdp.n_states)
        throw InvalidInput("phi must assign a potential to every state");
    EnumerableMdp out = mdp;
    for (std::int64_t s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            for (MdpTransition& t : out.transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]) {
                const double phi_next = t.terminal ? 0.0 : phi[static_cast<std::size_t>(t.next)];
                t.reward += gamma * phi_next - phi[static_cast<std::size_t>(s)];
            }
    return out;
}

JointMdp build_joint_mdp(const GridEnvConfig& config, std::int64_t max_states) {
    GridEnvConfig cfg = config.resolved();
    if (cfg.randomization != Randomization::Fixed)
        throw InvalidInput("joint MDP enumeration needs a Fixed layout");
    cfg.max_episode_len = std::numeric_limits<std::int64_t>::max() / 4; // no step limit in the MDP
    GridEnv env(cfg, 0);

    const int n_joint = env.n_actions() * env.n_actions();
    auto decode = [&](int joint) {
        return std::vector<int>{joint / env.n_actions(), joint % env.n_actions()};
    };

    JointMdp out;
    out.mdp.n_actions = n_joint;

    std::unordered_map<std::uint64_t, std::int64_t> index_of;
    std::vector<GridEnvState> states;
    std::deque<std::int64_t> frontier;

    auto intern = [&](const GridEnvState& s) {
        // step_count is pinned so the delay phase and the step limit do not
        // enter the state space.
        GridEnvState normal = s;
        normal.step_count = cfg.agent2_delay;
        normal.done = false;
        GridEnv probe = env;
        probe.set_state(normal);
        const std::uint64_t key = probe.state_id();
        auto it = index_of.find(key);
        if (it != index_of.end()) return it->second;
        const std::int64_t idx = static_cast<std::int64_t>(states.size());
        if (idx >= max_states) throw CapacityExceeded("joint MDP exceeds the state budget");
        index_of.emplace(key, idx);
        states.push_back(normal);
        frontier.push_back(idx);
        return idx;
    };

    env.reset();
    out.mdp.initial_state = intern(env.state());

    while (!frontier.empty()) {
        const std::int64_t si = frontier.front();
        frontier.pop_front();
        if (static_cast<std::int64_t>(out.mdp.transitions.size()) <= si)
            out.mdp.transitions.resize(static_cast<std::size_t>(si) + 1);
        out.mdp.transitions[static_cast<std::size_t>(si)].resize(static_cast<std::size_t>(n_joint));
        for (int ja = 0; ja < n_joint; ++ja) {
            GridEnv probe = env;
            probe.set_state(states[static_cast<std::size_t>(si)]);
            const StepResult r = probe.step(decode(ja));
            MdpTransition t;
            t.prob = 1.0;
            t.reward = 0.0;
            for (double b : r.base_rewards) t.reward += b;
            t.terminal = r.info.delivered;
            t.next = t.terminal ? si : intern(probe.state());
            out.mdp.transitions[static_cast<std::size_t>(si)][static_cast<std::size_t>(ja)] = {t};
        }
    }

    out.mdp.n_states = static_cast<std::int64_t>(states.size());
    out.mdp.transitions.resize(static_cast<std::size_t>(out.mdp.n_states));

    out.agent_cells.resize(static_cast<std::size_t>(out.mdp.n_states));
    for (std::int64_t s = 0; s < out.mdp.n_states; ++s)
        out.agent_cells[static_cast<std::size_t>(s)] = states[static_cast<std::size_t>(s)].positions;
    return out;
}

EnumerableMdp make_random_mdp(std::int64_t n_states, int n_actions, int branching, Rng& rng) {
    if (n_states < 1 || n_actions < 1 || branching < 1) throw InvalidInput("bad MDP shape");
    EnumerableMdp mdp;
    mdp.n_states = n_states;
    mdp.n_actions = n_actions;
    mdp.transitions.resize(static_cast<std::size_t>(n_states));
    for (std::int64_t s = 0; s < n_states; ++s) {
        mdp.transitions[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(n_actions));
        for (int a = 0; a < n_actions; ++a) {
            auto& outcomes = mdp.transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
            double total = 0.0;
            for (int b = 0; b < branching; ++b) {
                MdpTransition t;
                t.next = static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(n_states)));
                t.prob = rng.uniform(0.05, 1.0);
                t.reward = rng.uniform();
                total += t.prob;
                outcomes.push_back(t);
            }
            for (MdpTransition& t : outcomes) t.prob /= total;
        }
    }
    return mdp;
}

MdpEnv::MdpEnv(EnumerableMdp mdp, std::uint64_t seed, std::int64_t episode_cap)
    : mdp_(std::move(mdp)), episode_cap_(episode_cap), rng_(derive_seed(seed, {0x6d6470ULL})) {
    reset();
}

void MdpEnv::seed(std::uint64_t s) { rng_ = Rng(derive_seed(s, {0x6d6470ULL})); }

void MdpEnv::reset() {
    state_ = mdp_.initial_state;
    done_ = false;
    steps_ = 0;
}

StepResult MdpEnv::step(const std::vector<int>& actions) {
    if (done_) throw EpisodeFinished("step() on a finished episode");
    if (actions.size() != 1) throw InvalidInput("MdpEnv has a single agent");
    const int a = actions[0];
    if (a < 0 || a >= mdp_.n_actions) throw InvalidInput("action out of range");

    const auto& outcomes = mdp_.transitions[static_cast<std::size_t>(state_)][static_cast<std::size_t>(a)];
    double u = rng_.uniform();
    const MdpTransition* chosen = &outcomes.back();
    for (const MdpTransition& t : outcomes) {
        if (u < t.prob) {
            chosen = &t;
            break;
        }
        u -= t.prob;
    }

    StepResult r;
    r.rewards = {chosen->reward};
    r.base_rewards = r.rewards;
    state_ = chosen->next;
    steps_ += 1;
    if (chosen->terminal) {
        done_ = true;
        r.info.delivered = true;
    } else if (steps_ >= episode_cap_) {
        done_ = true;
        r.info.timeout = true;
    }
    r.done = done_;
    return r;
}

} // namespace govrek
