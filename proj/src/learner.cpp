#include "govrek/learner.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "govrek/errors.hpp"

namespace govrek {

using json = nlohmann::json;

namespace {

constexpr std::uint64_t kMaxTabularStates = 10000000; // 1e7
constexpr std::uint64_t kMaxJointActions = 100000;
constexpr std::uint64_t kMaxPgInputs = 100000;

std::int64_t checked_joint_actions(int n_agents, int n_actions) {
    std::uint64_t total = 1;
    for (int i = 0; i < n_agents; ++i) {
        total *= static_cast<std::uint64_t>(n_actions);
        if (total > kMaxJointActions)
            throw CapacityExceeded("joint action space too large for a centralized learner");
    }
    return static_cast<std::int64_t>(total);
}

} // namespace

void LearnerConfig::validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must be in (0, 1]");
    if (!(learning_rate > 0.0)) throw InvalidInput("learning_rate must be positive");
    if (exploration.eps_start < 0.0 || exploration.eps_start > 1.0 || exploration.eps_end < 0.0 ||
        exploration.eps_end > 1.0)
        throw InvalidInput("epsilon must be in [0, 1]");
    if (!(clip_ratio > 0.0)) throw InvalidInput("clip_ratio must be positive");
    if (rollout_horizon < 1) throw InvalidInput("rollout_horizon must be >= 1");
    if (hidden_width < 1) throw InvalidInput("hidden_width must be >= 1");
    if (pg_epochs < 1) throw InvalidInput("pg_epochs must be >= 1");
    if (eval_episodes < 1) throw InvalidInput("eval_episodes must be >= 1");
}

std::vector<int> decode_joint_action(std::int64_t joint, int n_agents, int n_actions) {
    std::vector<int> actions(static_cast<std::size_t>(n_agents));
    for (int i = n_agents - 1; i >= 0; --i) {
        actions[static_cast<std::size_t>(i)] = static_cast<int>(joint % n_actions);
        joint /= n_actions;
    }
    return actions;
}

// ---------------------------------------------------------------------------
// Q storage

namespace {

using QTable = std::unordered_map<std::uint64_t, std::vector<double>>;

// Greedy argmax with deterministic lowest-index tie-breaking; missing rows
// behave as all-zero.
std::int64_t greedy_from_table(const QTable& table, std::uint64_t key, std::int64_t n_actions) {
    auto it = table.find(key);
    if (it == table.end()) return 0;
    const std::vector<double>& row = it->second;
    std::size_t best = 0;
    for (std::size_t a = 1; a < row.size(); ++a)
        if (row[a] > row[best]) best = a;
    (void)n_actions;
    return static_cast<std::int64_t>(best);
}

std::vector<double>& row_of(QTable& table, std::uint64_t key, std::int64_t n_actions) {
    auto it = table.find(key);
    if (it == table.end())
        it = table.emplace(key, std::vector<double>(static_cast<std::size_t>(n_actions), 0.0)).first;
    return it->second;
}

double max_q(const QTable& table, std::uint64_t key) {
    auto it = table.find(key);
    if (it == table.end()) return 0.0;
    return *std::max_element(it->second.begin(), it->second.end());
}

} // namespace

// ---------------------------------------------------------------------------
// Policies

struct PolicyCodec; // forward (declared friend in the header)

namespace {

class TabularCtcePolicy final : public Policy {
public:
    TabularCtcePolicy(QTable q, int n_agents, int n_actions)
        : q_(std::move(q)), n_agents_(n_agents), n_actions_(n_actions) {}

    std::vector<int> act(const MultiAgentEnv& env) const override {
        const std::int64_t joint =
            greedy_from_table(q_, env.state_id(), static_cast<std::int64_t>(n_actions_));
        return decode_joint_action(joint, n_agents_, n_actions_);
    }

    std::string kind() const override { return "tabular_ctce"; }
    std::unique_ptr<Policy> clone() const override {
        return std::make_unique<TabularCtcePolicy>(q_, n_agents_, n_actions_);
    }

    QTable q_;
    int n_agents_;
    int n_actions_;
};

class TabularCtdePolicy final : public Policy {
public:
    TabularCtdePolicy(std::vector<QTable> tables, int n_actions)
        : tables_(std::move(tables)), n_actions_(n_actions) {}

    std::vector<int> act(const MultiAgentEnv& env) const override {
        std::vector<int> actions(tables_.size());
        for (std::size_t agent = 0; agent < tables_.size(); ++agent)
            actions[agent] = static_cast<int>(greedy_from_table(
                tables_[agent], env.obs_id(static_cast<int>(agent)), n_actions_));
        return actions;
    }

    std::string kind() const override { return "tabular_ctde"; }
    std::unique_ptr<Policy> clone() const override {
        return std::make_unique<TabularCtdePolicy>(tables_, n_actions_);
    }

    std::vector<QTable> tables_;
    int n_actions_;
};

class PgCtcePolicy final : public Policy {
public:
    PgCtcePolicy(PgNet net, int n_agents, int n_actions)
        : net_(std::move(net)), n_agents_(n_agents), n_actions_(n_actions) {}

    std::vector<int> act(const MultiAgentEnv& env) const override {
        const int joint = net_.greedy_action(static_cast<std::int64_t>(env.state_id()));
        return decode_joint_action(joint, n_agents_, n_actions_);
    }

    std::string kind() const override { return "pg_ctce"; }
    std::unique_ptr<Policy> clone() const override {
        return std::make_unique<PgCtcePolicy>(net_, n_agents_, n_actions_);
    }

    PgNet net_;
    int n_agents_;
    int n_actions_;
};

class PgCtdePolicy final : public Policy {
public:
    explicit PgCtdePolicy(std::vector<PgNet> nets) : nets_(std::move(nets)) {}

    std::vector<int> act(const MultiAgentEnv& env) const override {
        std::vector<int> actions(nets_.size());
        for (std::size_t agent = 0; agent < nets_.size(); ++agent)
            actions[agent] =
                nets_[agent].greedy_action(static_cast<std::int64_t>(env.obs_id(static_cast<int>(agent))));
        return actions;
    }

    std::string kind() const override { return "pg_ctde"; }
    std::unique_ptr<Policy> clone() const override { return std::make_unique<PgCtdePolicy>(nets_); }

    std::vector<PgNet> nets_;
};

json qtable_to_json(const QTable& q) {
    json rows = json::object();
    for (const auto& [key, row] : q) rows[std::to_string(key)] = row;
    return rows;
}

QTable qtable_from_json(const json& rows) {
    QTable q;
    for (auto it = rows.begin(); it != rows.end(); ++it)
        q.emplace(std::stoull(it.key()), it.value().get<std::vector<double>>());
    return q;
}

json net_to_json(const PgNet& net) {
    return json{{"n_inputs", net.n_inputs},
                {"n_hidden", net.n_hidden},
                {"n_outputs", net.n_outputs},
                {"params", net.params}};
}

PgNet net_from_json(const json& j) {
    PgNet net;
    net.n_inputs = j.at("n_inputs").get<int>();
    net.n_hidden = j.at("n_hidden").get<int>();
    net.n_outputs = j.at("n_outputs").get<int>();
    net.params = j.at("params").get<std::vector<double>>();
    if (net.params.size() != net.param_count()) throw ConfigError("policy file: bad parameter count");
    return net;
}

} // namespace

std::string Policy::to_json_string() const {
    json j;
    j["schema_version"] = 1;
    j["kind"] = kind();
    if (const auto* p = dynamic_cast<const TabularCtcePolicy*>(this)) {
        j["n_agents"] = p->n_agents_;
        j["n_actions"] = p->n_actions_;
        j["q"] = qtable_to_json(p->q_);
    } else if (const auto* p = dynamic_cast<const TabularCtdePolicy*>(this)) {
        j["n_actions"] = p->n_actions_;
        json tables = json::array();
        for (const QTable& t : p->tables_) tables.push_back(qtable_to_json(t));
        j["tables"] = tables;
    } else if (const auto* p = dynamic_cast<const PgCtcePolicy*>(this)) {
        j["n_agents"] = p->n_agents_;
        j["n_actions"] = p->n_actions_;
        j["net"] = net_to_json(p->net_);
    } else if (const auto* p = dynamic_cast<const PgCtdePolicy*>(this)) {
        json nets = json::array();
        for (const PgNet& n : p->nets_) nets.push_back(net_to_json(n));
        j["nets"] = nets;
    } else {
        throw InvalidInput("unknown policy type");
    }
    return j.dump(2);
}

std::unique_ptr<Policy> Policy::from_json_string(const std::string& text) {
    json j = json::parse(text);
    if (j.at("schema_version").get<int>() != 1) throw ConfigError("unsupported policy schema version");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "tabular_ctce")
        return std::make_unique<TabularCtcePolicy>(qtable_from_json(j.at("q")), j.at("n_agents").get<int>(),
                                                   j.at("n_actions").get<int>());
    if (kind == "tabular_ctde") {
        std::vector<QTable> tables;
        for (const json& t : j.at("tables")) tables.push_back(qtable_from_json(t));
        return std::make_unique<TabularCtdePolicy>(std::move(tables), j.at("n_actions").get<int>());
    }
    if (kind == "pg_ctce")
        return std::make_unique<PgCtcePolicy>(net_from_json(j.at("net")), j.at("n_agents").get<int>(),
                                              j.at("n_actions").get<int>());
    if (kind == "pg_ctde") {
        std::vector<PgNet> nets;
        for (const json& n : j.at("nets")) nets.push_back(net_from_json(n));
        return std::make_unique<PgCtdePolicy>(std::move(nets));
    }
    throw ConfigError("unknown policy kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Evaluation

EvalMetrics evaluate(const Policy& policy, MultiAgentEnv& env, int n_episodes, std::uint64_t seed) {
    if (n_episodes < 1) throw InvalidInput("n_episodes must be >= 1");
    env.seed(derive_seed(seed, {0x6576616cULL}));
    EvalMetrics metrics;
    const int n = env.n_agents();
    for (int ep = 0; ep < n_episodes; ++ep) {
        env.reset();
        double total = 0.0;
        std::int64_t steps = 0;
        bool success = false;
        while (!env.done()) {
            const StepResult r = env.step(policy.act(env));
            for (double v : r.rewards) total += v;
            steps += 1;
            if (r.done) success = env.last_step_success(r);
        }
        metrics.avg_reward += total / static_cast<double>(n);
        metrics.avg_episode_length += static_cast<double>(steps);
        metrics.success_rate += success ? 1.0 : 0.0;
    }
    metrics.avg_reward /= static_cast<double>(n_episodes);
    metrics.avg_episode_length /= static_cast<double>(n_episodes);
    metrics.success_rate /= static_cast<double>(n_episodes);
    return metrics;
}

// ---------------------------------------------------------------------------
// Trainer state

struct TrainerState {
    LearnerConfig config;
    std::int64_t steps_done = 0;
    std::int64_t eps_decay_steps = 0;
    std::int64_t first_success_at = -1;
    Rng rng{0};

    // Tabular storage: one table for CTCE, one per agent for CTDE.
    std::vector<QTable> tables;
    std::int64_t table_actions = 0;

    // Policy-gradient storage.
    std::vector<PgNet> nets;

    mutable std::int64_t cross_agent_reads = 0;

    // The single access path to a Q table: `accessor` is the agent running the
    // update; touching another agent's table is counted (CTDE isolation).
    QTable& table_for(int table_index, int accessor) {
        if (table_index != accessor) ++cross_agent_reads;
        return tables[static_cast<std::size_t>(table_index)];
    }
};

std::int64_t ctde_cross_agent_reads(const TrainerState& state) { return state.cross_agent_reads; }

namespace {

double epsilon_at(const TrainerState& state) {
    const auto& ex = state.config.exploration;
    if (state.eps_decay_steps <= 0) return ex.eps_end;
    const double frac =
        std::min(1.0, static_cast<double>(state.steps_done) / static_cast<double>(state.eps_decay_steps));
    return ex.eps_start + (ex.eps_end - ex.eps_start) * frac;
}

std::unique_ptr<Policy> snapshot_policy(const TrainerState& state, const MultiAgentEnv& env) {
    if (state.config.algorithm == Algorithm::TabularQ) {
        if (state.config.paradigm == Paradigm::CTCE)
            return std::make_unique<TabularCtcePolicy>(state.tables[0], env.n_agents(), env.n_actions());
        return std::make_unique<TabularCtdePolicy>(state.tables, env.n_actions());
    }
    if (state.config.paradigm == Paradigm::CTCE)
        return std::make_unique<PgCtcePolicy>(state.nets[0], env.n_agents(), env.n_actions());
    return std::make_unique<PgCtdePolicy>(state.nets);
}

void maybe_sample_curve(TrainerState& state, MultiAgentEnv& env, TrialResult& result,
                        std::int64_t eval_every) {
    if (state.steps_done % eval_every != 0) return;
    const auto policy = snapshot_policy(state, env);
    auto eval_env = env.clone();
    const EvalMetrics m = evaluate(*policy, *eval_env,
                                   state.config.eval_episodes,
                                   derive_seed(state.config.seed, {0xe7a1ULL, static_cast<std::uint64_t>(state.steps_done)}));
    result.curve.push_back(CurveSample{state.steps_done, m.avg_reward, m.avg_episode_length, m.success_rate});
}

void finish_result(TrainerState& state, MultiAgentEnv& env, TrialResult& result) {
    if (result.curve.empty() || result.curve.back().timestep != state.steps_done) {
        const auto policy = snapshot_policy(state, env);
        auto eval_env = env.clone();
        const EvalMetrics m = evaluate(*policy, *eval_env, state.config.eval_episodes,
                                       derive_seed(state.config.seed,
                                                   {0xe7a1ULL, static_cast<std::uint64_t>(state.steps_done)}));
        result.curve.push_back(
            CurveSample{state.steps_done, m.avg_reward, m.avg_episode_length, m.success_rate});
    }
    const CurveSample& last = result.curve.back();
    result.avg_reward = last.avg_reward;
    result.avg_episode_length = last.avg_ep_len;
    result.success_rate = last.success_rate;
    result.steps_to_first_success = state.first_success_at;
    result.total_timesteps = state.steps_done;
    result.seed = state.config.seed;
}

void train_tabular(TrainerState& state, MultiAgentEnv& env, std::int64_t budget, TrialResult& result,
                   std::int64_t eval_every) {
    const int n_agents = env.n_agents();
    const int n_actions = env.n_actions();
    const bool ctce = state.config.paradigm == Paradigm::CTCE;
    const double lr = state.config.learning_rate;
    const double gamma = state.config.gamma;

    std::int64_t joint_actions = 0;
    if (ctce) {
        joint_actions = checked_joint_actions(n_agents, n_actions);
        if (env.state_space_size() > kMaxTabularStates)
            throw CapacityExceeded("joint state space too large for tabular CTCE");
        if (state.tables.empty()) {
            state.tables.resize(1);
            state.table_actions = joint_actions;
        }
    } else {
        if (env.obs_space_size() > kMaxTabularStates)
            throw CapacityExceeded("observation space too large for tabular CTDE");
        if (state.tables.empty()) {
            state.tables.resize(static_cast<std::size_t>(n_agents));
            state.table_actions = n_actions;
        }
    }

    env.reset();
    std::vector<std::uint64_t> prev_obs(static_cast<std::size_t>(n_agents), 0);

    for (std::int64_t t = 0; t < budget; ++t) {
        const double eps = epsilon_at(state);

        std::vector<int> actions;
        std::uint64_t s_joint = 0;
        std::int64_t a_joint = 0;
        if (ctce) {
            s_joint = env.state_id();
            a_joint = state.rng.bernoulli(eps)
                          ? static_cast<std::int64_t>(state.rng.uniform_int(static_cast<std::uint64_t>(joint_actions)))
                          : greedy_from_table(state.tables[0], s_joint, joint_actions);
            actions = decode_joint_action(a_joint, n_agents, n_actions);
        } else {
            actions.resize(static_cast<std::size_t>(n_agents));
            for (int agent = 0; agent < n_agents; ++agent) {
                prev_obs[static_cast<std::size_t>(agent)] = env.obs_id(agent);
                actions[static_cast<std::size_t>(agent)] =
                    state.rng.bernoulli(eps)
                        ? static_cast<int>(state.rng.uniform_int(static_cast<std::uint64_t>(n_actions)))
                        : static_cast<int>(greedy_from_table(state.tables[static_cast<std::size_t>(agent)],
                                                             env.obs_id(agent), n_actions));
            }
        }

        const StepResult r = env.step(actions);
        const bool task_terminal = r.done && env.last_step_success(r);
        state.steps_done += 1;

        if (ctce) {
            double reward = 0.0;
            for (double v : r.rewards) reward += v;
            QTable& q = state.table_for(0, 0);
            // Timeouts bootstrap (the step limit is not part of the state);
            // only task-terminal transitions stop the backup.
            const double target = reward + (task_terminal ? 0.0 : gamma * max_q(q, env.state_id()));
            std::vector<double>& row = row_of(q, s_joint, joint_actions);
            row[static_cast<std::size_t>(a_joint)] += lr * (target - row[static_cast<std::size_t>(a_joint)]);
        } else {
            for (int agent = 0; agent < n_agents; ++agent) {
                QTable& q = state.table_for(agent, agent);
                const double reward = r.rewards[static_cast<std::size_t>(agent)];
                const double boot = task_terminal ? 0.0 : gamma * max_q(q, env.obs_id(agent));
                std::vector<double>& row =
                    row_of(q, prev_obs[static_cast<std::size_t>(agent)], n_actions);
                const int a = actions[static_cast<std::size_t>(agent)];
                row[static_cast<std::size_t>(a)] += lr * (reward + boot - row[static_cast<std::size_t>(a)]);
            }
        }

        if (r.done) {
            if (task_terminal && state.first_success_at < 0) state.first_success_at = state.steps_done;
            env.reset();
        }
        maybe_sample_curve(state, env, result, eval_every);
    }
}

void train_pg(TrainerState& state, MultiAgentEnv& env, std::int64_t budget, TrialResult& result,
              std::int64_t eval_every) {
    const int n_agents = env.n_agents();
    const int n_actions = env.n_actions();
    const bool ctce = state.config.paradigm == Paradigm::CTCE;
    const double gamma = state.config.gamma;
    const double lr = state.config.learning_rate;
    const double clip = state.config.clip_ratio;

    if (ctce) {
        const std::int64_t joint_actions = checked_joint_actions(n_agents, n_actions);
        if (env.state_space_size() > kMaxPgInputs)
            throw CapacityExceeded("state space too large for the one-hot policy network");
        if (state.nets.empty())
            state.nets.push_back(PgNet::init(static_cast<int>(env.state_space_size()),
                                             state.config.hidden_width, static_cast<int>(joint_actions),
                                             state.rng));
    } else {
        if (env.obs_space_size() > kMaxPgInputs)
            throw CapacityExceeded("observation space too large for the one-hot policy network");
        if (state.nets.empty())
            for (int agent = 0; agent < n_agents; ++agent)
                state.nets.push_back(PgNet::init(static_cast<int>(env.obs_space_size()),
                                                 state.config.hidden_width, n_actions, state.rng));
    }

    env.reset();
    std::int64_t consumed = 0;
    while (consumed < budget) {
        const std::int64_t horizon = std::min(state.config.rollout_horizon, budget - consumed);

        if (ctce) {
            PgBatch batch;
            std::vector<double> rewards;
            std::vector<std::size_t> starts{0};
            if (env.done()) env.reset();
            for (std::int64_t t = 0; t < horizon; ++t) {
                const std::int64_t s = static_cast<std::int64_t>(env.state_id());
                double logp = 0.0;
                const int a = state.nets[0].sample_action(s, state.rng, &logp);
                const StepResult r = env.step(decode_joint_action(a, n_agents, n_actions));
                state.steps_done += 1;
                batch.states.push_back(s);
                batch.actions.push_back(a);
                batch.logp_old.push_back(logp);
                double rew = 0.0;
                for (double v : r.rewards) rew += v;
                rewards.push_back(rew);
                if (r.done) {
                    if (env.last_step_success(r) && state.first_success_at < 0)
                        state.first_success_at = state.steps_done;
                    starts.push_back(batch.states.size());
                    if (t + 1 < horizon) env.reset();
                }
                maybe_sample_curve(state, env, result, eval_every);
            }
            if (starts.back() != batch.states.size()) starts.push_back(batch.states.size());
            std::vector<double> returns(rewards.size(), 0.0);
            for (std::size_t seg = 0; seg + 1 < starts.size(); ++seg) {
                double g = 0.0;
                for (std::size_t i = starts[seg + 1]; i-- > starts[seg];) {
                    g = rewards[i] + gamma * g;
                    returns[i] = g;
                }
            }
            double mean = 0.0;
            for (double g : returns) mean += g;
            if (!returns.empty()) mean /= static_cast<double>(returns.size());
            batch.advantages.resize(returns.size());
            for (std::size_t i = 0; i < returns.size(); ++i) batch.advantages[i] = returns[i] - mean;

            for (int epoch = 0; epoch < state.config.pg_epochs; ++epoch) {
                const std::vector<double> grad = pg_surrogate_gradient(state.nets[0], batch, clip);
                for (std::size_t i = 0; i < grad.size(); ++i) state.nets[0].params[i] += lr * grad[i];
            }
        } else {
            // CTDE: one shared rollout, per-agent batches and updates.
            std::vector<PgBatch> batches(static_cast<std::size_t>(n_agents));
            std::vector<std::vector<double>> rewards(static_cast<std::size_t>(n_agents));
            std::vector<std::size_t> starts{0};
            if (env.done()) env.reset();
            for (std::int64_t t = 0; t < horizon; ++t) {
                std::vector<int> actions(static_cast<std::size_t>(n_agents));
                for (int agent = 0; agent < n_agents; ++agent) {
                    const std::int64_t o = static_cast<std::int64_t>(env.obs_id(agent));
                    double logp = 0.0;
                    actions[static_cast<std::size_t>(agent)] =
                        state.nets[static_cast<std::size_t>(agent)].sample_action(o, state.rng, &logp);
                    batches[static_cast<std::size_t>(agent)].states.push_back(o);
                    batches[static_cast<std::size_t>(agent)].actions.push_back(
                        actions[static_cast<std::size_t>(agent)]);
                    batches[static_cast<std::size_t>(agent)].logp_old.push_back(logp);
                }
                const StepResult r = env.step(actions);
                state.steps_done += 1;
                for (int agent = 0; agent < n_agents; ++agent)
                    rewards[static_cast<std::size_t>(agent)].push_back(
                        r.rewards[static_cast<std::size_t>(agent)]);
                if (r.done) {
                    if (env.last_step_success(r) && state.first_success_at < 0)
                        state.first_success_at = state.steps_done;
                    starts.push_back(rewards[0].size());
                    if (t + 1 < horizon) env.reset();
                }
                maybe_sample_curve(state, env, result, eval_every);
            }
            if (starts.back() != rewards[0].size()) starts.push_back(rewards[0].size());
            for (int agent = 0; agent < n_agents; ++agent) {
                auto& batch = batches[static_cast<std::size_t>(agent)];
                const auto& rews = rewards[static_cast<std::size_t>(agent)];
                std::vector<double> returns(rews.size(), 0.0);
                for (std::size_t seg = 0; seg + 1 < starts.size(); ++seg) {
                    double g = 0.0;
                    for (std::size_t i = starts[seg + 1]; i-- > starts[seg];) {
                        g = rews[i] + gamma * g;
                        returns[i] = g;
                    }
                }
                double mean = 0.0;
                for (double g : returns) mean += g;
                if (!returns.empty()) mean /= static_cast<double>(returns.size());
                batch.advantages.resize(returns.size());
                for (std::size_t i = 0; i < returns.size(); ++i) batch.advantages[i] = returns[i] - mean;

                for (int epoch = 0; epoch < state.config.pg_epochs; ++epoch) {
                    const std::vector<double> grad =
                        pg_surrogate_gradient(state.nets[static_cast<std::size_t>(agent)], batch, clip);
                    for (std::size_t i = 0; i < grad.size(); ++i)
                        state.nets[static_cast<std::size_t>(agent)].params[i] += lr * grad[i];
                }
            }
        }
        consumed += horizon;
    }
}

} // namespace

TrainOutcome train(MultiAgentEnv& env, const LearnerConfig& config, std::int64_t budget,
                   const TrainerState* resume) {
    config.validate();
    if (budget < 1) throw InvalidInput("budget must be >= 1");

    TrainOutcome outcome;
    auto state = resume ? std::make_shared<TrainerState>(*resume) : std::make_shared<TrainerState>();
    if (!resume) {
        state->config = config;
        state->rng = Rng(derive_seed(config.seed, {0x747261696eULL}));
        state->eps_decay_steps =
            config.exploration.decay_steps > 0 ? config.exploration.decay_steps : std::max<std::int64_t>(1, budget / 2);
    }

    const std::int64_t eval_every =
        config.eval_every > 0 ? config.eval_every : std::max<std::int64_t>(budget / 100, 500);

    TrialResult result;
    if (config.algorithm == Algorithm::TabularQ)
        train_tabular(*state, env, budget, result, eval_every);
    else
        train_pg(*state, env, budget, result, eval_every);

    finish_result(*state, env, result);
    outcome.result = result;
    outcome.policy = snapshot_policy(*state, env);
    outcome.state = state;
    return outcome;
}

} // namespace govrek
