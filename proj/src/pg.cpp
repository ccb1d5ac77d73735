#include "govrek/pg.hpp"

#include <algorithm>
#include <cmath>

#include "govrek/errors.hpp"

namespace govrek {

PgNet PgNet::init(int n_inputs, int n_hidden, int n_outputs, Rng& rng) {
    if (n_inputs < 1 || n_hidden < 1 || n_outputs < 1) throw InvalidInput("bad network shape");
    PgNet net;
    net.n_inputs = n_inputs;
    net.n_hidden = n_hidden;
    net.n_outputs = n_outputs;
    net.params.resize(net.param_count());
    const double scale = 0.1;
    for (double& p : net.params) p = rng.uniform(-scale, scale);
    return net;
}

namespace {

struct ParamView {
    const double* w1;
    const double* b1;
    const double* w2;
    const double* b2;
};

ParamView view(const PgNet& net) {
    const double* base = net.params.data();
    const std::size_t w1 = static_cast<std::size_t>(net.n_hidden) * static_cast<std::size_t>(net.n_inputs);
    const std::size_t b1 = static_cast<std::size_t>(net.n_hidden);
    const std::size_t w2 = static_cast<std::size_t>(net.n_outputs) * static_cast<std::size_t>(net.n_hidden);
    return {base, base + w1, base + w1 + b1, base + w1 + b1 + w2};
}

} // namespace

std::vector<double> PgNet::logits(std::int64_t state) const {
    if (state < 0 || state >= n_inputs) throw InvalidInput("state outside network input range");
    const ParamView p = view(*this);
    std::vector<double> hidden(static_cast<std::size_t>(n_hidden));
    for (int j = 0; j < n_hidden; ++j)
        hidden[static_cast<std::size_t>(j)] = std::tanh(
            p.w1[static_cast<std::size_t>(j) * static_cast<std::size_t>(n_inputs) + static_cast<std::size_t>(state)] +
            p.b1[j]);
    std::vector<double> out(static_cast<std::size_t>(n_outputs));
    for (int k = 0; k < n_outputs; ++k) {
        double v = p.b2[k];
        for (int j = 0; j < n_hidden; ++j)
            v += p.w2[static_cast<std::size_t>(k) * static_cast<std::size_t>(n_hidden) + static_cast<std::size_t>(j)] *
                 hidden[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(k)] = v;
    }
    return out;
}

std::vector<double> PgNet::log_softmax(std::int64_t state) const {
    std::vector<double> l = logits(state);
    const double mx = *std::max_element(l.begin(), l.end());
    double z = 0.0;
    for (double v : l) z += std::exp(v - mx);
    const double log_z = mx + std::log(z);
    for (double& v : l) v -= log_z;
    return l;
}

int PgNet::greedy_action(std::int64_t state) const {
    const std::vector<double> l = logits(state);
    return static_cast<int>(std::max_element(l.begin(), l.end()) - l.begin());
}

int PgNet::sample_action(std::int64_t state, Rng& rng, double* logp) const {
    const std::vector<double> lp = log_softmax(state);
    double u = rng.uniform();
    int action = n_outputs - 1;
    for (int k = 0; k < n_outputs; ++k) {
        const double pk = std::exp(lp[static_cast<std::size_t>(k)]);
        if (u < pk) {
            action = k;
            break;
        }
        u -= pk;
    }
    if (logp) *logp = lp[static_cast<std::size_t>(action)];
    return action;
}

double pg_surrogate(const PgNet& net, const PgBatch& batch, double clip_ratio) {
    if (!(clip_ratio > 0.0)) throw InvalidInput("clip_ratio must be positive");
    if (batch.size() == 0) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const std::vector<double> lp = net.log_softmax(batch.states[i]);
        const double rho = std::exp(lp[static_cast<std::size_t>(batch.actions[i])] - batch.logp_old[i]);
        const double a = batch.advantages[i];
        const double clipped = std::clamp(rho, 1.0 - clip_ratio, 1.0 + clip_ratio) * a;
        total += std::min(rho * a, clipped);
    }
    return total / static_cast<double>(batch.size());
}

std::vector<double> pg_surrogate_gradient(const PgNet& net, const PgBatch& batch, double clip_ratio) {
    if (!(clip_ratio > 0.0)) throw InvalidInput("clip_ratio must be positive");
    std::vector<double> grad(net.params.size(), 0.0);
    if (batch.size() == 0) return grad;

    const ParamView p = view(net);
    const std::size_t w1_off = 0;
    const std::size_t b1_off = static_cast<std::size_t>(net.n_hidden) * static_cast<std::size_t>(net.n_inputs);
    const std::size_t w2_off = b1_off + static_cast<std::size_t>(net.n_hidden);
    const std::size_t b2_off = w2_off + static_cast<std::size_t>(net.n_outputs) * static_cast<std::size_t>(net.n_hidden);

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    std::vector<double> hidden(static_cast<std::size_t>(net.n_hidden));

    for (std::size_t i = 0; i < batch.size(); ++i) {
        const std::int64_t s = batch.states[i];
        for (int j = 0; j < net.n_hidden; ++j)
            hidden[static_cast<std::size_t>(j)] = std::tanh(
                p.w1[static_cast<std::size_t>(j) * static_cast<std::size_t>(net.n_inputs) + static_cast<std::size_t>(s)] +
                p.b1[j]);
        std::vector<double> logits(static_cast<std::size_t>(net.n_outputs));
        for (int k = 0; k < net.n_outputs; ++k) {
            double v = p.b2[k];
            for (int j = 0; j < net.n_hidden; ++j)
                v += p.w2[static_cast<std::size_t>(k) * static_cast<std::size_t>(net.n_hidden) +
                          static_cast<std::size_t>(j)] *
                     hidden[static_cast<std::size_t>(j)];
            logits[static_cast<std::size_t>(k)] = v;
        }
        const double mx = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        for (double v : logits) z += std::exp(v - mx);
        std::vector<double> prob(logits.size());
        for (std::size_t k = 0; k < logits.size(); ++k) prob[k] = std::exp(logits[k] - mx) / z;

        const int a = batch.actions[i];
        const double logp = std::log(prob[static_cast<std::size_t>(a)]);
        const double rho = std::exp(logp - batch.logp_old[i]);
        const double adv = batch.advantages[i];
        const double clipped = std::clamp(rho, 1.0 - clip_ratio, 1.0 + clip_ratio) * adv;

        // d/dtheta min(rho*A, clip(rho)*A): the unclipped branch contributes
        // rho*A*dlogp; when the clipped branch is strictly smaller its
        // derivative is zero (rho sits outside the band there).
        if (rho * adv > clipped) continue;
        const double coeff = rho * adv * inv_b;

        // dJ/dlogits = coeff * (onehot(a) - prob)
        std::vector<double> dlogits(prob.size());
        for (std::size_t k = 0; k < prob.size(); ++k)
            dlogits[k] = coeff * ((static_cast<int>(k) == a ? 1.0 : 0.0) - prob[k]);

        for (int k = 0; k < net.n_outputs; ++k) {
            grad[b2_off + static_cast<std::size_t>(k)] += dlogits[static_cast<std::size_t>(k)];
            for (int j = 0; j < net.n_hidden; ++j)
                grad[w2_off + static_cast<std::size_t>(k) * static_cast<std::size_t>(net.n_hidden) +
                     static_cast<std::size_t>(j)] +=
                    dlogits[static_cast<std::size_t>(k)] * hidden[static_cast<std::size_t>(j)];
        }
        for (int j = 0; j < net.n_hidden; ++j) {
            double dh = 0.0;
            for (int k = 0; k < net.n_outputs; ++k)
                dh += p.w2[static_cast<std::size_t>(k) * static_cast<std::size_t>(net.n_hidden) +
                           static_cast<std::size_t>(j)] *
                      dlogits[static_cast<std::size_t>(k)];
            const double dpre = dh * (1.0 - hidden[static_cast<std::size_t>(j)] * hidden[static_cast<std::size_t>(j)]);
            grad[b1_off + static_cast<std::size_t>(j)] += dpre;
            grad[w1_off + static_cast<std::size_t>(j) * static_cast<std::size_t>(net.n_inputs) +
                 static_cast<std::size_t>(s)] += dpre;
        }
    }
    return grad;
}

double finite_difference_gradient_check(PgNet& net, const PgBatch& batch, double clip_ratio,
                                        double epsilon) {
    if (!(epsilon > 1e-8 && epsilon < 1e-2)) throw InvalidInput("epsilon must be in (1e-8, 1e-2)");
    const std::vector<double> analytic = pg_surrogate_gradient(net, batch, clip_ratio);
    double worst = 0.0;
    for (std::size_t i = 0; i < net.params.size(); ++i) {
        const double saved = net.params[i];
        net.params[i] = saved + epsilon;
        const double plus = pg_surrogate(net, batch, clip_ratio);
        net.params[i] = saved - epsilon;
        const double minus = pg_surrogate(net, batch, clip_ratio);
        net.params[i] = saved;
        const double fd = (plus - minus) / (2.0 * epsilon);
        const double denom = std::max({std::abs(analytic[i]), std::abs(fd), 1e-8});
        worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
    }
    return worst;
}

PgBatch collect_pg_batch(MultiAgentEnv& env, const PgNet& net, Rng& rng, std::int64_t horizon,
                         double gamma) {
    if (horizon < 1) throw InvalidInput("horizon must be >= 1");
    PgBatch batch;
    std::vector<double> rewards;
    std::vector<std::size_t> episode_starts{0};

    if (env.done()) env.reset();
    for (std::int64_t t = 0; t < horizon; ++t) {
        const std::int64_t s = static_cast<std::int64_t>(env.state_id());
        double logp = 0.0;
        const int a = net.sample_action(s, rng, &logp);
        const StepResult r = env.step(std::vector<int>{a});
        batch.states.push_back(s);
        batch.actions.push_back(a);
        batch.logp_old.push_back(logp);
        double reward = 0.0;
        for (double v : r.rewards) reward += v;
        rewards.push_back(reward);
        if (r.done) {
            episode_starts.push_back(batch.states.size());
            if (t + 1 < horizon) env.reset();
        }
    }
    if (episode_starts.back() != batch.states.size()) episode_starts.push_back(batch.states.size());

    // Discounted returns-to-go per episode segment; batch-mean baseline.
    std::vector<double> returns(rewards.size(), 0.0);
    for (std::size_t seg = 0; seg + 1 < episode_starts.size(); ++seg) {
        double g = 0.0;
        for (std::size_t i = episode_starts[seg + 1]; i-- > episode_starts[seg];) {
            g = rewards[i] + gamma * g;
            returns[i] = g;
        }
    }
    double mean = 0.0;
    for (double g : returns) mean += g;
    mean /= static_cast<double>(returns.size());
    batch.advantages.resize(returns.size());
    for (std::size_t i = 0; i < returns.size(); ++i) batch.advantages[i] = returns[i] - mean;
    return batch;
}

} // namespace govrek
