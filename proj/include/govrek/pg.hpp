#pragma once

#include <cstdint>
#include <vector>

#include "govrek/env.hpp"
#include "govrek/rng.hpp"

namespace govrek {

// Minimal softmax policy network: one-hot input, one tanh hidden layer,
// linear logits. Parameters are a flat vector so gradients can be checked
// against finite differences parameter-wise.
struct PgNet {
    int n_inputs = 0;
    int n_hidden = 0;
    int n_outputs = 0;
    std::vector<double> params; // [W1 (H*S), b1 (H), W2 (O*H), b2 (O)]

    static PgNet init(int n_inputs, int n_hidden, int n_outputs, Rng& rng);

    std::size_t param_count() const {
        return static_cast<std::size_t>(n_hidden) * static_cast<std::size_t>(n_inputs) +
               static_cast<std::size_t>(n_hidden) +
               static_cast<std::size_t>(n_outputs) * static_cast<std::size_t>(n_hidden) +
               static_cast<std::size_t>(n_outputs);
    }

    // Logits for the one-hot input at `state`.
    std::vector<double> logits(std::int64_t state) const;
    std::vector<double> log_softmax(std::int64_t state) const;
    int greedy_action(std::int64_t state) const;
    int sample_action(std::int64_t state, Rng& rng, double* logp = nullptr) const;
};

// A frozen rollout batch for the clipped-surrogate objective.
struct PgBatch {
    std::vector<std::int64_t> states;
    std::vector<int> actions;
    std::vector<double> logp_old;
    std::vector<double> advantages;

    std::size_t size() const { return states.size(); }
};

// Clipped surrogate objective 1/B sum min(rho*A, clip(rho, 1-c, 1+c)*A).
double pg_surrogate(const PgNet& net, const PgBatch& batch, double clip_ratio);

// Analytic gradient of pg_surrogate with respect to net.params.
std::vector<double> pg_surrogate_gradient(const PgNet& net, const PgBatch& batch, double clip_ratio);

// Max relative error between the analytic gradient and central differences.
double finite_difference_gradient_check(PgNet& net, const PgBatch& batch, double clip_ratio,
                                        double epsilon);

// Rolls out `horizon` steps of the single-net policy on a (single-agent or
// CTCE-encoded) environment and returns the batch with episodic
// discounted-return advantages (batch-mean baseline).
PgBatch collect_pg_batch(MultiAgentEnv& env, const PgNet& net, Rng& rng, std::int64_t horizon,
                         double gamma);

} // namespace govrek
