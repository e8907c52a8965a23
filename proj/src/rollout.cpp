#include "ebrl/rollout.hpp"

#include <cmath>
#include <stdexcept>

namespace ebrl {

RolloutBuffer RolloutBuffer::make(int steps, int n_envs, int obs_dim, int act_dim) {
    if (steps < 1 || n_envs < 1 || obs_dim < 1)
        throw std::invalid_argument("RolloutBuffer::make: invalid shape");
    RolloutBuffer b;
    b.steps = steps;
    b.n_envs = n_envs;
    b.obs_dim = obs_dim;
    b.act_dim = act_dim;
    const std::size_t n = static_cast<std::size_t>(steps) * n_envs;
    b.observations.assign(n * obs_dim, 0.0);
    if (act_dim > 0)
        b.actions_cont.assign(n * act_dim, 0.0);
    else
        b.actions_disc.assign(n, 0);
    b.log_probs.assign(n, 0.0);
    b.rewards.assign(n, 0.0);
    b.values.assign(n + n_envs, 0.0);
    b.dones.assign(n, 0);
    b.advantages.assign(n, 0.0);
    b.returns.assign(n, 0.0);
    return b;
}

void compute_gae(RolloutBuffer& buffer, double gamma, double lambda) {
    const int T = buffer.steps, n = buffer.n_envs;
    for (int e = 0; e < n; ++e) {
        double carry = 0.0;
        for (int t = T - 1; t >= 0; --t) {
            const std::size_t i = buffer.flat(t, e);
            const double nonterminal = buffer.dones[i] ? 0.0 : 1.0;
            const double next_value = buffer.values[buffer.flat(t + 1, e)];
            const double delta =
                buffer.rewards[i] + gamma * next_value * nonterminal - buffer.values[i];
            carry = delta + gamma * lambda * nonterminal * carry;
            buffer.advantages[i] = carry;
            buffer.returns[i] = carry + buffer.values[i];
        }
    }
}

RewardNormalizer::RewardNormalizer(double gamma, int n_envs)
    : gamma_(gamma), running_(static_cast<std::size_t>(n_envs), 0.0) {}

double RewardNormalizer::variance() const { return m2_ / count_; }

double RewardNormalizer::normalize(int env_index, double reward, bool done) {
    double& r = running_.at(static_cast<std::size_t>(env_index));
    r = r * gamma_ + reward;
    count_ += 1.0;
    const double delta = r - mean_;
    mean_ += delta / count_;
    m2_ += delta * (r - mean_);
    const double scaled = reward / std::sqrt(variance() + 1e-8);
    if (done) r = 0.0;
    return scaled;
}

}  // namespace ebrl
