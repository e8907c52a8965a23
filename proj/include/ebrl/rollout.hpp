#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ebrl {

// Fixed-capacity on-policy rollout record. All arrays share (steps, n_envs);
// values carries one extra time row for the bootstrap predictions of the
// observations following the rollout.
struct RolloutBuffer {
    int steps = 0;   // T
    int n_envs = 0;
    int obs_dim = 0;
    int act_dim = 0;  // continuous action dimension; 0 for discrete

    std::vector<double> observations;   // T * n_envs * obs_dim
    std::vector<int> actions_disc;      // T * n_envs (discrete kinds)
    std::vector<double> actions_cont;   // T * n_envs * act_dim
    std::vector<double> log_probs;      // T * n_envs
    std::vector<double> rewards;        // T * n_envs (training rewards)
    std::vector<double> values;         // (T+1) * n_envs
    std::vector<std::uint8_t> dones;    // T * n_envs
    std::vector<double> advantages;     // filled by compute_gae
    std::vector<double> returns;        // filled by compute_gae

    static RolloutBuffer make(int steps, int n_envs, int obs_dim, int act_dim);

    int sample_count() const { return steps * n_envs; }
    std::size_t flat(int t, int e) const { return static_cast<std::size_t>(t) * n_envs + e; }
    std::span<const double> obs_at(int t, int e) const {
        return {observations.data() + flat(t, e) * obs_dim, static_cast<std::size_t>(obs_dim)};
    }
};

// delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)
// A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}, backward in t
// returns = advantages + values[0..T)
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda);

// Scales rewards by the standard deviation of the per-env running discounted
// return. The statistics update before each scaled reward is produced and the
// running return resets on episode end.
class RewardNormalizer {
public:
    RewardNormalizer(double gamma, int n_envs);

    double normalize(int env_index, double reward, bool done);
    double variance() const;

private:
    double gamma_;
    std::vector<double> running_;
    // running mean/var over observed discounted returns, seeded with a tiny
    // pseudo-count so the first few rewards are scaled by roughly 1.0
    double mean_ = 0.0;
    double m2_ = 1e-4;
    double count_ = 1e-4;
};

}  // namespace ebrl
