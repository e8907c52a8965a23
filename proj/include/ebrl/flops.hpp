#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ebrl {

// Closed-form compute accounting for one training run. Only network-involved
// work is counted (action sampling and model updates); environment dynamics
// are excluded. All arithmetic is exact 64-bit integer math.
struct FlopsModel {
    std::uint64_t o_bs1 = 0;        // per-forward FLOPs at batch size 1
    std::uint64_t n_envs = 0;
    std::uint64_t episode_len = 0;  // rollout steps per episode
    std::uint64_t batch_size = 0;   // minibatch size B
    std::uint64_t n_batches = 0;    // minibatches per epoch
    std::uint64_t n_episodes = 0;
    std::uint64_t backward_ratio = 2;  // backward cost = ratio * forward cost

    bool valid() const;
};

// (episode_len + 1) * n_envs * o_bs1; the +1 covers the bootstrap value
// prediction for the observations following the rollout.
std::uint64_t o_sampling(const FlopsModel& model);

// forward = o_bs1 * B * n_batches * k; returns forward * (1 + backward_ratio).
std::uint64_t o_update(const FlopsModel& model, std::uint64_t k);

// Sum over episodes of o_sampling + o_update(K_e); the sequence length must
// equal n_episodes. Generalizes the constant-K closed form to per-episode K.
std::uint64_t o_total(const FlopsModel& model, std::span<const int> k_per_episode);

enum class FlopsPhase { sampling, update };

// Monotonic per-run counters with a per-record breakdown.
class FlopsLedger {
public:
    struct Entry {
        FlopsPhase phase;
        std::uint64_t amount;
    };

    void record(FlopsPhase phase, std::uint64_t amount);

    std::uint64_t sampling_total() const { return sampling_total_; }
    std::uint64_t update_total() const { return update_total_; }
    std::uint64_t total() const { return sampling_total_ + update_total_; }
    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::uint64_t sampling_total_ = 0;
    std::uint64_t update_total_ = 0;
    std::vector<Entry> entries_;
};

// Fixed reference configuration used by the `flops-verify` command: a
// 64-env, 256-step, 1525-episode run at constant K=3 with a published
// per-forward cost of 528384 FLOPs.
FlopsModel verification_reference_model();
constexpr std::uint64_t kVerificationEpisodes = 1525;
constexpr std::uint64_t kVerificationK = 3;

}  // namespace ebrl
