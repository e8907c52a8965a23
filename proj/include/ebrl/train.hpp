#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ebrl/bandit.hpp"
#include "ebrl/env.hpp"
#include "ebrl/flops.hpp"
#include "ebrl/net.hpp"
#include "ebrl/policy.hpp"
#include "ebrl/ppo.hpp"

namespace ebrl {

struct TrainSettings {
    EnvSpec env;
    bool use_drac = false;
    DracHyper drac;
    PpoHyper ppo;
    SchedulerConfig scheduler;
    std::vector<int> policy_hidden{64, 64};
    std::vector<int> value_hidden{64, 64};
    int n_episodes = 500;
    int rollout_steps = 64;
    int n_envs = 8;

    void validate() const;
    NetArch policy_arch() const;
    NetArch value_arch() const;
};

// One line of the per-episode training log. FLOP counters are cumulative
// ledger totals snapshotted at the end of the episode's update phase, so the
// final record carries the run totals.
struct EpisodeRecord {
    int episode = 0;  // 1-based
    std::uint64_t env_steps = 0;
    int selected_k = 0;
    double mean_episodic_return = 0.0;  // raw returns of episodes finished in this rollout
    double v_bar = 0.0;                 // reward signal credited to this episode's selection
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    std::uint64_t flops_sampling = 0;
    std::uint64_t flops_update = 0;
};

struct TrainResult {
    Policy policy;
    Net value;
    FlopsLedger ledger;
    std::vector<int> k_sequence;
};

// Episode loop: collect -> GAE -> select K -> update -> commit the previous
// selection with the signal measured on the fresh rollout. The rollout
// gathered after an update doubles as the next episode's training data, so a
// run consumes exactly n_episodes rollouts. The final selection is committed
// from value predictions recomputed on its own rollout (or the last observed
// mean return in episodic_return mode) since no further rollout exists.
// Errors propagate wrapped with the failing episode index.
TrainResult train(const TrainSettings& settings, std::uint64_t seed,
                  const std::function<void(const EpisodeRecord&)>& on_episode);

}  // namespace ebrl
