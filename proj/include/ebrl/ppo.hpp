#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ebrl/env.hpp"
#include "ebrl/flops.hpp"
#include "ebrl/net.hpp"
#include "ebrl/policy.hpp"
#include "ebrl/rollout.hpp"

namespace ebrl {

struct PpoHyper {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_eps = 0.2;
    double value_coef = 0.5;
    double entropy_coef = 0.01;
    double value_clip = 0.2;  // 0 disables the clipped value loss
    double max_grad_norm = 0.5;
    double learning_rate = 5e-4;
    int n_minibatches = 4;
    int batch_size = 0;  // minibatch size; 0 derives samples / n_minibatches
    bool adv_normalize = true;
    bool reward_normalize = true;

    void validate() const;
    int minibatch_size(int samples_per_epoch) const;
};

enum class Transform { identity, horizontal_flip, random_translate, uniform_noise };

std::string to_string(Transform t);
Transform transform_from_string(const std::string& name);

struct DracHyper {
    double reg_coef = 0.1;
    Transform transform = Transform::random_translate;
};

// Channel-stacked grid layout of an observation vector; transforms that move
// cells need it, uniform_noise and identity do not.
struct GridShape {
    int channels = 0;
    int width = 0;
    int height = 0;

    static GridShape of(const EnvSpec& spec);
};

// Per-sample clipped surrogate:
//   rho = exp(log_prob_new - log_prob_old)
//   loss = -min(rho * A, clip(rho, 1 - eps, 1 + eps) * A)
double ppo_policy_loss(double log_prob_new, double log_prob_old, double advantage,
                       double clip_eps);

// Squared error against the return target; with value_clip > 0 the loss is the
// max of the unclipped error and the error of the old-prediction-clipped one.
double ppo_value_loss(double v_pred, double v_pred_old, double v_target, double value_clip);

std::vector<double> apply_transform(std::span<const double> obs, const GridShape& shape,
                                    Transform t, Rng& rng);

// Batch-mean KL(pi(.|s) || pi(.|f(s))) for a discrete policy.
double drac_policy_reg(const Policy& policy, std::span<const double> obs_batch, int batch,
                       const GridShape& shape, Transform t, Rng& rng);

// Batch-mean squared difference of value predictions under the transform.
double drac_value_reg(const Net& value, std::span<const double> obs_batch, int batch,
                      const GridShape& shape, Transform t, Rng& rng);

struct UpdateStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    std::uint64_t optimizer_steps = 0;  // per network
};

// Exactly k full passes over the buffer, each split into shuffled
// minibatches; one Adam step per network per minibatch. Gradients are
// clipped to max_grad_norm per network. The minibatch shuffle is reseeded
// per epoch from (run_seed, episode, epoch). Records the update-phase FLOPs
// into the ledger when one is given. Throws on non-finite losses.
UpdateStats update_phase(Policy& policy, Net& value, const RolloutBuffer& buffer, int k,
                         const PpoHyper& hyper, const DracHyper* drac, const GridShape& shape,
                         std::uint64_t run_seed, int episode, FlopsLedger* ledger,
                         std::uint64_t o_bs1);

// Mean of the stored value predictions over the T x n_envs rollout
// observations (the bootstrap row is excluded).
double mean_estimated_return(const RolloutBuffer& buffer);

// Same mean recomputed from the given parameters.
double mean_value_prediction(const Net& value, const RolloutBuffer& buffer);

// Advances the vectorized batch `steps` times starting from `obs`
// (n_envs * obs_dim, updated in place to the post-rollout observations),
// storing actions, log-probs, value predictions, training rewards and done
// flags, plus bootstrap values for the final observations. Training rewards
// pass through the normalizer when one is given; episodic returns accumulate
// raw inside the VecEnv.
RolloutBuffer collect_rollout(const Policy& policy, const Net& value, VecEnv& venv, int steps,
                              Rng& action_rng, RewardNormalizer* reward_norm,
                              std::vector<double>& obs);

}  // namespace ebrl
