#include "ebrl/train.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "ebrl/rollout.hpp"

namespace ebrl {

void TrainSettings::validate() const {
    env.validate();
    ppo.validate();
    scheduler.validate();
    if (n_episodes < 1) throw std::invalid_argument("train: n_episodes must be >= 1");
    if (rollout_steps < 1) throw std::invalid_argument("train: rollout_steps must be >= 1");
    if (n_envs < 1) throw std::invalid_argument("train: n_envs must be >= 1");
    for (int h : policy_hidden)
        if (h < 1) throw std::invalid_argument("train: policy hidden sizes must be >= 1");
    for (int h : value_hidden)
        if (h < 1) throw std::invalid_argument("train: value hidden sizes must be >= 1");
    ppo.minibatch_size(rollout_steps * n_envs);
    if (use_drac && env.kind == EnvKind::point_mass)
        throw std::invalid_argument("train: augmentation regularizers need a discrete grid env");
    if (use_drac && drac.reg_coef < 0.0)
        throw std::invalid_argument("train: drac reg_coef must be nonnegative");
}

NetArch TrainSettings::policy_arch() const {
    NetArch arch;
    arch.layer_sizes.push_back(env.obs_dim());
    for (int h : policy_hidden) arch.layer_sizes.push_back(h);
    arch.layer_sizes.push_back(env.continuous_actions() ? env.action_dim() : env.action_count());
    return arch;
}

NetArch TrainSettings::value_arch() const {
    NetArch arch;
    arch.layer_sizes.push_back(env.obs_dim());
    for (int h : value_hidden) arch.layer_sizes.push_back(h);
    arch.layer_sizes.push_back(1);
    return arch;
}

TrainResult train(const TrainSettings& settings, std::uint64_t seed,
                  const std::function<void(const EpisodeRecord&)>& on_episode) {
    settings.validate();

    TrainResult result;
    result.policy = settings.env.continuous_actions()
                        ? Policy::make_continuous(settings.policy_arch(), mix64(seed, 1))
                        : Policy::make_discrete(settings.policy_arch(), mix64(seed, 1));
    result.value = Net::init(settings.value_arch(), mix64(seed, 2));

    VecEnv venv(settings.env, settings.n_envs, mix64(seed, 4));
    Rng action_rng(mix64(seed, 3));
    std::optional<RewardNormalizer> reward_norm;
    if (settings.ppo.reward_normalize)
        reward_norm.emplace(settings.ppo.gamma, settings.n_envs);
    EpochScheduler scheduler(settings.scheduler, mix64(seed, 5));
    const GridShape shape = GridShape::of(settings.env);

    const std::uint64_t o_bs1 =
        flops_per_forward(settings.policy_arch()) + flops_per_forward(settings.value_arch());
    FlopsModel sampling_model;
    sampling_model.o_bs1 = o_bs1;
    sampling_model.n_envs = static_cast<std::uint64_t>(settings.n_envs);
    sampling_model.episode_len = static_cast<std::uint64_t>(settings.rollout_steps);
    sampling_model.batch_size = 1;
    sampling_model.n_batches = 1;
    sampling_model.n_episodes = 1;

    std::vector<double> obs = venv.reset_all();
    std::uint64_t env_steps = 0;
    double last_mean_return = 0.0;
    std::optional<EpisodeRecord> pending;
    RolloutBuffer buffer;

    for (int episode = 1; episode <= settings.n_episodes; ++episode) {
        try {
            buffer = collect_rollout(result.policy, result.value, venv, settings.rollout_steps,
                                     action_rng, reward_norm ? &*reward_norm : nullptr, obs);
            result.ledger.record(FlopsPhase::sampling, o_sampling(sampling_model));
            env_steps += static_cast<std::uint64_t>(settings.rollout_steps) * settings.n_envs;

            const auto completed = venv.drain_completed_returns();
            if (!completed.empty()) {
                double sum = 0.0;
                for (double r : completed) sum += r;
                last_mean_return = sum / static_cast<double>(completed.size());
            }

            if (pending) {
                const double signal =
                    settings.scheduler.signal == BanditSignal::value_prediction
                        ? mean_estimated_return(buffer)
                        : last_mean_return;
                scheduler.commit(pending->selected_k, signal);
                pending->v_bar = signal;
                if (on_episode) on_episode(*pending);
            }

            compute_gae(buffer, settings.ppo.gamma, settings.ppo.gae_lambda);
            const int k = scheduler.select();
            result.k_sequence.push_back(k);
            const auto stats =
                update_phase(result.policy, result.value, buffer, k, settings.ppo,
                             settings.use_drac ? &settings.drac : nullptr, shape, seed, episode,
                             &result.ledger, o_bs1);

            EpisodeRecord rec;
            rec.episode = episode;
            rec.env_steps = env_steps;
            rec.selected_k = k;
            rec.mean_episodic_return = last_mean_return;
            rec.policy_loss = stats.policy_loss;
            rec.value_loss = stats.value_loss;
            rec.entropy = stats.entropy;
            rec.flops_sampling = result.ledger.sampling_total();
            rec.flops_update = result.ledger.update_total();
            pending = rec;
        } catch (const std::exception& ex) {
            throw std::runtime_error("train: episode " + std::to_string(episode) + ": " +
                                     ex.what());
        }
    }

    if (pending) {
        const double signal = settings.scheduler.signal == BanditSignal::value_prediction
                                  ? mean_value_prediction(result.value, buffer)
                                  : last_mean_return;
        scheduler.commit(pending->selected_k, signal);
        pending->v_bar = signal;
        if (on_episode) on_episode(*pending);
    }

    return result;
}

}  // namespace ebrl
