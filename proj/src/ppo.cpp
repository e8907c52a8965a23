#include "ebrl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ebrl {

void PpoHyper::validate() const {
    if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("ppo: gamma must be in [0,1)");
    if (gae_lambda < 0.0 || gae_lambda > 1.0)
        throw std::invalid_argument("ppo: gae_lambda must be in [0,1]");
    if (clip_eps <= 0.0) throw std::invalid_argument("ppo: clip_eps must be positive");
    if (value_coef < 0.0 || entropy_coef < 0.0 || value_clip < 0.0)
        throw std::invalid_argument("ppo: coefficients must be nonnegative");
    if (max_grad_norm <= 0.0) throw std::invalid_argument("ppo: max_grad_norm must be positive");
    if (learning_rate < 0.0) throw std::invalid_argument("ppo: learning_rate must be nonnegative");
    if (n_minibatches < 1) throw std::invalid_argument("ppo: n_minibatches must be >= 1");
    if (batch_size < 0) throw std::invalid_argument("ppo: batch_size must be nonnegative");
}

int PpoHyper::minibatch_size(int samples_per_epoch) const {
    if (samples_per_epoch % n_minibatches != 0)
        throw std::invalid_argument("ppo: n_minibatches must divide rollout_steps * n_envs");
    const int derived = samples_per_epoch / n_minibatches;
    if (batch_size != 0 && batch_size != derived)
        throw std::invalid_argument("ppo: batch_size * n_minibatches must equal the sample count");
    return derived;
}

std::string to_string(Transform t) {
    switch (t) {
        case Transform::identity: return "identity";
        case Transform::horizontal_flip: return "horizontal_flip";
        case Transform::random_translate: return "random_translate";
        case Transform::uniform_noise: return "uniform_noise";
    }
    return "identity";
}

Transform transform_from_string(const std::string& name) {
    if (name == "identity") return Transform::identity;
    if (name == "horizontal_flip") return Transform::horizontal_flip;
    if (name == "random_translate") return Transform::random_translate;
    if (name == "uniform_noise") return Transform::uniform_noise;
    throw std::invalid_argument("unknown transform: " + name);
}

GridShape GridShape::of(const EnvSpec& spec) {
    if (spec.kind == EnvKind::point_mass) return {};
    return {5, spec.width, spec.height};
}

double ppo_policy_loss(double log_prob_new, double log_prob_old, double advantage,
                       double clip_eps) {
    const double rho = std::exp(log_prob_new - log_prob_old);
    const double unclipped = rho * advantage;
    const double clipped = std::clamp(rho, 1.0 - clip_eps, 1.0 + clip_eps) * advantage;
    return -std::min(unclipped, clipped);
}

double ppo_value_loss(double v_pred, double v_pred_old, double v_target, double value_clip) {
    const double unclipped = (v_pred - v_target) * (v_pred - v_target);
    if (value_clip <= 0.0) return unclipped;
    const double v_clipped =
        v_pred_old + std::clamp(v_pred - v_pred_old, -value_clip, value_clip);
    const double clipped = (v_clipped - v_target) * (v_clipped - v_target);
    return std::max(unclipped, clipped);
}

std::vector<double> apply_transform(std::span<const double> obs, const GridShape& shape,
                                    Transform t, Rng& rng) {
    std::vector<double> out(obs.begin(), obs.end());
    if (t == Transform::identity) return out;
    if (t == Transform::uniform_noise) {
        for (double& x : out) x += rng.uniform(-0.05, 0.05);
        return out;
    }
    const int c = shape.channels, w = shape.width, h = shape.height;
    if (c * w * h != static_cast<int>(obs.size()))
        throw std::invalid_argument("apply_transform: observation is not grid-shaped");
    const std::size_t plane = static_cast<std::size_t>(w) * h;
    if (t == Transform::horizontal_flip) {
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    out[ch * plane + static_cast<std::size_t>(y) * w + x] =
                        obs[ch * plane + static_cast<std::size_t>(y) * w + (w - 1 - x)];
        return out;
    }
    // random_translate: same +-1 cell shift for every channel, zero padding
    const int dx = static_cast<int>(rng.uniform_index(3)) - 1;
    const int dy = static_cast<int>(rng.uniform_index(3)) - 1;
    std::fill(out.begin(), out.end(), 0.0);
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int sx = x - dx, sy = y - dy;
                if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;
                out[ch * plane + static_cast<std::size_t>(y) * w + x] =
                    obs[ch * plane + static_cast<std::size_t>(sy) * w + sx];
            }
    return out;
}

double drac_policy_reg(const Policy& policy, std::span<const double> obs_batch, int batch,
                       const GridShape& shape, Transform t, Rng& rng) {
    if (!policy.discrete())
        throw std::invalid_argument("drac_policy_reg: discrete action space required");
    const int d = policy.net().input_size();
    double total = 0.0;
    for (int i = 0; i < batch; ++i) {
        const std::span<const double> obs(obs_batch.data() + static_cast<std::size_t>(i) * d,
                                          static_cast<std::size_t>(d));
        const auto transformed = apply_transform(obs, shape, t, rng);
        const auto logits_p = policy.net().forward(obs);
        const auto logits_q = policy.net().forward(transformed);
        total += kl_categorical(logits_p, logits_q);
    }
    return total / batch;
}

double drac_value_reg(const Net& value, std::span<const double> obs_batch, int batch,
                      const GridShape& shape, Transform t, Rng& rng) {
    const int d = value.input_size();
    double total = 0.0;
    for (int i = 0; i < batch; ++i) {
        const std::span<const double> obs(obs_batch.data() + static_cast<std::size_t>(i) * d,
                                          static_cast<std::size_t>(d));
        const auto transformed = apply_transform(obs, shape, t, rng);
        const double diff = value.forward(obs)[0] - value.forward(transformed)[0];
        total += diff * diff;
    }
    return total / batch;
}

UpdateStats update_phase(Policy& policy, Net& value, const RolloutBuffer& buffer, int k,
                         const PpoHyper& hyper, const DracHyper* drac, const GridShape& shape,
                         std::uint64_t run_seed, int episode, FlopsLedger* ledger,
                         std::uint64_t o_bs1) {
    if (k < 1) throw std::invalid_argument("update_phase: K must be >= 1");
    const int samples = buffer.sample_count();
    const int mb_size = hyper.minibatch_size(samples);
    const AdamConfig adam{hyper.learning_rate};

    std::vector<int> order(samples);
    std::iota(order.begin(), order.end(), 0);

    auto pgrads = policy.net().make_grads();
    auto vgrads = value.make_grads();
    Net::Cache cache;

    UpdateStats stats;
    double loss_samples = 0.0;

    for (int epoch = 0; epoch < k; ++epoch) {
        Rng shuffle_rng(mix64(run_seed, 0x73687566ULL,
                              static_cast<std::uint64_t>(episode) * 1000003ULL + epoch));
        shuffle_rng.shuffle(order.begin(), order.end());
        Rng drac_rng(mix64(run_seed, 0x64726163ULL,
                           static_cast<std::uint64_t>(episode) * 1000003ULL + epoch));

        for (int start = 0; start < samples; start += mb_size) {
            const std::span<const int> mb(order.data() + start, static_cast<std::size_t>(mb_size));

            double adv_mean = 0.0, adv_scale = 1.0;
            if (hyper.adv_normalize && mb_size > 1) {
                for (int i : mb) adv_mean += buffer.advantages[i];
                adv_mean /= mb_size;
                double sq = 0.0;
                for (int i : mb) {
                    const double d = buffer.advantages[i] - adv_mean;
                    sq += d * d;
                }
                adv_scale = 1.0 / (std::sqrt(sq / (mb_size - 1)) + 1e-8);
            } else {
                adv_mean = 0.0;
            }

            pgrads.zero();
            vgrads.zero();
            auto& ls_grad = policy.log_std_grad_buffer();
            std::fill(ls_grad.begin(), ls_grad.end(), 0.0);

            double mb_ploss = 0.0, mb_vloss = 0.0, mb_ent = 0.0;

            for (int i : mb) {
                const int t = i / buffer.n_envs;
                const int e = i % buffer.n_envs;
                const auto obs = buffer.obs_at(t, e);
                const double adv =
                    hyper.adv_normalize && mb_size > 1
                        ? (buffer.advantages[i] - adv_mean) * adv_scale
                        : buffer.advantages[i];

                // policy pass
                const auto out = policy.net().forward(obs, &cache);
                const int act_disc = buffer.act_dim == 0 ? buffer.actions_disc[i] : 0;
                const std::span<const double> act_cont =
                    buffer.act_dim > 0
                        ? std::span<const double>(
                              buffer.actions_cont.data() +
                                  static_cast<std::size_t>(i) * buffer.act_dim,
                              static_cast<std::size_t>(buffer.act_dim))
                        : std::span<const double>{};
                const auto ev = policy.evaluate(out, act_disc, act_cont);

                const double rho = std::exp(ev.log_prob - buffer.log_probs[i]);
                const double unclipped = rho * adv;
                const double clipped =
                    std::clamp(rho, 1.0 - hyper.clip_eps, 1.0 + hyper.clip_eps) * adv;
                mb_ploss += -std::min(unclipped, clipped);
                mb_ent += ev.entropy;
                // d(loss)/d(log_prob): -rho*adv on the active unclipped branch,
                // zero once the clip saturates
                const double g_lp = unclipped <= clipped ? -rho * adv : 0.0;

                std::vector<double> dout(out.size());
                for (std::size_t j = 0; j < out.size(); ++j)
                    dout[j] = g_lp * ev.dlogp_dout[j] - hyper.entropy_coef * ev.dent_dout[j];
                policy.net().backward(cache, dout, pgrads);
                if (!policy.discrete()) {
                    for (std::size_t j = 0; j < ls_grad.size(); ++j)
                        ls_grad[j] += g_lp * ev.dlogp_dlogstd[j] -
                                      hyper.entropy_coef * ev.dent_dlogstd[j];
                }

                // value pass
                const double v_old = buffer.values[i];
                const double v_target = buffer.returns[i];
                const double v = value.forward(obs, &cache)[0];
                const double vloss = ppo_value_loss(v, v_old, v_target, hyper.value_clip);
                mb_vloss += vloss;
                double g_v;
                if (hyper.value_clip <= 0.0) {
                    g_v = 2.0 * (v - v_target);
                } else {
                    const double v_clipped =
                        v_old + std::clamp(v - v_old, -hyper.value_clip, hyper.value_clip);
                    const double unc = (v - v_target) * (v - v_target);
                    const double cl = (v_clipped - v_target) * (v_clipped - v_target);
                    // branch on the clamp state: while it is inactive the two
                    // errors are the same function of v up to reconstruction
                    // rounding, and the gradient must flow
                    const bool saturated = std::abs(v - v_old) > hyper.value_clip;
                    g_v = (!saturated || unc >= cl) ? 2.0 * (v - v_target) : 0.0;
                }
                const double dv = hyper.value_coef * g_v;
                value.backward(cache, std::span<const double>(&dv, 1), vgrads);

                // DrAC regularizers: the clean-observation branch is the
                // target, gradients flow through the transformed branch only
                if (drac) {
                    const auto transformed = apply_transform(obs, shape, drac->transform, drac_rng);
                    const auto probs_p = softmax(out);
                    const auto logits_q = policy.net().forward(transformed, &cache);
                    const auto probs_q = softmax(logits_q);
                    std::vector<double> dq(logits_q.size());
                    for (std::size_t j = 0; j < dq.size(); ++j)
                        dq[j] = drac->reg_coef * (probs_q[j] - probs_p[j]);
                    policy.net().backward(cache, dq, pgrads);

                    const double vq = value.forward(transformed, &cache)[0];
                    const double dvq = drac->reg_coef * 2.0 * (vq - v);
                    value.backward(cache, std::span<const double>(&dvq, 1), vgrads);
                }
            }

            const double inv = 1.0 / mb_size;
            pgrads.scale(inv);
            vgrads.scale(inv);
            for (double& g : ls_grad) g *= inv;

            if (!std::isfinite(mb_ploss) || !std::isfinite(mb_vloss) || !std::isfinite(mb_ent))
                throw std::runtime_error("update_phase: non-finite loss (epoch " +
                                         std::to_string(epoch) + ", minibatch offset " +
                                         std::to_string(start) + ")");

            clip_global_norm({&pgrads}, policy.discrete() ? std::vector<std::vector<double>*>{}
                                                          : std::vector<std::vector<double>*>{&ls_grad},
                             hyper.max_grad_norm);
            clip_global_norm({&vgrads}, {}, hyper.max_grad_norm);

            policy.net().adam_step(pgrads, adam);
            if (!policy.discrete()) policy.adam_step_log_std(adam);
            value.adam_step(vgrads, adam);

            stats.optimizer_steps += 1;
            stats.policy_loss += mb_ploss;
            stats.value_loss += mb_vloss;
            stats.entropy += mb_ent;
            loss_samples += mb_size;
        }
    }

    stats.policy_loss /= loss_samples;
    stats.value_loss /= loss_samples;
    stats.entropy /= loss_samples;

    if (ledger) {
        FlopsModel model;
        model.o_bs1 = o_bs1;
        model.n_envs = static_cast<std::uint64_t>(buffer.n_envs);
        model.episode_len = static_cast<std::uint64_t>(buffer.steps);
        model.batch_size = static_cast<std::uint64_t>(mb_size);
        model.n_batches = static_cast<std::uint64_t>(hyper.n_minibatches);
        model.n_episodes = 1;
        ledger->record(FlopsPhase::update, o_update(model, static_cast<std::uint64_t>(k)));
    }
    return stats;
}

double mean_estimated_return(const RolloutBuffer& buffer) {
    const int n = buffer.sample_count();
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += buffer.values[i];
    return sum / n;
}

double mean_value_prediction(const Net& value, const RolloutBuffer& buffer) {
    const int n = buffer.sample_count();
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const int t = i / buffer.n_envs;
        const int e = i % buffer.n_envs;
        sum += value.forward(buffer.obs_at(t, e))[0];
    }
    return sum / n;
}

RolloutBuffer collect_rollout(const Policy& policy, const Net& value, VecEnv& venv, int steps,
                              Rng& action_rng, RewardNormalizer* reward_norm,
                              std::vector<double>& obs) {
    const int n_envs = venv.size();
    const int obs_dim = venv.obs_dim();
    const int act_dim = venv.spec().continuous_actions() ? venv.spec().action_dim() : 0;
    auto buffer = RolloutBuffer::make(steps, n_envs, obs_dim, act_dim);

    std::vector<int> actions_d(n_envs);
    std::vector<double> actions_c(static_cast<std::size_t>(n_envs) * act_dim);

    for (int t = 0; t < steps; ++t) {
        for (int e = 0; e < n_envs; ++e) {
            const std::span<const double> o(obs.data() + static_cast<std::size_t>(e) * obs_dim,
                                            static_cast<std::size_t>(obs_dim));
            const std::size_t i = buffer.flat(t, e);
            std::copy(o.begin(), o.end(), buffer.observations.begin() + i * obs_dim);
            const auto s = policy.sample(o, action_rng);
            buffer.log_probs[i] = s.log_prob;
            if (act_dim == 0) {
                buffer.actions_disc[i] = s.action_disc;
                actions_d[e] = s.action_disc;
            } else {
                std::copy(s.action_cont.begin(), s.action_cont.end(),
                          buffer.actions_cont.begin() + i * act_dim);
                std::copy(s.action_cont.begin(), s.action_cont.end(),
                          actions_c.begin() + static_cast<std::size_t>(e) * act_dim);
            }
            buffer.values[i] = value.forward(o)[0];
        }

        VecEnv::StepOut out;
        try {
            out = act_dim == 0 ? venv.step_discrete(actions_d) : venv.step_continuous(actions_c);
        } catch (const std::exception& ex) {
            throw std::runtime_error("collect_rollout: env failure at step " + std::to_string(t) +
                                     ": " + ex.what());
        }
        for (int e = 0; e < n_envs; ++e) {
            const std::size_t i = buffer.flat(t, e);
            const bool done = out.dones[e] != 0;
            buffer.rewards[i] =
                reward_norm ? reward_norm->normalize(e, out.rewards[e], done) : out.rewards[e];
            buffer.dones[i] = out.dones[e];
        }
        obs = std::move(out.obs);
    }

    for (int e = 0; e < n_envs; ++e) {
        const std::span<const double> o(obs.data() + static_cast<std::size_t>(e) * obs_dim,
                                        static_cast<std::size_t>(obs_dim));
        buffer.values[buffer.flat(steps, e)] = value.forward(o)[0];
    }
    return buffer;
}

}  // namespace ebrl
