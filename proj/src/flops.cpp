#include "ebrl/flops.hpp"

#include <stdexcept>

namespace ebrl {

bool FlopsModel::valid() const {
    return o_bs1 > 0 && n_envs > 0 && batch_size > 0 && n_batches > 0 && backward_ratio > 0;
}

std::uint64_t o_sampling(const FlopsModel& model) {
    if (!model.valid()) throw std::invalid_argument("o_sampling: invalid model");
    return (model.episode_len + 1) * model.n_envs * model.o_bs1;
}

std::uint64_t o_update(const FlopsModel& model, std::uint64_t k) {
    if (!model.valid()) throw std::invalid_argument("o_update: invalid model");
    const std::uint64_t forward = model.o_bs1 * model.batch_size * model.n_batches * k;
    return forward * (1 + model.backward_ratio);
}

std::uint64_t o_total(const FlopsModel& model, std::span<const int> k_per_episode) {
    if (k_per_episode.size() != model.n_episodes)
        throw std::invalid_argument("o_total: K sequence length must equal n_episodes");
    const std::uint64_t sampling = o_sampling(model);
    std::uint64_t total = 0;
    for (int k : k_per_episode) {
        if (k < 0) throw std::invalid_argument("o_total: negative K");
        total += sampling + o_update(model, static_cast<std::uint64_t>(k));
    }
    return total;
}

void FlopsLedger::record(FlopsPhase phase, std::uint64_t amount) {
    if (phase == FlopsPhase::sampling)
        sampling_total_ += amount;
    else
        update_total_ += amount;
    entries_.push_back({phase, amount});
}

FlopsModel verification_reference_model() {
    FlopsModel m;
    m.o_bs1 = 528384;
    m.n_envs = 64;
    m.episode_len = 256;
    m.batch_size = 2048;
    m.n_batches = 32;
    m.n_episodes = kVerificationEpisodes;
    m.backward_ratio = 2;
    return m;
}

}  // namespace ebrl
