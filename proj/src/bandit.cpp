#include "ebrl/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace ebrl {

bool EpochSet::valid() const {
    if (values.empty()) return false;
    std::unordered_set<int> seen;
    for (int v : values) {
        if (v < 1) return false;
        if (!seen.insert(v).second) return false;
    }
    return true;
}

int EpochSet::index_of(int k) const {
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] == k) return static_cast<int>(i);
    return -1;
}

UcbState UcbState::init(const EpochSet& epochs, double c, std::size_t window_capacity) {
    if (!epochs.valid()) throw std::invalid_argument("UcbState::init: invalid epoch set");
    if (c < 0.0) throw std::invalid_argument("UcbState::init: c must be nonnegative");
    if (window_capacity < 1) throw std::invalid_argument("UcbState::init: window must be >= 1");
    UcbState s;
    const std::size_t n = epochs.values.size();
    s.counts.assign(n, 1);
    s.windows.assign(n, {});
    s.q_values.assign(n, 0.0);
    s.t = 1;
    s.c = c;
    s.window_capacity = window_capacity;
    return s;
}

int ucb_select(const UcbState& state, const EpochSet& epochs) {
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    const double log_t = std::log(static_cast<double>(state.t));
    for (int i = 0; i < epochs.size(); ++i) {
        const double bonus = state.c * std::sqrt(log_t / static_cast<double>(state.counts[i]));
        const double score = state.q_values[i] + bonus;
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    return epochs.values[best];
}

void ucb_commit(UcbState& state, const EpochSet& epochs, int chosen_k, double mean_return) {
    const int i = epochs.index_of(chosen_k);
    if (i < 0) throw std::invalid_argument("ucb_commit: chosen K not in the epoch set");
    if (!std::isfinite(mean_return))
        throw std::invalid_argument("ucb_commit: non-finite reward signal");
    auto& window = state.windows[i];
    window.push_back(mean_return);
    if (window.size() > state.window_capacity) window.pop_front();
    double sum = 0.0;
    for (double v : window) sum += v;
    state.q_values[i] = sum / static_cast<double>(window.size());
    state.counts[i] += 1;
    state.t += 1;
}

GtsState GtsState::init(const EpochSet& epochs, double eta, double prior_mean, double prior_var,
                        double var_floor) {
    if (!epochs.valid()) throw std::invalid_argument("GtsState::init: invalid epoch set");
    if (eta < 0.0) throw std::invalid_argument("GtsState::init: eta must be nonnegative");
    if (prior_var < 0.0 || var_floor < 0.0)
        throw std::invalid_argument("GtsState::init: variances must be nonnegative");
    GtsState s;
    const std::size_t n = epochs.values.size();
    s.means.assign(n, prior_mean);
    s.variances.assign(n, prior_var);
    s.counts.assign(n, 1);
    s.eta = eta;
    s.var_floor = var_floor;
    return s;
}

int gts_select(const GtsState& state, const EpochSet& epochs, Rng& rng) {
    int best = 0;
    double best_sample = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < epochs.size(); ++i) {
        const double sample = state.means[i] + std::sqrt(state.variances[i]) * rng.normal();
        if (sample > best_sample) {
            best_sample = sample;
            best = i;
        }
    }
    return epochs.values[best];
}

void gts_commit(GtsState& state, const EpochSet& epochs, int chosen_k, double q_signal) {
    const int i = epochs.index_of(chosen_k);
    if (i < 0) throw std::invalid_argument("gts_commit: chosen K not in the epoch set");
    if (!std::isfinite(q_signal)) throw std::invalid_argument("gts_commit: non-finite reward signal");
    const double mean_old = state.means[i];
    const double n = static_cast<double>(state.counts[i]);
    const double residual = q_signal - mean_old;
    state.means[i] = mean_old + state.eta * residual / (n + 1.0);
    state.variances[i] =
        std::max(state.var_floor, (n * state.variances[i] + residual * residual) / (n + 1.0));
    state.counts[i] += 1;
}

int rrs_select(RrsState& state, const EpochSet& epochs) {
    if (!epochs.valid()) throw std::invalid_argument("rrs_select: invalid epoch set");
    const int k = epochs.values[state.t % static_cast<std::uint64_t>(epochs.size())];
    state.t += 1;
    return k;
}

int fixed_select(int k) {
    if (k < 1) throw std::invalid_argument("fixed_select: K must be >= 1");
    return k;
}

std::string to_string(SchedulerKind kind) {
    switch (kind) {
        case SchedulerKind::fixed: return "fixed";
        case SchedulerKind::rrs: return "rrs";
        case SchedulerKind::ucb: return "ucb";
        case SchedulerKind::gts: return "gts";
    }
    return "fixed";
}

SchedulerKind scheduler_kind_from_string(const std::string& name) {
    if (name == "fixed") return SchedulerKind::fixed;
    if (name == "rrs") return SchedulerKind::rrs;
    if (name == "ucb") return SchedulerKind::ucb;
    if (name == "gts") return SchedulerKind::gts;
    throw std::invalid_argument("unknown scheduler algorithm: " + name);
}

void SchedulerConfig::validate() const {
    if (kind == SchedulerKind::fixed) {
        if (fixed_k < 1) throw std::invalid_argument("scheduler: fixed K must be >= 1");
        return;
    }
    if (!epochs.valid())
        throw std::invalid_argument("scheduler: epoch set must be nonempty, distinct, all >= 1");
    if (kind == SchedulerKind::ucb) {
        if (c < 0.0) throw std::invalid_argument("scheduler: c must be nonnegative");
        if (window < 1) throw std::invalid_argument("scheduler: window must be >= 1");
    }
    if (kind == SchedulerKind::gts) {
        if (eta < 0.0) throw std::invalid_argument("scheduler: eta must be nonnegative");
        if (prior_var < 0.0 || var_floor < 0.0)
            throw std::invalid_argument("scheduler: variances must be nonnegative");
    }
}

EpochScheduler::EpochScheduler(const SchedulerConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(mix64(seed, 0x62616e64ULL)) {
    cfg_.validate();
    if (cfg_.kind == SchedulerKind::ucb) ucb_ = UcbState::init(cfg_.epochs, cfg_.c, cfg_.window);
    if (cfg_.kind == SchedulerKind::gts)
        gts_ = GtsState::init(cfg_.epochs, cfg_.eta, cfg_.prior_mean, cfg_.prior_var, cfg_.var_floor);
}

int EpochScheduler::select() {
    switch (cfg_.kind) {
        case SchedulerKind::fixed: return fixed_select(cfg_.fixed_k);
        case SchedulerKind::rrs: return rrs_select(rrs_, cfg_.epochs);
        case SchedulerKind::ucb: return ucb_select(ucb_, cfg_.epochs);
        case SchedulerKind::gts: return gts_select(gts_, cfg_.epochs, rng_);
    }
    return cfg_.fixed_k;
}

void EpochScheduler::commit(int chosen_k, double signal) {
    switch (cfg_.kind) {
        case SchedulerKind::fixed:
        case SchedulerKind::rrs: return;
        case SchedulerKind::ucb: return ucb_commit(ucb_, cfg_.epochs, chosen_k, signal);
        case SchedulerKind::gts: return gts_commit(gts_, cfg_.epochs, chosen_k, signal);
    }
}

}  // namespace ebrl
