#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "ebrl/rng.hpp"

namespace ebrl {

// Ordered candidate set of update-epoch counts. Order is significant: score
// ties break toward the earliest position, and round-robin cycles in listed
// order.
struct EpochSet {
    std::vector<int> values;

    bool valid() const;
    int size() const { return static_cast<int>(values.size()); }
    int index_of(int k) const;  // -1 when absent
};

// --- UCB ---------------------------------------------------------------

struct UcbState {
    std::vector<std::uint64_t> counts;           // N(K), starts at 1 per arm
    std::vector<std::deque<double>> windows;     // R(K), FIFO of reward signals
    std::vector<double> q_values;                // Q(K) = mean of window entries
    std::uint64_t t = 1;                         // committed-selection counter
    double c = 5.0;                              // exploration coefficient
    std::size_t window_capacity = 10;

    static UcbState init(const EpochSet& epochs, double c, std::size_t window_capacity);
};

// argmax over K of Q(K) + c*sqrt(log(t)/N(K)); pure, ties break earliest.
int ucb_select(const UcbState& state, const EpochSet& epochs);

// Appends mean_return to the chosen arm's FIFO window, recomputes Q as the
// mean over current entries, then increments N and t. Rejects non-finite
// signals (they indicate value-network divergence upstream).
void ucb_commit(UcbState& state, const EpochSet& epochs, int chosen_k, double mean_return);

// --- Gaussian Thompson sampling -----------------------------------------

struct GtsState {
    std::vector<double> means;
    std::vector<double> variances;
    std::vector<std::uint64_t> counts;  // N(K), starts at 1 per arm
    double eta = 1.0;                   // step size, applied to the mean only
    double var_floor = 1e-6;

    static GtsState init(const EpochSet& epochs, double eta, double prior_mean, double prior_var,
                         double var_floor);
};

// Draws one Normal(mean, variance) sample per arm from the stream and returns
// the arm with the largest sample; ties break earliest.
int gts_select(const GtsState& state, const EpochSet& epochs, Rng& rng);

// Incremental posterior update with the old mean in the variance recursion:
//   mean'     = mean + eta * (q - mean) / (N + 1)
//   variance' = max(var_floor, (N * variance + (q - mean)^2) / (N + 1))
//   N'        = N + 1
void gts_commit(GtsState& state, const EpochSet& epochs, int chosen_k, double q_signal);

// --- Round-robin ----------------------------------------------------------

struct RrsState {
    std::uint64_t t = 0;
};

// Returns values[t mod |K|] and increments t.
int rrs_select(RrsState& state, const EpochSet& epochs);

// --- Fixed baseline ---------------------------------------------------------

int fixed_select(int k);

// --- Facade used by the training loop ----------------------------------------

enum class SchedulerKind { fixed, rrs, ucb, gts };
enum class BanditSignal { value_prediction, episodic_return };

std::string to_string(SchedulerKind kind);
SchedulerKind scheduler_kind_from_string(const std::string& name);

struct SchedulerConfig {
    SchedulerKind kind = SchedulerKind::fixed;
    EpochSet epochs{{3, 2, 1}};
    int fixed_k = 3;
    double c = 5.0;                 // ucb
    std::size_t window = 10;        // ucb
    double eta = 1.0;               // gts
    double prior_mean = 0.0;        // gts
    double prior_var = 1.0;         // gts
    double var_floor = 1e-6;        // gts
    BanditSignal signal = BanditSignal::value_prediction;

    void validate() const;  // throws std::invalid_argument on bad fields
};

// One scheduler instance belongs to one training run; operations are
// synchronous and side-effect-local.
class EpochScheduler {
public:
    EpochScheduler(const SchedulerConfig& cfg, std::uint64_t seed);

    int select();
    void commit(int chosen_k, double signal);  // no-op for fixed and rrs

    const SchedulerConfig& config() const { return cfg_; }

private:
    SchedulerConfig cfg_;
    UcbState ucb_;
    GtsState gts_;
    RrsState rrs_;
    Rng rng_;
};

}  // namespace ebrl
