#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ebrl/net.hpp"
#include "ebrl/rng.hpp"

namespace ebrl {

// Categorical distribution helpers over raw logits.
std::vector<double> softmax(std::span<const double> logits);
double log_prob_categorical(std::span<const double> logits, int action);
double entropy_categorical(std::span<const double> logits);
int sample_categorical(std::span<const double> logits, Rng& rng);
int argmax_categorical(std::span<const double> logits);

// KL(p || q) between two categorical distributions given as logits.
double kl_categorical(std::span<const double> logits_p, std::span<const double> logits_q);

// Policy head over a dense net: categorical logits for discrete action
// spaces, or an action mean plus a state-independent learned log-std for
// continuous ones. The log-std block carries its own Adam moments.
class Policy {
public:
    Policy() = default;

    static Policy make_discrete(const NetArch& arch, std::uint64_t seed);
    static Policy make_continuous(const NetArch& arch, std::uint64_t seed);

    bool discrete() const { return discrete_; }
    int action_count() const { return net_.output_size(); }
    int action_dim() const { return net_.output_size(); }

    Net& net() { return net_; }
    const Net& net() const { return net_; }
    const std::vector<double>& log_std() const { return log_std_; }

    struct Sampled {
        int action_disc = 0;
        std::vector<double> action_cont;
        double log_prob = 0.0;
    };
    Sampled sample(std::span<const double> obs, Rng& rng) const;

    // Deterministic evaluation-mode action: argmax logits / mean action.
    int act_greedy(std::span<const double> obs) const;
    std::vector<double> act_mean(std::span<const double> obs) const;

    // Log-density of a stored action under the current parameters, plus the
    // distribution entropy and their gradients w.r.t. the net output (and
    // log-std for continuous policies). `out` is the net forward output.
    struct Eval {
        double log_prob = 0.0;
        double entropy = 0.0;
        std::vector<double> dlogp_dout;
        std::vector<double> dent_dout;
        std::vector<double> dlogp_dlogstd;  // continuous only
        std::vector<double> dent_dlogstd;   // continuous only
    };
    Eval evaluate(std::span<const double> out, int action_disc,
                  std::span<const double> action_cont) const;

    double log_prob_of(std::span<const double> obs, int action_disc,
                       std::span<const double> action_cont) const;

    // log-std optimizer plumbing (continuous policies)
    std::vector<double>& log_std_grad_buffer() { return log_std_grad_; }
    void adam_step_log_std(const AdamConfig& cfg);

    void write_text(std::ostream& os) const;
    static Policy read_text(std::istream& is);

private:
    Net net_;
    bool discrete_ = true;
    std::vector<double> log_std_;
    std::vector<double> log_std_grad_;
    std::vector<double> ls_m_, ls_v_;
    std::uint64_t ls_steps_ = 0;
};

}  // namespace ebrl
