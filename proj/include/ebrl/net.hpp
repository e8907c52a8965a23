#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace ebrl {

// Dense feed-forward architecture: input, hidden..., output.
// Hidden layers use tanh, the output layer is affine.
struct NetArch {
    std::vector<int> layer_sizes;

    bool valid() const;
    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
};

struct AdamConfig {
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Analytic per-forward FLOP count: 2*in*out + out per dense layer
// (multiply-add counted as 2 ops, bias add as 1) plus 1 op per hidden
// activation unit. Pure integer arithmetic, stable across platforms.
std::uint64_t flops_per_forward(const NetArch& arch);

class Net {
public:
    struct Cache {
        // acts[0] is the input, acts[l+1] the activation after layer l
        // (tanh for hidden layers, raw affine output for the last).
        std::vector<std::vector<double>> acts;
    };

    struct Grads {
        std::vector<std::vector<double>> w;  // same shapes as the weights
        std::vector<std::vector<double>> b;

        void zero();
        void scale(double s);
        double l2_norm() const;
    };

    Net() = default;

    // Orthogonal weight init scaled by sqrt(2) on hidden layers and by
    // output_gain on the last layer; biases and Adam moments start at zero.
    static Net init(const NetArch& arch, std::uint64_t seed, double output_gain = 1.0);

    const NetArch& arch() const { return arch_; }
    int input_size() const { return arch_.input_size(); }
    int output_size() const { return arch_.output_size(); }
    std::size_t param_count() const;

    // Rejects non-finite inputs.
    std::vector<double> forward(std::span<const double> input, Cache* cache = nullptr) const;

    Grads make_grads() const;

    // Accumulates exact reverse-mode gradients into `grads` given the
    // gradient of the loss w.r.t. the network output.
    void backward(const Cache& cache, std::span<const double> dout, Grads& grads) const;

    // Bias-corrected Adam update; increments step_count.
    void adam_step(const Grads& grads, const AdamConfig& cfg);

    std::uint64_t step_count() const { return step_count_; }

    // Flat views over (weights, biases), layer by layer, row-major; used by
    // finite-difference tests and gradient-norm computations.
    std::vector<double> flatten_params() const;
    void unflatten_params(std::span<const double> flat);
    static std::vector<double> flatten_grads(const Grads& grads);

    // Text serialization of arch + parameters (not optimizer moments);
    // %.17g fields round-trip doubles exactly.
    void write_text(std::ostream& os) const;
    static Net read_text(std::istream& is);

    const std::vector<std::vector<double>>& weights() const { return w_; }
    const std::vector<std::vector<double>>& biases() const { return b_; }

private:
    NetArch arch_;
    std::vector<std::vector<double>> w_;   // w_[l]: out x in, row-major
    std::vector<std::vector<double>> b_;   // b_[l]: out
    std::vector<std::vector<double>> mw_, vw_, mb_, vb_;
    std::uint64_t step_count_ = 0;

    void alloc();
};

// Global-norm gradient clipping across several gradient sets (one call per
// network update, possibly including extra parameter blocks).
void clip_global_norm(std::vector<Net::Grads*> grads, std::vector<std::vector<double>*> extra,
                      double max_norm);

}  // namespace ebrl
