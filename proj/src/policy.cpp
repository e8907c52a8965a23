#include "ebrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace ebrl {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2*pi))

double log_sum_exp(std::span<const double> x) {
    double m = x[0];
    for (double v : x) m = std::max(m, v);
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}
}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
    const double lse = log_sum_exp(logits);
    std::vector<double> p(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) p[i] = std::exp(logits[i] - lse);
    return p;
}

double log_prob_categorical(std::span<const double> logits, int action) {
    return logits[action] - log_sum_exp(logits);
}

double entropy_categorical(std::span<const double> logits) {
    const double lse = log_sum_exp(logits);
    double h = 0.0;
    for (double z : logits) {
        const double lp = z - lse;
        h -= std::exp(lp) * lp;
    }
    return h;
}

int sample_categorical(std::span<const double> logits, Rng& rng) {
    const auto p = softmax(logits);
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(p.size()) - 1;
}

int argmax_categorical(std::span<const double> logits) {
    int best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i)
        if (logits[i] > logits[best]) best = static_cast<int>(i);
    return best;
}

double kl_categorical(std::span<const double> logits_p, std::span<const double> logits_q) {
    const double lse_p = log_sum_exp(logits_p);
    const double lse_q = log_sum_exp(logits_q);
    double kl = 0.0;
    for (std::size_t i = 0; i < logits_p.size(); ++i) {
        const double lp = logits_p[i] - lse_p;
        const double lq = logits_q[i] - lse_q;
        kl += std::exp(lp) * (lp - lq);
    }
    return kl;
}

Policy Policy::make_discrete(const NetArch& arch, std::uint64_t seed) {
    Policy p;
    p.net_ = Net::init(arch, seed, 0.01);
    p.discrete_ = true;
    return p;
}

Policy Policy::make_continuous(const NetArch& arch, std::uint64_t seed) {
    Policy p;
    p.net_ = Net::init(arch, seed, 0.01);
    p.discrete_ = false;
    const std::size_t n = static_cast<std::size_t>(arch.output_size());
    p.log_std_.assign(n, 0.0);
    p.log_std_grad_.assign(n, 0.0);
    p.ls_m_.assign(n, 0.0);
    p.ls_v_.assign(n, 0.0);
    return p;
}

Policy::Sampled Policy::sample(std::span<const double> obs, Rng& rng) const {
    const auto out = net_.forward(obs);
    Sampled s;
    if (discrete_) {
        s.action_disc = sample_categorical(out, rng);
        s.log_prob = log_prob_categorical(out, s.action_disc);
        return s;
    }
    s.action_cont.resize(out.size());
    s.log_prob = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double std_i = std::exp(log_std_[i]);
        const double z = rng.normal();
        s.action_cont[i] = out[i] + std_i * z;
        s.log_prob += -0.5 * z * z - log_std_[i] - kLogSqrt2Pi;
    }
    return s;
}

int Policy::act_greedy(std::span<const double> obs) const {
    const auto out = net_.forward(obs);
    return argmax_categorical(out);
}

std::vector<double> Policy::act_mean(std::span<const double> obs) const { return net_.forward(obs); }

Policy::Eval Policy::evaluate(std::span<const double> out, int action_disc,
                              std::span<const double> action_cont) const {
    Eval e;
    const std::size_t n = out.size();
    e.dlogp_dout.resize(n);
    e.dent_dout.resize(n);
    if (discrete_) {
        const auto p = softmax(out);
        const double lse = log_sum_exp(out);
        e.log_prob = out[action_disc] - lse;
        double h = 0.0;
        for (std::size_t i = 0; i < n; ++i) h -= p[i] * (out[i] - lse);
        e.entropy = h;
        for (std::size_t i = 0; i < n; ++i) {
            e.dlogp_dout[i] = (static_cast<int>(i) == action_disc ? 1.0 : 0.0) - p[i];
            e.dent_dout[i] = -p[i] * ((out[i] - lse) + h);
        }
        return e;
    }
    e.dlogp_dlogstd.resize(n);
    e.dent_dlogstd.resize(n);
    e.log_prob = 0.0;
    e.entropy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double std_i = std::exp(log_std_[i]);
        const double z = (action_cont[i] - out[i]) / std_i;
        e.log_prob += -0.5 * z * z - log_std_[i] - kLogSqrt2Pi;
        e.entropy += log_std_[i] + 0.5 + kLogSqrt2Pi;
        e.dlogp_dout[i] = z / std_i;
        e.dlogp_dlogstd[i] = z * z - 1.0;
        e.dent_dout[i] = 0.0;
        e.dent_dlogstd[i] = 1.0;
    }
    return e;
}

double Policy::log_prob_of(std::span<const double> obs, int action_disc,
                           std::span<const double> action_cont) const {
    const auto out = net_.forward(obs);
    if (discrete_) return log_prob_categorical(out, action_disc);
    double lp = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double std_i = std::exp(log_std_[i]);
        const double z = (action_cont[i] - out[i]) / std_i;
        lp += -0.5 * z * z - log_std_[i] - kLogSqrt2Pi;
    }
    return lp;
}

void Policy::adam_step_log_std(const AdamConfig& cfg) {
    if (discrete_) return;
    ++ls_steps_;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(ls_steps_));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(ls_steps_));
    for (std::size_t i = 0; i < log_std_.size(); ++i) {
        const double g = log_std_grad_[i];
        ls_m_[i] = cfg.beta1 * ls_m_[i] + (1.0 - cfg.beta1) * g;
        ls_v_[i] = cfg.beta2 * ls_v_[i] + (1.0 - cfg.beta2) * g * g;
        log_std_[i] -= cfg.learning_rate * (ls_m_[i] / bc1) / (std::sqrt(ls_v_[i] / bc2) + cfg.epsilon);
    }
}

void Policy::write_text(std::ostream& os) const {
    os << "policy " << (discrete_ ? "discrete" : "continuous") << '\n';
    net_.write_text(os);
    if (!discrete_) {
        os << "log_std";
        char buf[40];
        for (double v : log_std_) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            os << ' ' << buf;
        }
        os << '\n';
    }
}

Policy Policy::read_text(std::istream& is) {
    std::string tag, kind;
    is >> tag >> kind;
    if (tag != "policy" || (kind != "discrete" && kind != "continuous"))
        throw std::runtime_error("Policy::read_text: unrecognized header");
    Policy p;
    p.discrete_ = (kind == "discrete");
    p.net_ = Net::read_text(is);
    if (!p.discrete_) {
        is >> tag;
        if (tag != "log_std") throw std::runtime_error("Policy::read_text: expected log_std");
        const std::size_t n = static_cast<std::size_t>(p.net_.output_size());
        p.log_std_.resize(n);
        for (double& v : p.log_std_) is >> v;
        p.log_std_grad_.assign(n, 0.0);
        p.ls_m_.assign(n, 0.0);
        p.ls_v_.assign(n, 0.0);
        if (!is) throw std::runtime_error("Policy::read_text: truncated log_std");
    }
    return p;
}

}  // namespace ebrl
