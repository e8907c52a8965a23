#include "ebrl/net.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ebrl/rng.hpp"

namespace ebrl {

bool NetArch::valid() const {
    if (layer_sizes.size() < 2) return false;
    for (int n : layer_sizes)
        if (n < 1) return false;
    return true;
}

std::uint64_t flops_per_forward(const NetArch& arch) {
    std::uint64_t total = 0;
    const auto& s = arch.layer_sizes;
    for (std::size_t l = 0; l + 1 < s.size(); ++l) {
        const auto in = static_cast<std::uint64_t>(s[l]);
        const auto out = static_cast<std::uint64_t>(s[l + 1]);
        total += 2 * in * out + out;
        if (l + 2 < s.size()) total += out;  // tanh, hidden layers only
    }
    return total;
}

namespace {

// Orthogonal matrix via modified Gram-Schmidt on a seeded Gaussian draw.
// Returns out x in (row-major) with orthonormal rows or columns, whichever
// dimension is smaller, scaled by gain.
std::vector<double> orthogonal_init(int out, int in, double gain, Rng& rng) {
    const int n = std::max(out, in);
    const int m = std::min(out, in);
    // columns of q: m vectors of length n
    std::vector<std::vector<double>> q(m, std::vector<double>(n));
    for (auto& col : q)
        for (auto& x : col) x = rng.normal();
    for (int j = 0; j < m; ++j) {
        for (int k = 0; k < j; ++k) {
            double dot = 0.0;
            for (int i = 0; i < n; ++i) dot += q[k][i] * q[j][i];
            for (int i = 0; i < n; ++i) q[j][i] -= dot * q[k][i];
        }
        double norm = 0.0;
        for (int i = 0; i < n; ++i) norm += q[j][i] * q[j][i];
        norm = std::sqrt(norm);
        for (int i = 0; i < n; ++i) q[j][i] /= norm;
    }
    std::vector<double> w(static_cast<std::size_t>(out) * in);
    if (out >= in) {  // columns orthonormal
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) w[static_cast<std::size_t>(r) * in + c] = gain * q[c][r];
    } else {  // rows orthonormal
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) w[static_cast<std::size_t>(r) * in + c] = gain * q[r][c];
    }
    return w;
}

}  // namespace

void Net::alloc() {
    const auto& s = arch_.layer_sizes;
    const std::size_t layers = s.size() - 1;
    w_.resize(layers);
    b_.resize(layers);
    mw_.resize(layers);
    vw_.resize(layers);
    mb_.resize(layers);
    vb_.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t nw = static_cast<std::size_t>(s[l]) * s[l + 1];
        w_[l].assign(nw, 0.0);
        mw_[l].assign(nw, 0.0);
        vw_[l].assign(nw, 0.0);
        b_[l].assign(s[l + 1], 0.0);
        mb_[l].assign(s[l + 1], 0.0);
        vb_[l].assign(s[l + 1], 0.0);
    }
}

Net Net::init(const NetArch& arch, std::uint64_t seed, double output_gain) {
    if (!arch.valid()) throw std::invalid_argument("Net::init: invalid architecture");
    Net net;
    net.arch_ = arch;
    net.alloc();
    Rng rng(mix64(seed, 0x6e657477ULL));
    const auto& s = arch.layer_sizes;
    for (std::size_t l = 0; l + 1 < s.size(); ++l) {
        const bool last = (l + 2 == s.size());
        const double gain = last ? output_gain : std::sqrt(2.0);
        net.w_[l] = orthogonal_init(s[l + 1], s[l], gain, rng);
    }
    return net;
}

std::size_t Net::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) n += w_[l].size() + b_[l].size();
    return n;
}

std::vector<double> Net::forward(std::span<const double> input, Cache* cache) const {
    const auto& s = arch_.layer_sizes;
    if (static_cast<int>(input.size()) != s.front())
        throw std::invalid_argument("Net::forward: input size mismatch");
    for (double x : input)
        if (!std::isfinite(x)) throw std::invalid_argument("Net::forward: non-finite input");

    if (cache) {
        cache->acts.resize(s.size());
        cache->acts[0].assign(input.begin(), input.end());
    }
    std::vector<double> a(input.begin(), input.end());
    std::vector<double> z;
    for (std::size_t l = 0; l + 1 < s.size(); ++l) {
        const int in = s[l];
        const int out = s[l + 1];
        z.assign(out, 0.0);
        const double* w = w_[l].data();
        for (int r = 0; r < out; ++r) {
            double acc = b_[l][r];
            const double* row = w + static_cast<std::size_t>(r) * in;
            for (int c = 0; c < in; ++c) acc += row[c] * a[c];
            z[r] = acc;
        }
        if (l + 2 < s.size())
            for (double& x : z) x = std::tanh(x);
        a.swap(z);
        if (cache) cache->acts[l + 1] = a;
    }
    return a;
}

Net::Grads Net::make_grads() const {
    Grads g;
    g.w.resize(w_.size());
    g.b.resize(b_.size());
    for (std::size_t l = 0; l < w_.size(); ++l) {
        g.w[l].assign(w_[l].size(), 0.0);
        g.b[l].assign(b_[l].size(), 0.0);
    }
    return g;
}

void Net::Grads::zero() {
    for (auto& v : w) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
}

void Net::Grads::scale(double s) {
    for (auto& v : w)
        for (double& x : v) x *= s;
    for (auto& v : b)
        for (double& x : v) x *= s;
}

double Net::Grads::l2_norm() const {
    double sq = 0.0;
    for (const auto& v : w)
        for (double x : v) sq += x * x;
    for (const auto& v : b)
        for (double x : v) sq += x * x;
    return std::sqrt(sq);
}

void Net::backward(const Cache& cache, std::span<const double> dout, Grads& grads) const {
    const auto& s = arch_.layer_sizes;
    if (cache.acts.size() != s.size())
        throw std::invalid_argument("Net::backward: missing forward cache");
    std::vector<double> d(dout.begin(), dout.end());
    std::vector<double> dprev;
    for (int l = static_cast<int>(s.size()) - 2; l >= 0; --l) {
        const int in = s[l];
        const int out = s[l + 1];
        const auto& a_in = cache.acts[l];
        double* gw = grads.w[l].data();
        for (int r = 0; r < out; ++r) {
            const double dr = d[r];
            double* row = gw + static_cast<std::size_t>(r) * in;
            for (int c = 0; c < in; ++c) row[c] += dr * a_in[c];
            grads.b[l][r] += dr;
        }
        if (l > 0) {
            dprev.assign(in, 0.0);
            const double* w = w_[l].data();
            for (int r = 0; r < out; ++r) {
                const double dr = d[r];
                const double* row = w + static_cast<std::size_t>(r) * in;
                for (int c = 0; c < in; ++c) dprev[c] += dr * row[c];
            }
            for (int c = 0; c < in; ++c) dprev[c] *= 1.0 - a_in[c] * a_in[c];
            d.swap(dprev);
        }
    }
}

void Net::adam_step(const Grads& grads, const AdamConfig& cfg) {
    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_count_));
    auto update = [&](std::vector<double>& p, std::vector<double>& m, std::vector<double>& v,
                      const std::vector<double>& g) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            p[i] -= cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.epsilon);
        }
    };
    for (std::size_t l = 0; l < w_.size(); ++l) {
        update(w_[l], mw_[l], vw_[l], grads.w[l]);
        update(b_[l], mb_[l], vb_[l], grads.b[l]);
    }
}

std::vector<double> Net::flatten_params() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    for (std::size_t l = 0; l < w_.size(); ++l) {
        flat.insert(flat.end(), w_[l].begin(), w_[l].end());
        flat.insert(flat.end(), b_[l].begin(), b_[l].end());
    }
    return flat;
}

void Net::unflatten_params(std::span<const double> flat) {
    if (flat.size() != param_count())
        throw std::invalid_argument("Net::unflatten_params: size mismatch");
    std::size_t k = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        for (double& x : w_[l]) x = flat[k++];
        for (double& x : b_[l]) x = flat[k++];
    }
}

std::vector<double> Net::flatten_grads(const Grads& grads) {
    std::vector<double> flat;
    for (std::size_t l = 0; l < grads.w.size(); ++l) {
        flat.insert(flat.end(), grads.w[l].begin(), grads.w[l].end());
        flat.insert(flat.end(), grads.b[l].begin(), grads.b[l].end());
    }
    return flat;
}

namespace {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

void Net::write_text(std::ostream& os) const {
    os << "net 1\n";
    os << "layers";
    for (int n : arch_.layer_sizes) os << ' ' << n;
    os << '\n';
    for (std::size_t l = 0; l < w_.size(); ++l) {
        os << "W " << l << '\n';
        const int in = arch_.layer_sizes[l];
        const int out = arch_.layer_sizes[l + 1];
        for (int r = 0; r < out; ++r) {
            for (int c = 0; c < in; ++c) {
                if (c) os << ' ';
                os << fmt_double(w_[l][static_cast<std::size_t>(r) * in + c]);
            }
            os << '\n';
        }
        os << "b " << l << '\n';
        for (int r = 0; r < out; ++r) {
            if (r) os << ' ';
            os << fmt_double(b_[l][r]);
        }
        os << '\n';
    }
}

Net Net::read_text(std::istream& is) {
    std::string tag;
    int version = 0;
    is >> tag >> version;
    if (tag != "net" || version != 1)
        throw std::runtime_error("Net::read_text: unrecognized header");
    is >> tag;
    if (tag != "layers") throw std::runtime_error("Net::read_text: expected layer sizes");
    NetArch arch;
    {
        std::string line;
        std::getline(is, line);
        std::istringstream ls(line);
        int n;
        while (ls >> n) arch.layer_sizes.push_back(n);
    }
    if (!arch.valid()) throw std::runtime_error("Net::read_text: invalid architecture");
    Net net;
    net.arch_ = arch;
    net.alloc();
    for (std::size_t l = 0; l + 1 < arch.layer_sizes.size(); ++l) {
        std::size_t idx;
        is >> tag >> idx;
        if (tag != "W" || idx != l) throw std::runtime_error("Net::read_text: expected weights");
        for (double& x : net.w_[l]) is >> x;
        is >> tag >> idx;
        if (tag != "b" || idx != l) throw std::runtime_error("Net::read_text: expected biases");
        for (double& x : net.b_[l]) is >> x;
    }
    if (!is) throw std::runtime_error("Net::read_text: truncated record");
    return net;
}

void clip_global_norm(std::vector<Net::Grads*> grads, std::vector<std::vector<double>*> extra,
                      double max_norm) {
    double sq = 0.0;
    for (const auto* g : grads) {
        const double n = g->l2_norm();
        sq += n * n;
    }
    for (const auto* v : extra)
        for (double x : *v) sq += x * x;
    const double norm = std::sqrt(sq);
    if (norm <= max_norm) return;
    const double s = max_norm / norm;
    for (auto* g : grads) g->scale(s);
    for (auto* v : extra)
        for (double& x : *v) x *= s;
}

}  // namespace ebrl
