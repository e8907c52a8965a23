#include "ebrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ebrl/rng.hpp"

namespace ebrl {

ScoreMatrix normalize(const ScoreMatrix& scores, std::span<const double> baseline_per_task) {
    if (static_cast<int>(baseline_per_task.size()) != scores.n_tasks)
        throw std::invalid_argument("normalize: one baseline per task required");
    for (double b : baseline_per_task)
        if (b == 0.0) throw std::invalid_argument("normalize: zero baseline");
    ScoreMatrix out = scores;
    for (int r = 0; r < out.n_runs; ++r)
        for (int t = 0; t < out.n_tasks; ++t) out.at(r, t) /= baseline_per_task[t];
    return out;
}

double mean(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean: empty input");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double median(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty input");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    return n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double iqm(std::span<const double> values) {
    if (values.size() < 4) throw std::invalid_argument("iqm: at least 4 values required");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t drop = sorted.size() / 4;
    double s = 0.0;
    for (std::size_t i = drop; i < sorted.size() - drop; ++i) s += sorted[i];
    return s / static_cast<double>(sorted.size() - 2 * drop);
}

double optimality_gap(std::span<const double> values, double threshold) {
    if (values.empty()) throw std::invalid_argument("optimality_gap: empty input");
    double s = 0.0;
    for (double v : values) s += std::max(0.0, threshold - v);
    return s / static_cast<double>(values.size());
}

std::pair<double, double> bootstrap_ci(
    const std::function<double(std::span<const double>)>& aggregate, const ScoreMatrix& scores,
    int n_resamples, double confidence, std::uint64_t seed) {
    if (scores.n_runs < 2) throw std::invalid_argument("bootstrap_ci: at least 2 runs required");
    if (n_resamples < 1) throw std::invalid_argument("bootstrap_ci: n_resamples must be >= 1");
    if (confidence <= 0.0 || confidence >= 1.0)
        throw std::invalid_argument("bootstrap_ci: confidence must be in (0,1)");

    Rng rng(mix64(seed, 0x62747374ULL));
    std::vector<double> stats(static_cast<std::size_t>(n_resamples));
    std::vector<double> resampled(scores.scores.size());
    for (int b = 0; b < n_resamples; ++b) {
        for (int t = 0; t < scores.n_tasks; ++t) {
            for (int r = 0; r < scores.n_runs; ++r) {
                const int src = static_cast<int>(
                    rng.uniform_index(static_cast<std::uint64_t>(scores.n_runs)));
                resampled[static_cast<std::size_t>(r) * scores.n_tasks + t] = scores.at(src, t);
            }
        }
        stats[b] = aggregate(resampled);
    }
    std::sort(stats.begin(), stats.end());
    const double alpha = (1.0 - confidence) / 2.0;
    auto pick = [&](double q) {
        const double pos = q * static_cast<double>(stats.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
        const double frac = pos - static_cast<double>(lo);
        return stats[lo] * (1.0 - frac) + stats[hi] * frac;
    };
    return {pick(alpha), pick(1.0 - alpha)};
}

}  // namespace ebrl
