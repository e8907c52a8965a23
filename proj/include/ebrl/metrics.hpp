#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ebrl {

// runs x tasks score matrix, row-major by run.
struct ScoreMatrix {
    int n_runs = 0;
    int n_tasks = 0;
    std::vector<double> scores;

    double& at(int run, int task) { return scores[static_cast<std::size_t>(run) * n_tasks + task]; }
    double at(int run, int task) const {
        return scores[static_cast<std::size_t>(run) * n_tasks + task];
    }
};

// Elementwise score / baseline[task]; rejects zero baselines.
ScoreMatrix normalize(const ScoreMatrix& scores, std::span<const double> baseline_per_task);

double mean(std::span<const double> values);
double median(std::span<const double> values);

// Mean of the middle 50% after sorting, dropping floor(n/4) values from each
// end; requires at least 4 values.
double iqm(std::span<const double> values);

// Mean over scores of max(0, threshold - score).
double optimality_gap(std::span<const double> values, double threshold = 1.0);

// Percentile bootstrap over runs, stratified by task: each resample draws
// run indices with replacement independently per task, keeping task columns
// intact. Requires at least 2 runs. The aggregate sees the flattened
// resampled matrix.
std::pair<double, double> bootstrap_ci(
    const std::function<double(std::span<const double>)>& aggregate, const ScoreMatrix& scores,
    int n_resamples, double confidence, std::uint64_t seed);

}  // namespace ebrl
