#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ebrl/config.hpp"
#include "ebrl/metrics.hpp"
#include "ebrl/net.hpp"
#include "ebrl/policy.hpp"

namespace ebrl {

struct RunSummary {
    std::uint64_t seed = 0;
    double final_train_score = 0.0;  // mean episodic return over the last 100 episodes
    double test_score = 0.0;         // mean raw return over eval_episodes held-out levels
    std::uint64_t flops_sampling = 0;
    std::uint64_t flops_update = 0;
    std::uint64_t flops_total = 0;
    std::vector<int> arm_values;
    std::vector<std::uint64_t> arm_counts;
    std::vector<double> arm_proportions;
    std::uint64_t env_steps = 0;
    int n_episodes = 0;
    double wall_clock_sec = 0.0;  // excluded from determinism comparisons
};

void write_checkpoint(const std::string& path, const Policy& policy, const Net& value);
std::pair<Policy, Net> read_checkpoint(const std::string& path);

RunSummary summary_from_json_file(const std::string& path);

// Frozen-policy evaluation: greedy action selection on freshly sampled
// test-partition levels, raw returns.
double evaluate_policy(const Policy& policy, const EnvSpec& spec, int episodes,
                       std::uint64_t seed);

// Trains one seed and writes train_log.jsonl, checkpoint.txt and summary.json
// under <out_dir>/seed_<seed>/.
RunSummary run_single(const ExperimentConfig& config, std::uint64_t seed);

struct SuiteResult {
    std::vector<RunSummary> summaries;
    std::vector<std::pair<std::uint64_t, std::string>> failures;  // (seed, message)
};

// Runs every configured seed through run_single with a bounded worker pool
// (EBRL_MAX_WORKERS caps the size) and writes the resolved config next to the
// per-seed directories. Per-seed failures are recorded; other seeds continue.
SuiteResult run_suite(const ExperimentConfig& config);

// --- decision logs ----------------------------------------------------------

struct DecisionReport {
    std::vector<int> arm_values;                   // first-appearance order
    std::vector<std::vector<double>> proportions;  // [episode][arm], mean across logs
    std::vector<double> final_proportions;
};

// Running per-arm selection proportions from one or more train logs,
// truncated to the shortest log.
DecisionReport decision_report(const std::vector<std::string>& log_paths);

std::vector<std::string> find_train_logs(const std::string& suite_dir);

// --- cross-method aggregation -----------------------------------------------

struct AggregateEntry {
    std::string method;
    int n_runs = 0;
    int n_tasks = 0;
    double mean = 0, mean_lo = 0, mean_hi = 0;
    double median = 0, median_lo = 0, median_hi = 0;
    double iqm = 0, iqm_lo = 0, iqm_hi = 0;
    double og = 0, og_lo = 0, og_hi = 0;
};

// Collects per-seed test scores from suite directories (each holding a
// resolved config.json plus seed_*/summary.json), normalizes by the baseline
// method's per-task mean, and aggregates with stratified-bootstrap CIs.
std::vector<AggregateEntry> aggregate_methods(const std::vector<std::string>& suite_dirs,
                                              const std::string& baseline, int n_resamples,
                                              double confidence, std::uint64_t seed);

std::string format_aggregate_table(const std::vector<AggregateEntry>& entries);
std::string format_aggregate_csv(const std::vector<AggregateEntry>& entries);

// --- plots -------------------------------------------------------------------

// Emits learning_curves.{svg,csv}, flops.{svg,csv} and decisions.{svg,csv}
// into out_dir from the given suite directories. With no parseable logs it
// writes nothing.
void emit_plots(const std::vector<std::string>& suite_dirs, const std::string& out_dir);

}  // namespace ebrl
