#include "ebrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ebrl/svg.hpp"
#include "ebrl/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ebrl {

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    json j;
    in >> j;
    return j;
}

std::string task_id(const EnvSpec& spec) {
    if (spec.kind == EnvKind::point_mass) return to_string(spec.kind);
    return to_string(spec.kind) + "_" + std::to_string(spec.width) + "x" +
           std::to_string(spec.height);
}

double iqm_lenient(std::span<const double> values) {
    return values.size() >= 4 ? iqm(values) : mean(values);
}

struct LogSeries {
    std::vector<double> mean_returns;  // per episode
    std::vector<int> selected_k;
    std::uint64_t flops_sampling = 0;  // final cumulative counters
    std::uint64_t flops_update = 0;
};

LogSeries read_log_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open log: " + path);
    LogSeries s;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        s.mean_returns.push_back(j.at("mean_episodic_return").get<double>());
        s.selected_k.push_back(j.at("selected_k").get<int>());
        s.flops_sampling = j.at("flops_sampling").get<std::uint64_t>();
        s.flops_update = j.at("flops_update").get<std::uint64_t>();
    }
    return s;
}

}  // namespace

void write_checkpoint(const std::string& path, const Policy& policy, const Net& value) {
    std::ostringstream os;
    os << "ebrl-checkpoint 1\n";
    policy.write_text(os);
    os << "value\n";
    value.write_text(os);
    write_file(path, os.str());
}

std::pair<Policy, Net> read_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "ebrl-checkpoint" || version != 1)
        throw std::runtime_error("unrecognized checkpoint header in " + path);
    Policy policy = Policy::read_text(in);
    in >> tag;
    if (tag != "value") throw std::runtime_error("checkpoint missing value section: " + path);
    Net value = Net::read_text(in);
    return {std::move(policy), std::move(value)};
}

double evaluate_policy(const Policy& policy, const EnvSpec& spec, int episodes,
                       std::uint64_t seed) {
    if (episodes < 1) throw std::invalid_argument("evaluate_policy: episodes must be >= 1");
    Rng rng(mix64(seed, 0x6576616cULL));
    Env env(spec);
    double total = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
        auto obs = env.reset(sample_level(spec, rng, LevelPartition::test));
        double ret = 0.0;
        while (!env.terminal()) {
            Env::Step step;
            if (spec.continuous_actions()) {
                const auto a = policy.act_mean(obs);
                step = env.step(std::span<const double>(a));
            } else {
                step = env.step(policy.act_greedy(obs));
            }
            ret += step.reward;
            if (!step.done) obs = env.observation();
        }
        total += ret;
    }
    return total / episodes;
}

namespace {

json summary_to_json(const RunSummary& s) {
    json j;
    j["seed"] = s.seed;
    j["final_train_score"] = s.final_train_score;
    j["test_score"] = s.test_score;
    j["flops_sampling"] = s.flops_sampling;
    j["flops_update"] = s.flops_update;
    j["flops_total"] = s.flops_total;
    j["arm_values"] = s.arm_values;
    j["arm_counts"] = s.arm_counts;
    j["arm_proportions"] = s.arm_proportions;
    j["env_steps"] = s.env_steps;
    j["n_episodes"] = s.n_episodes;
    j["wall_clock_sec"] = s.wall_clock_sec;
    return j;
}

}  // namespace

RunSummary summary_from_json_file(const std::string& path) {
    const json j = read_json_file(path);
    RunSummary s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.final_train_score = j.at("final_train_score").get<double>();
    s.test_score = j.at("test_score").get<double>();
    s.flops_sampling = j.at("flops_sampling").get<std::uint64_t>();
    s.flops_update = j.at("flops_update").get<std::uint64_t>();
    s.flops_total = j.at("flops_total").get<std::uint64_t>();
    s.arm_values = j.at("arm_values").get<std::vector<int>>();
    s.arm_counts = j.at("arm_counts").get<std::vector<std::uint64_t>>();
    s.arm_proportions = j.at("arm_proportions").get<std::vector<double>>();
    s.env_steps = j.at("env_steps").get<std::uint64_t>();
    s.n_episodes = j.at("n_episodes").get<int>();
    s.wall_clock_sec = j.at("wall_clock_sec").get<double>();
    return s;
}

RunSummary run_single(const ExperimentConfig& config, std::uint64_t seed) {
    const fs::path dir = fs::path(config.resolved_out_dir()) / ("seed_" + std::to_string(seed));
    fs::create_directories(dir);

    std::ofstream log(dir / "train_log.jsonl", std::ios::binary);
    if (!log) throw std::runtime_error("cannot write train log under " + dir.string());

    std::vector<double> episode_returns;
    episode_returns.reserve(static_cast<std::size_t>(config.n_episodes));

    const auto t0 = std::chrono::steady_clock::now();
    const TrainResult result =
        train(config.train_settings(), seed, [&](const EpisodeRecord& rec) {
            json j;
            j["episode"] = rec.episode;
            j["env_steps"] = rec.env_steps;
            j["selected_k"] = rec.selected_k;
            j["mean_episodic_return"] = rec.mean_episodic_return;
            j["v_bar"] = rec.v_bar;
            j["policy_loss"] = rec.policy_loss;
            j["value_loss"] = rec.value_loss;
            j["entropy"] = rec.entropy;
            j["flops_sampling"] = rec.flops_sampling;
            j["flops_update"] = rec.flops_update;
            log << j.dump() << '\n';
            episode_returns.push_back(rec.mean_episodic_return);
        });
    log.close();

    write_checkpoint((dir / "checkpoint.txt").string(), result.policy, result.value);

    RunSummary summary;
    summary.seed = seed;
    summary.n_episodes = config.n_episodes;
    summary.env_steps = static_cast<std::uint64_t>(config.n_episodes) * config.rollout_steps *
                        config.n_envs;
    const std::size_t tail = std::min<std::size_t>(100, episode_returns.size());
    if (tail > 0) {
        double sum = 0.0;
        for (std::size_t i = episode_returns.size() - tail; i < episode_returns.size(); ++i)
            sum += episode_returns[i];
        summary.final_train_score = sum / static_cast<double>(tail);
    }
    summary.test_score =
        evaluate_policy(result.policy, config.env, config.eval_episodes, mix64(seed, 8));
    summary.flops_sampling = result.ledger.sampling_total();
    summary.flops_update = result.ledger.update_total();
    summary.flops_total = result.ledger.total();

    summary.arm_values = config.scheduler.kind == SchedulerKind::fixed
                             ? std::vector<int>{config.scheduler.fixed_k}
                             : config.scheduler.epochs.values;
    summary.arm_counts.assign(summary.arm_values.size(), 0);
    for (int k : result.k_sequence) {
        for (std::size_t i = 0; i < summary.arm_values.size(); ++i)
            if (summary.arm_values[i] == k) summary.arm_counts[i] += 1;
    }
    summary.arm_proportions.resize(summary.arm_values.size());
    for (std::size_t i = 0; i < summary.arm_counts.size(); ++i)
        summary.arm_proportions[i] =
            static_cast<double>(summary.arm_counts[i]) / result.k_sequence.size();

    const auto t1 = std::chrono::steady_clock::now();
    summary.wall_clock_sec = std::chrono::duration<double>(t1 - t0).count();

    write_file((dir / "summary.json").string(), summary_to_json(summary).dump(2) + "\n");
    return summary;
}

namespace {

int worker_pool_size(std::size_t jobs) {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* cap = std::getenv("EBRL_MAX_WORKERS")) {
        const int v = std::atoi(cap);
        if (v >= 1) n = std::min(n, static_cast<unsigned>(v));
    }
    return static_cast<int>(std::min<std::size_t>(n, jobs));
}

}  // namespace

SuiteResult run_suite(const ExperimentConfig& config) {
    config.validate();
    const fs::path out = config.resolved_out_dir();
    fs::create_directories(out);
    write_file((out / "config.json").string(), serialize_config(config));

    const std::size_t n = config.seeds.size();
    std::vector<std::optional<RunSummary>> results(n);
    std::vector<std::optional<std::string>> errors(n);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                results[i] = run_single(config, config.seeds[i]);
            } catch (const std::exception& ex) {
                errors[i] = ex.what();
            }
        }
    };

    const int pool = worker_pool_size(n);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(pool));
    for (int i = 0; i < pool; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    SuiteResult suite;
    for (std::size_t i = 0; i < n; ++i) {
        if (results[i])
            suite.summaries.push_back(*results[i]);
        else
            suite.failures.emplace_back(config.seeds[i], errors[i].value_or("unknown failure"));
    }
    if (!suite.failures.empty()) {
        json j = json::array();
        for (const auto& [seed, msg] : suite.failures)
            j.push_back({{"seed", seed}, {"error", msg}});
        write_file((out / "failures.json").string(), j.dump(2) + "\n");
    }
    return suite;
}

std::vector<std::string> find_train_logs(const std::string& suite_dir) {
    std::vector<std::string> logs;
    if (!fs::is_directory(suite_dir)) return logs;
    for (const auto& entry : fs::directory_iterator(suite_dir)) {
        if (!entry.is_directory()) continue;
        const fs::path log = entry.path() / "train_log.jsonl";
        if (fs::exists(log)) logs.push_back(log.string());
    }
    std::sort(logs.begin(), logs.end());
    return logs;
}

DecisionReport decision_report(const std::vector<std::string>& log_paths) {
    if (log_paths.empty()) throw std::invalid_argument("decision_report: at least one log required");
    std::vector<LogSeries> series;
    series.reserve(log_paths.size());
    std::size_t episodes = SIZE_MAX;
    for (const auto& path : log_paths) {
        series.push_back(read_log_series(path));
        episodes = std::min(episodes, series.back().selected_k.size());
    }
    if (episodes == 0 || episodes == SIZE_MAX)
        throw std::invalid_argument("decision_report: empty logs");

    DecisionReport report;
    for (const auto& s : series)
        for (std::size_t e = 0; e < episodes; ++e) {
            const int k = s.selected_k[e];
            if (std::find(report.arm_values.begin(), report.arm_values.end(), k) ==
                report.arm_values.end())
                report.arm_values.push_back(k);
        }

    const std::size_t n_arms = report.arm_values.size();
    report.proportions.assign(episodes, std::vector<double>(n_arms, 0.0));
    for (const auto& s : series) {
        std::vector<std::uint64_t> counts(n_arms, 0);
        for (std::size_t e = 0; e < episodes; ++e) {
            const int k = s.selected_k[e];
            for (std::size_t a = 0; a < n_arms; ++a)
                if (report.arm_values[a] == k) counts[a] += 1;
            for (std::size_t a = 0; a < n_arms; ++a)
                report.proportions[e][a] +=
                    static_cast<double>(counts[a]) / static_cast<double>(e + 1);
        }
    }
    for (auto& row : report.proportions)
        for (double& p : row) p /= static_cast<double>(series.size());
    report.final_proportions = report.proportions.back();
    return report;
}

namespace {

struct MethodData {
    std::string name;
    // task id -> per-seed test scores (ordered by seed)
    std::map<std::string, std::vector<double>> task_scores;
};

std::map<std::string, MethodData> collect_methods(const std::vector<std::string>& suite_dirs) {
    std::map<std::string, MethodData> methods;
    for (const auto& dir : suite_dirs) {
        const ExperimentConfig config = parse_config_file((fs::path(dir) / "config.json").string());
        const std::string task = task_id(config.env);
        std::vector<std::pair<std::uint64_t, double>> scores;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_directory()) continue;
            const fs::path sj = entry.path() / "summary.json";
            if (!fs::exists(sj)) continue;
            const RunSummary s = summary_from_json_file(sj.string());
            scores.emplace_back(s.seed, s.test_score);
        }
        if (scores.empty()) throw std::runtime_error("aggregate: no summaries under " + dir);
        std::sort(scores.begin(), scores.end());
        auto& m = methods[config.name];
        m.name = config.name;
        auto& v = m.task_scores[task];
        for (const auto& [seed, score] : scores) v.push_back(score);
    }
    return methods;
}

}  // namespace

std::vector<AggregateEntry> aggregate_methods(const std::vector<std::string>& suite_dirs,
                                              const std::string& baseline, int n_resamples,
                                              double confidence, std::uint64_t seed) {
    const auto methods = collect_methods(suite_dirs);
    const auto base_it = methods.find(baseline);
    if (base_it == methods.end())
        throw std::invalid_argument("aggregate: baseline method '" + baseline + "' not found");

    std::vector<std::string> tasks;
    for (const auto& [task, scores] : base_it->second.task_scores) tasks.push_back(task);

    std::vector<double> baseline_means;
    for (const auto& task : tasks)
        baseline_means.push_back(mean(base_it->second.task_scores.at(task)));

    std::vector<AggregateEntry> entries;
    for (const auto& [name, data] : methods) {
        std::size_t runs = SIZE_MAX;
        for (const auto& task : tasks) {
            const auto it = data.task_scores.find(task);
            if (it == data.task_scores.end())
                throw std::runtime_error("aggregate: method '" + name + "' missing task " + task);
            runs = std::min(runs, it->second.size());
        }
        ScoreMatrix m;
        m.n_runs = static_cast<int>(runs);
        m.n_tasks = static_cast<int>(tasks.size());
        m.scores.resize(runs * tasks.size());
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            const auto& v = data.task_scores.at(tasks[t]);
            for (std::size_t r = 0; r < runs; ++r) m.at(static_cast<int>(r), static_cast<int>(t)) = v[r];
        }
        const ScoreMatrix normalized = normalize(m, baseline_means);

        AggregateEntry e;
        e.method = name;
        e.n_runs = m.n_runs;
        e.n_tasks = m.n_tasks;
        e.mean = mean(normalized.scores);
        e.median = median(normalized.scores);
        e.iqm = iqm_lenient(normalized.scores);
        e.og = optimality_gap(normalized.scores, 1.0);
        auto ci = [&](const std::function<double(std::span<const double>)>& f, double point) {
            if (normalized.n_runs < 2) return std::pair<double, double>{point, point};
            return bootstrap_ci(f, normalized, n_resamples, confidence,
                                mix64(seed, std::hash<std::string>{}(name)));
        };
        std::tie(e.mean_lo, e.mean_hi) = ci([](std::span<const double> v) { return mean(v); }, e.mean);
        std::tie(e.median_lo, e.median_hi) =
            ci([](std::span<const double> v) { return median(v); }, e.median);
        std::tie(e.iqm_lo, e.iqm_hi) =
            ci([](std::span<const double> v) { return iqm_lenient(v); }, e.iqm);
        std::tie(e.og_lo, e.og_hi) =
            ci([](std::span<const double> v) { return optimality_gap(v, 1.0); }, e.og);
        entries.push_back(std::move(e));
    }
    return entries;
}

std::string format_aggregate_table(const std::vector<AggregateEntry>& entries) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-20s %5s %5s %-22s %-22s %-22s %-22s\n", "method", "runs",
                  "tasks", "mean [lo, hi]", "median [lo, hi]", "iqm [lo, hi]", "og [lo, hi]");
    os << buf;
    for (const auto& e : entries) {
        auto cell = [](double v, double lo, double hi) {
            char c[64];
            std::snprintf(c, sizeof(c), "%.3f [%.3f, %.3f]", v, lo, hi);
            return std::string(c);
        };
        std::snprintf(buf, sizeof(buf), "%-20s %5d %5d %-22s %-22s %-22s %-22s\n",
                      e.method.c_str(), e.n_runs, e.n_tasks,
                      cell(e.mean, e.mean_lo, e.mean_hi).c_str(),
                      cell(e.median, e.median_lo, e.median_hi).c_str(),
                      cell(e.iqm, e.iqm_lo, e.iqm_hi).c_str(),
                      cell(e.og, e.og_lo, e.og_hi).c_str());
        os << buf;
    }
    return os.str();
}

std::string format_aggregate_csv(const std::vector<AggregateEntry>& entries) {
    std::ostringstream os;
    os << "method,n_runs,n_tasks,mean,mean_lo,mean_hi,median,median_lo,median_hi,"
          "iqm,iqm_lo,iqm_hi,og,og_lo,og_hi\n";
    for (const auto& e : entries) {
        os << e.method << ',' << e.n_runs << ',' << e.n_tasks << ',' << fmt17(e.mean) << ','
           << fmt17(e.mean_lo) << ',' << fmt17(e.mean_hi) << ',' << fmt17(e.median) << ','
           << fmt17(e.median_lo) << ',' << fmt17(e.median_hi) << ',' << fmt17(e.iqm) << ','
           << fmt17(e.iqm_lo) << ',' << fmt17(e.iqm_hi) << ',' << fmt17(e.og) << ','
           << fmt17(e.og_lo) << ',' << fmt17(e.og_hi) << '\n';
    }
    return os.str();
}

namespace {

struct MethodSeries {
    std::string name;
    std::vector<LogSeries> seeds;
    std::size_t episodes = 0;  // min across seeds
};

std::vector<MethodSeries> load_method_series(const std::vector<std::string>& suite_dirs) {
    std::vector<MethodSeries> methods;
    for (const auto& dir : suite_dirs) {
        const fs::path cfg = fs::path(dir) / "config.json";
        if (!fs::exists(cfg)) continue;
        MethodSeries m;
        m.name = parse_config_file(cfg.string()).name;
        for (const auto& log : find_train_logs(dir)) {
            auto s = read_log_series(log);
            if (s.mean_returns.empty()) continue;
            m.episodes = m.episodes == 0 ? s.mean_returns.size()
                                         : std::min(m.episodes, s.mean_returns.size());
            m.seeds.push_back(std::move(s));
        }
        if (!m.seeds.empty()) methods.push_back(std::move(m));
    }
    return methods;
}

struct Axes {
    PlotScale scale;
    void draw(SvgCanvas& svg, const std::string& x_label, const std::string& y_label) const {
        svg.line(scale.px, scale.py, scale.px, scale.py + scale.ph, "#333", 1.0);
        svg.line(scale.px, scale.py + scale.ph, scale.px + scale.pw, scale.py + scale.ph, "#333",
                 1.0);
        for (int i = 0; i <= 4; ++i) {
            const double fx = scale.x_min + (scale.x_max - scale.x_min) * i / 4.0;
            const double fy = scale.y_min + (scale.y_max - scale.y_min) * i / 4.0;
            char bx[32], by[32];
            std::snprintf(bx, sizeof(bx), "%.0f", fx);
            std::snprintf(by, sizeof(by), "%.2f", fy);
            svg.text(scale.x(fx), scale.py + scale.ph + 14, bx, 10, "middle");
            svg.text(scale.px - 4, scale.y(fy) + 3, by, 10, "end");
        }
        svg.text(scale.px + scale.pw / 2, scale.py + scale.ph + 28, x_label, 11, "middle");
        svg.text(scale.px, scale.py - 6, y_label, 11, "start");
    }
};

}  // namespace

void emit_plots(const std::vector<std::string>& suite_dirs, const std::string& out_dir) {
    const auto methods = load_method_series(suite_dirs);
    if (methods.empty()) return;
    fs::create_directories(out_dir);
    const auto& palette = plot_palette();

    // learning curves with std bands
    {
        std::ostringstream csv;
        csv << "method,episode,mean_return,std_return\n";
        double y_min = 0.0, y_max = -1e300;
        std::size_t x_max = 1;
        struct Curve {
            std::string name;
            std::vector<double> mean, std;
        };
        std::vector<Curve> curves;
        for (const auto& m : methods) {
            Curve c;
            c.name = m.name;
            for (std::size_t e = 0; e < m.episodes; ++e) {
                double s = 0.0;
                for (const auto& run : m.seeds) s += run.mean_returns[e];
                const double mu = s / static_cast<double>(m.seeds.size());
                double sq = 0.0;
                for (const auto& run : m.seeds) {
                    const double d = run.mean_returns[e] - mu;
                    sq += d * d;
                }
                const double sd = std::sqrt(sq / static_cast<double>(m.seeds.size()));
                c.mean.push_back(mu);
                c.std.push_back(sd);
                y_min = std::min(y_min, mu - sd);
                y_max = std::max(y_max, mu + sd);
                csv << m.name << ',' << (e + 1) << ',' << fmt17(mu) << ',' << fmt17(sd) << '\n';
            }
            x_max = std::max(x_max, m.episodes);
            curves.push_back(std::move(c));
        }
        if (y_max <= y_min) y_max = y_min + 1.0;

        SvgCanvas svg(640, 400);
        Axes axes;
        axes.scale = {1.0, static_cast<double>(x_max), y_min, y_max, 56, 24, 560, 330};
        axes.draw(svg, "episode", "mean episodic return");
        for (std::size_t i = 0; i < curves.size(); ++i) {
            const auto& color = palette[i % palette.size()];
            std::vector<std::pair<double, double>> band;
            for (std::size_t e = 0; e < curves[i].mean.size(); ++e)
                band.emplace_back(axes.scale.x(static_cast<double>(e + 1)),
                                  axes.scale.y(curves[i].mean[e] + curves[i].std[e]));
            for (std::size_t e = curves[i].mean.size(); e-- > 0;)
                band.emplace_back(axes.scale.x(static_cast<double>(e + 1)),
                                  axes.scale.y(curves[i].mean[e] - curves[i].std[e]));
            svg.polygon(band, color, 0.15);
            std::vector<std::pair<double, double>> line;
            for (std::size_t e = 0; e < curves[i].mean.size(); ++e)
                line.emplace_back(axes.scale.x(static_cast<double>(e + 1)),
                                  axes.scale.y(curves[i].mean[e]));
            svg.polyline(line, color);
            svg.text(620, 40 + 16 * static_cast<double>(i), curves[i].name, 11, "end");
            svg.line(560, 36 + 16 * static_cast<double>(i), 575, 36 + 16 * static_cast<double>(i),
                     color, 2.0);
        }
        write_file((fs::path(out_dir) / "learning_curves.svg").string(), svg.finish());
        write_file((fs::path(out_dir) / "learning_curves.csv").string(), csv.str());
    }

    // total-compute bars (sampling + update stacked), mean across seeds
    {
        std::ostringstream csv;
        csv << "method,flops_sampling,flops_update,flops_total\n";
        std::vector<std::pair<double, double>> totals;  // (sampling, update)
        double max_total = 0.0;
        for (const auto& m : methods) {
            double s = 0.0, u = 0.0;
            for (const auto& run : m.seeds) {
                s += static_cast<double>(run.flops_sampling);
                u += static_cast<double>(run.flops_update);
            }
            s /= static_cast<double>(m.seeds.size());
            u /= static_cast<double>(m.seeds.size());
            totals.emplace_back(s, u);
            max_total = std::max(max_total, s + u);
            csv << m.name << ',' << fmt17(s) << ',' << fmt17(u) << ',' << fmt17(s + u) << '\n';
        }
        SvgCanvas svg(640, 360);
        const double px = 56, py = 24, pw = 560, ph = 280;
        svg.line(px, py, px, py + ph, "#333", 1.0);
        svg.line(px, py + ph, px + pw, py + ph, "#333", 1.0);
        const double slot = pw / static_cast<double>(methods.size());
        for (std::size_t i = 0; i < methods.size(); ++i) {
            const double x = px + slot * static_cast<double>(i) + slot * 0.25;
            const double w = slot * 0.5;
            const double hs = totals[i].first / max_total * ph;
            const double hu = totals[i].second / max_total * ph;
            svg.rect(x, py + ph - hs, w, hs, palette[0]);
            svg.rect(x, py + ph - hs - hu, w, hu, palette[1]);
            svg.text(x + w / 2, py + ph + 14, methods[i].name, 10, "middle");
            char label[32];
            std::snprintf(label, sizeof(label), "%.3g", totals[i].first + totals[i].second);
            svg.text(x + w / 2, py + ph - hs - hu - 4, label, 9, "middle");
        }
        svg.text(px, py - 8, "training FLOPs (bottom: sampling, top: update)", 11, "start");
        write_file((fs::path(out_dir) / "flops.svg").string(), svg.finish());
        write_file((fs::path(out_dir) / "flops.csv").string(), csv.str());
    }

    // cumulative selection proportions per arm, one panel per method
    {
        std::ostringstream csv;
        csv << "method,episode,arm,proportion\n";
        const int panel_h = 170;
        SvgCanvas svg(640, panel_h * static_cast<int>(methods.size()) + 20);
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const auto& m = methods[mi];
            std::vector<int> arms;
            for (const auto& run : m.seeds)
                for (std::size_t e = 0; e < m.episodes; ++e)
                    if (std::find(arms.begin(), arms.end(), run.selected_k[e]) == arms.end())
                        arms.push_back(run.selected_k[e]);
            std::vector<std::vector<double>> prop(arms.size(),
                                                  std::vector<double>(m.episodes, 0.0));
            for (const auto& run : m.seeds) {
                std::vector<std::uint64_t> counts(arms.size(), 0);
                for (std::size_t e = 0; e < m.episodes; ++e) {
                    for (std::size_t a = 0; a < arms.size(); ++a)
                        if (arms[a] == run.selected_k[e]) counts[a] += 1;
                    for (std::size_t a = 0; a < arms.size(); ++a)
                        prop[a][e] += static_cast<double>(counts[a]) / static_cast<double>(e + 1);
                }
            }
            for (auto& row : prop)
                for (double& p : row) p /= static_cast<double>(m.seeds.size());

            Axes axes;
            axes.scale = {1.0, static_cast<double>(m.episodes), 0.0, 1.0, 56,
                          24.0 + panel_h * static_cast<double>(mi), 500, 110};
            axes.draw(svg, "episode", m.name);
            for (std::size_t a = 0; a < arms.size(); ++a) {
                const auto& color = palette[a % palette.size()];
                std::vector<std::pair<double, double>> line;
                for (std::size_t e = 0; e < m.episodes; ++e) {
                    line.emplace_back(axes.scale.x(static_cast<double>(e + 1)),
                                      axes.scale.y(prop[a][e]));
                    csv << m.name << ',' << (e + 1) << ',' << arms[a] << ',' << fmt17(prop[a][e])
                        << '\n';
                }
                svg.polyline(line, color);
                svg.text(620, axes.scale.py + 12 + 14 * static_cast<double>(a),
                         "K=" + std::to_string(arms[a]), 10, "end");
                svg.line(566, axes.scale.py + 8 + 14 * static_cast<double>(a), 580,
                         axes.scale.py + 8 + 14 * static_cast<double>(a), color, 2.0);
            }
        }
        write_file((fs::path(out_dir) / "decisions.svg").string(), svg.finish());
        write_file((fs::path(out_dir) / "decisions.csv").string(), csv.str());
    }
}

}  // namespace ebrl
