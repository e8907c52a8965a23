#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ebrl/config.hpp"
#include "ebrl/env.hpp"
#include "ebrl/flops.hpp"
#include "ebrl/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int fail(const std::string& message) {
    json j;
    j["error"] = message;
    std::cerr << j.dump() << std::endl;
    return 1;
}

int cmd_train(const std::string& config_path) {
    const auto config = ebrl::parse_config_file(config_path);
    const auto result = ebrl::run_suite(config);
    for (const auto& s : result.summaries) {
        json j;
        j["seed"] = s.seed;
        j["final_train_score"] = s.final_train_score;
        j["test_score"] = s.test_score;
        j["flops_total"] = s.flops_total;
        j["wall_clock_sec"] = s.wall_clock_sec;
        std::cout << j.dump() << '\n';
    }
    for (const auto& [seed, msg] : result.failures)
        std::cerr << json{{"seed", seed}, {"error", msg}}.dump() << '\n';
    if (!result.failures.empty() && result.summaries.empty())
        return fail("all seeds failed; see " + config.resolved_out_dir() + "/failures.json");
    std::cout << "wrote " << config.resolved_out_dir() << '\n';
    return result.failures.empty() ? 0 : 1;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& config_path) {
    const auto config = ebrl::parse_config_file(config_path);
    auto [policy, value] = ebrl::read_checkpoint(checkpoint_path);
    const double score =
        ebrl::evaluate_policy(policy, config.env, config.eval_episodes, 0x6576616cULL);
    json j;
    j["checkpoint"] = checkpoint_path;
    j["episodes"] = config.eval_episodes;
    j["test_score"] = score;
    std::cout << j.dump() << '\n';
    return 0;
}

int cmd_aggregate(const std::vector<std::string>& dirs, const std::string& baseline,
                  const std::string& out_dir, int resamples, double confidence,
                  std::uint64_t seed) {
    const auto entries = ebrl::aggregate_methods(dirs, baseline, resamples, confidence, seed);
    const std::string table = ebrl::format_aggregate_table(entries);
    std::cout << table;
    fs::create_directories(out_dir);
    {
        std::ofstream txt(fs::path(out_dir) / "aggregate.txt");
        txt << table;
        std::ofstream csv(fs::path(out_dir) / "aggregate.csv");
        csv << ebrl::format_aggregate_csv(entries);
    }
    std::cout << "wrote " << (fs::path(out_dir) / "aggregate.csv").string() << '\n';
    return 0;
}

int cmd_report_decisions(const std::string& dir) {
    const auto logs = ebrl::find_train_logs(dir);
    if (logs.empty()) return fail("no train logs under " + dir);
    const auto report = ebrl::decision_report(logs);
    std::ostringstream csv;
    csv << "episode";
    for (int k : report.arm_values) csv << ",prop_k" << k;
    csv << '\n';
    for (std::size_t e = 0; e < report.proportions.size(); ++e) {
        csv << (e + 1);
        for (double p : report.proportions[e]) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", p);
            csv << ',' << buf;
        }
        csv << '\n';
    }
    const fs::path out = fs::path(dir) / "decisions.csv";
    std::ofstream f(out);
    f << csv.str();
    json j;
    for (std::size_t a = 0; a < report.arm_values.size(); ++a)
        j["K=" + std::to_string(report.arm_values[a])] = report.final_proportions[a];
    std::cout << j.dump() << '\n';
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

int cmd_plot(const std::vector<std::string>& dirs, const std::string& out_dir) {
    ebrl::emit_plots(dirs, out_dir);
    std::cout << "wrote plots to " << out_dir << '\n';
    return 0;
}

int cmd_render_level(const std::string& spec_arg, std::uint64_t seed) {
    ebrl::EnvSpec spec;
    if (fs::exists(spec_arg)) {
        spec = ebrl::parse_config_file(spec_arg).env;
    } else {
        spec.kind = ebrl::env_kind_from_string(spec_arg);
    }
    ebrl::Env env(spec);
    env.reset(seed);
    std::cout << env.render_ascii();
    return 0;
}

int cmd_flops_verify() {
    const auto model = ebrl::verification_reference_model();
    const auto sampling = ebrl::o_sampling(model);
    const auto update = ebrl::o_update(model, ebrl::kVerificationK);
    const std::vector<int> ks(ebrl::kVerificationEpisodes,
                              static_cast<int>(ebrl::kVerificationK));
    const auto total = ebrl::o_total(model, ks);
    std::cout << "O_sampling " << sampling << '\n';
    std::cout << "O_update " << update << '\n';
    std::cout << "O_total " << total << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bandit-scheduled on-policy RL trainer"};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, out_dir = ".", baseline, spec_arg;
    std::vector<std::string> dirs;
    std::uint64_t seed = 0;
    int resamples = 2000;
    double confidence = 0.95;

    auto* train = app.add_subcommand("train", "run all seeds of an experiment config");
    train->add_option("config", config_path, "experiment config (JSON)")->required();

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on held-out levels");
    eval->add_option("checkpoint", checkpoint_path, "checkpoint file")->required();
    eval->add_option("config", config_path, "experiment config (JSON)")->required();

    auto* aggregate = app.add_subcommand("aggregate", "aggregate test scores across methods");
    aggregate->add_option("dirs", dirs, "suite output directories")->required()->expected(-1);
    aggregate->add_option("--baseline", baseline, "baseline method name")->required();
    aggregate->add_option("--out", out_dir, "report output directory");
    aggregate->add_option("--resamples", resamples, "bootstrap resamples");
    aggregate->add_option("--confidence", confidence, "CI confidence level");
    aggregate->add_option("--seed", seed, "bootstrap seed");

    auto* decisions = app.add_subcommand("report-decisions", "per-arm selection proportions");
    decisions->add_option("dir", config_path, "suite output directory")->required();

    auto* plot = app.add_subcommand("plot", "emit SVG plots and backing CSVs");
    plot->add_option("dirs", dirs, "suite output directories")->required()->expected(-1);
    plot->add_option("--out", out_dir, "plot output directory");

    auto* render = app.add_subcommand("render-level", "print one level as ASCII art");
    render->add_option("spec", spec_arg, "env kind or config file")->required();
    render->add_option("seed", seed, "level seed")->required();

    app.add_subcommand("flops-verify",
                       "print closed-form compute totals for the reference configuration");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("train")) return cmd_train(config_path);
        if (app.got_subcommand("eval")) return cmd_eval(checkpoint_path, config_path);
        if (app.got_subcommand("aggregate"))
            return cmd_aggregate(dirs, baseline, out_dir, resamples, confidence, seed);
        if (app.got_subcommand("report-decisions")) return cmd_report_decisions(config_path);
        if (app.got_subcommand("plot")) return cmd_plot(dirs, out_dir);
        if (app.got_subcommand("render-level")) return cmd_render_level(spec_arg, seed);
        if (app.got_subcommand("flops-verify")) return cmd_flops_verify();
    } catch (const std::exception& ex) {
        return fail(ex.what());
    }
    return fail("no subcommand");
}
