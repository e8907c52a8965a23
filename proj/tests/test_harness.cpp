#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ebrl/harness.hpp"
#include "ebrl/train.hpp"

using namespace ebrl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// small fast experiment used across the harness tests
ExperimentConfig tiny_config(const std::string& name, const std::string& out_root) {
    auto c = parse_config_text(R"({
        "env": {"kind": "proc_maze", "width": 5, "height": 5,
                 "max_episode_steps": 16, "n_levels": 6},
        "policy_hidden": [8], "value_hidden": [8],
        "ppo": {"n_minibatches": 2},
        "rollout_steps": 8, "n_envs": 2,
        "n_episodes": 6, "eval_episodes": 3,
        "seeds": [1, 2]
    })");
    c.name = name;
    c.out_dir = out_root + "/" + name;
    return c;
}

}  // namespace

TEST_SUITE("harness") {
    TEST_CASE("run_suite writes logs, checkpoints and summaries per seed") {
        const std::string root = "harness_test_out/suite";
        fs::remove_all(root);
        auto config = tiny_config("fixed3", root);
        const auto result = run_suite(config);
        CHECK(result.failures.empty());
        CHECK(result.summaries.size() == 2);
        for (const auto seed : {1, 2}) {
            const fs::path dir = fs::path(config.out_dir) / ("seed_" + std::to_string(seed));
            CHECK(fs::exists(dir / "train_log.jsonl"));
            CHECK(fs::exists(dir / "checkpoint.txt"));
            CHECK(fs::exists(dir / "summary.json"));
        }
        CHECK(fs::exists(fs::path(config.out_dir) / "config.json"));

        for (const auto& s : result.summaries) {
            double prop_sum = 0.0;
            for (double p : s.arm_proportions) prop_sum += p;
            CHECK(prop_sum == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(s.n_episodes == 6);
            CHECK(s.env_steps == 6u * 8u * 2u);
            CHECK(s.flops_total == s.flops_sampling + s.flops_update);
        }
    }

    TEST_CASE("summary totals match the last log line") {
        const std::string root = "harness_test_out/consistency";
        fs::remove_all(root);
        auto config = tiny_config("fixed3", root);
        config.seeds = {3};
        run_suite(config);
        const fs::path dir = fs::path(config.out_dir) / "seed_3";
        const auto summary = summary_from_json_file((dir / "summary.json").string());
        std::istringstream log(slurp(dir / "train_log.jsonl"));
        std::string line, last;
        while (std::getline(log, line))
            if (!line.empty()) last = line;
        const auto j = nlohmann::json::parse(last);
        CHECK(j.at("flops_sampling").get<std::uint64_t>() == summary.flops_sampling);
        CHECK(j.at("flops_update").get<std::uint64_t>() == summary.flops_update);
        CHECK(j.at("episode").get<int>() == 6);
    }

    TEST_CASE("reruns are byte-identical and seeds are isolated") {
        const std::string root = "harness_test_out/determinism";
        fs::remove_all(root);
        auto a = tiny_config("fixed3", root + "/a");
        auto b = tiny_config("fixed3", root + "/b");
        run_suite(a);
        run_suite(b);
        for (const auto seed : {"seed_1", "seed_2"}) {
            CHECK(slurp(fs::path(a.out_dir) / seed / "train_log.jsonl") ==
                  slurp(fs::path(b.out_dir) / seed / "train_log.jsonl"));
            CHECK(slurp(fs::path(a.out_dir) / seed / "checkpoint.txt") ==
                  slurp(fs::path(b.out_dir) / seed / "checkpoint.txt"));
        }
        // dropping seed 1 must not change seed 2's bytes
        auto c = tiny_config("fixed3", root + "/c");
        c.seeds = {2};
        run_suite(c);
        CHECK(slurp(fs::path(c.out_dir) / "seed_2" / "train_log.jsonl") ==
              slurp(fs::path(a.out_dir) / "seed_2" / "train_log.jsonl"));
    }

    TEST_CASE("checkpoints round-trip through eval") {
        const std::string root = "harness_test_out/ckpt";
        fs::remove_all(root);
        auto config = tiny_config("fixed3", root);
        config.seeds = {5};
        run_suite(config);
        const fs::path ckpt = fs::path(config.out_dir) / "seed_5" / "checkpoint.txt";
        auto [policy, value] = read_checkpoint(ckpt.string());
        const double a = evaluate_policy(policy, config.env, 5, 99);
        const double b = evaluate_policy(policy, config.env, 5, 99);
        CHECK(a == b);
    }

    TEST_CASE("decision report: round robin is uniform, fixed is degenerate") {
        const std::string root = "harness_test_out/decisions";
        fs::remove_all(root);
        auto rrs = tiny_config("rrs", root);
        rrs.scheduler.kind = SchedulerKind::rrs;
        rrs.scheduler.epochs.values = {3, 2, 1};
        run_suite(rrs);
        const auto report = decision_report(find_train_logs(rrs.out_dir));
        CHECK(report.arm_values == std::vector<int>{3, 2, 1});
        for (const auto& row : report.proportions) {
            double sum = 0.0;
            for (double p : row) sum += p;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
        for (double p : report.final_proportions)
            CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

        auto fixed = tiny_config("fixed3", root);
        run_suite(fixed);
        const auto fixed_report = decision_report(find_train_logs(fixed.out_dir));
        CHECK(fixed_report.arm_values == std::vector<int>{3});
        CHECK(fixed_report.final_proportions[0] == doctest::Approx(1.0));
    }

    TEST_CASE("training logs the round-robin K sequence in order") {
        TrainSettings settings = tiny_config("rrs", "unused").train_settings();
        settings.scheduler.kind = SchedulerKind::rrs;
        settings.scheduler.epochs.values = {3, 2, 1};
        std::vector<int> ks;
        train(settings, 7, [&](const EpisodeRecord& r) { ks.push_back(r.selected_k); });
        CHECK(ks == std::vector<int>{3, 2, 1, 3, 2, 1});
    }

    TEST_CASE("ledger totals equal the closed form applied to the logged Ks") {
        TrainSettings settings = tiny_config("rrs", "unused").train_settings();
        settings.scheduler.kind = SchedulerKind::rrs;
        settings.scheduler.epochs.values = {2, 1};
        const auto result = train(settings, 9, nullptr);
        FlopsModel m;
        m.o_bs1 = flops_per_forward(settings.policy_arch()) +
                  flops_per_forward(settings.value_arch());
        m.n_envs = 2;
        m.episode_len = 8;
        m.batch_size = 8;  // 16 samples over 2 minibatches
        m.n_batches = 2;
        m.n_episodes = static_cast<std::uint64_t>(result.k_sequence.size());
        CHECK(result.ledger.total() == o_total(m, result.k_sequence));
    }

    TEST_CASE("aggregate against itself is exactly parity") {
        const std::string root = "harness_test_out/aggregate";
        fs::remove_all(root);
        auto base = tiny_config("fixed3", root);
        base.seeds = {1};
        run_suite(base);
        const auto entries = aggregate_methods({base.out_dir}, "fixed3", 100, 0.95, 1);
        REQUIRE(entries.size() == 1);
        CHECK(entries[0].mean == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(entries[0].median == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(entries[0].iqm == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(entries[0].og == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(entries[0].mean_lo == entries[0].mean_hi);  // degenerate with one run
        const auto csv = format_aggregate_csv(entries);
        CHECK(csv.find("fixed3") != std::string::npos);
        CHECK_THROWS_AS(aggregate_methods({base.out_dir}, "missing", 100, 0.95, 1),
                        std::invalid_argument);
    }

    TEST_CASE("plots are emitted with one CSV row per episode") {
        const std::string root = "harness_test_out/plots";
        fs::remove_all(root);
        auto config = tiny_config("fixed3", root);
        config.seeds = {1};
        run_suite(config);
        emit_plots({config.out_dir}, root + "/plots");
        CHECK(fs::exists(fs::path(root) / "plots" / "learning_curves.svg"));
        CHECK(fs::exists(fs::path(root) / "plots" / "learning_curves.csv"));
        CHECK(fs::exists(fs::path(root) / "plots" / "flops.svg"));
        CHECK(fs::exists(fs::path(root) / "plots" / "decisions.svg"));
        std::istringstream csv(slurp(fs::path(root) / "plots" / "learning_curves.csv"));
        std::string line;
        int rows = -1;  // header
        while (std::getline(csv, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 6);
    }

    TEST_CASE("plotting nothing writes nothing") {
        const std::string root = "harness_test_out/empty_plots";
        fs::remove_all(root);
        emit_plots({}, root);
        CHECK_FALSE(fs::exists(root));
        emit_plots({root + "/missing"}, root);
        CHECK_FALSE(fs::exists(root));
    }

    TEST_CASE("std bands match a hand computation on synthetic logs") {
        const std::string root = "harness_test_out/band";
        fs::remove_all(root);
        const fs::path suite = fs::path(root) / "m";
        // three synthetic seeds with known per-episode returns
        const double returns[3][2] = {{1.0, 2.0}, {3.0, 4.0}, {5.0, 9.0}};
        for (int s = 0; s < 3; ++s) {
            const fs::path dir = suite / ("seed_" + std::to_string(s));
            fs::create_directories(dir);
            std::ofstream log(dir / "train_log.jsonl");
            for (int e = 0; e < 2; ++e) {
                nlohmann::json j;
                j["episode"] = e + 1;
                j["env_steps"] = (e + 1) * 16;
                j["selected_k"] = 3;
                j["mean_episodic_return"] = returns[s][e];
                j["v_bar"] = 0.0;
                j["policy_loss"] = 0.0;
                j["value_loss"] = 0.0;
                j["entropy"] = 0.0;
                j["flops_sampling"] = 1;
                j["flops_update"] = 1;
                log << j.dump() << '\n';
            }
        }
        std::ofstream cfg(suite / "config.json");
        cfg << serialize_config(parse_config_text(R"({"name":"m"})"));
        cfg.close();
        emit_plots({suite.string()}, root + "/plots");
        const auto csv = slurp(fs::path(root) / "plots" / "learning_curves.csv");
        // episode 1: mean 3, population std sqrt(8/3); episode 2: mean 5, std sqrt(26/3)
        std::istringstream in(csv);
        std::string line;
        std::getline(in, line);  // header
        std::getline(in, line);
        CHECK(line.find("m,1,3,") == 0);
        const double std1 = std::stod(line.substr(line.rfind(',') + 1));
        CHECK(std1 == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-9));
        std::getline(in, line);
        CHECK(line.find("m,2,5,") == 0);
        const double std2 = std::stod(line.substr(line.rfind(',') + 1));
        CHECK(std2 == doctest::Approx(std::sqrt(26.0 / 3.0)).epsilon(1e-9));
    }

    TEST_CASE("run_suite validates the config before launching any seed") {
        auto config = tiny_config("fixed3", "harness_test_out/invalid");
        config.ppo.n_minibatches = 7;  // does not divide 8 * 2 samples
        CHECK_THROWS_AS(run_suite(config), std::invalid_argument);
    }
}
