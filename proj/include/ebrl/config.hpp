#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ebrl/bandit.hpp"
#include "ebrl/env.hpp"
#include "ebrl/ppo.hpp"
#include "ebrl/train.hpp"

namespace ebrl {

// Full declarative description of one experiment. Every field has a default,
// so {} is a valid config; unknown keys are rejected by name.
struct ExperimentConfig {
    std::string name = "run";
    EnvSpec env;
    std::string algorithm = "ppo";  // ppo | ppo_drac
    SchedulerConfig scheduler;
    PpoHyper ppo;
    DracHyper drac;
    std::vector<int> policy_hidden{64, 64};
    std::vector<int> value_hidden{64, 64};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    int n_episodes = 500;
    int eval_episodes = 100;
    int rollout_steps = 64;
    int n_envs = 8;
    std::string out_dir;  // defaults to runs/<name>

    void validate() const;
    TrainSettings train_settings() const;
    std::string resolved_out_dir() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical JSON with all defaults materialized; parse(serialize(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace ebrl
