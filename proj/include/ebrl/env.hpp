#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ebrl/rng.hpp"

namespace ebrl {

enum class EnvKind { proc_maze, key_door, point_mass };
enum class LevelMode { fixed_set, full_distribution };
enum class LevelPartition { train, test };

std::string to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& name);

struct EnvSpec {
    EnvKind kind = EnvKind::proc_maze;
    int width = 9;    // grid kinds; odd and >= 5 for proc_maze
    int height = 9;
    int max_episode_steps = 48;  // about 1.6x the worst-case maze path
    LevelMode level_mode = LevelMode::fixed_set;
    int n_levels = 200;
    bool sparse_reward = false;  // proc_maze: drop the per-step penalty

    void validate() const;

    // Grid observations are one-hot channel stacks in a fixed channel order
    // (wall, agent, key, door, goal), channel-major, row-major within a
    // channel. point_mass observes (target - position, velocity).
    int obs_dim() const;
    bool continuous_actions() const { return kind == EnvKind::point_mass; }
    int action_count() const;  // discrete kinds
    int action_dim() const;    // continuous kinds
};

// Uniform level seed draw. Train draws come from {0..n_levels-1} in fixed_set
// mode; test draws cover the full 64-bit space excluding the train set.
std::uint64_t sample_level(const EnvSpec& spec, Rng& rng, LevelPartition partition);

// One environment instance; the layout is a pure function of
// (spec, level_seed).
class Env {
public:
    struct Step {
        double reward = 0.0;
        bool done = false;
    };

    explicit Env(const EnvSpec& spec);

    std::vector<double> reset(std::uint64_t level_seed);
    Step step(int action);                          // discrete kinds
    Step step(std::span<const double> action);      // point_mass force in [-1,1]^2

    std::vector<double> observation() const;
    bool terminal() const { return terminal_; }
    int steps_taken() const { return steps_; }
    std::uint64_t level_seed() const { return level_seed_; }
    const EnvSpec& spec() const { return spec_; }

    std::string render_ascii() const;

    // grid introspection (tests, oracles, rendering)
    bool wall_at(int x, int y) const;
    std::pair<int, int> agent_pos() const { return {agent_x_, agent_y_}; }
    std::pair<int, int> goal_pos() const { return {goal_x_, goal_y_}; }

private:
    EnvSpec spec_;
    std::uint64_t level_seed_ = 0;
    int steps_ = 0;
    bool terminal_ = true;  // must reset before stepping

    // grid kinds
    std::vector<std::uint8_t> walls_;  // row-major, 1 = wall
    int agent_x_ = 0, agent_y_ = 0;
    int goal_x_ = 0, goal_y_ = 0;
    int key_x_ = -1, key_y_ = -1;
    int door_x_ = -1, door_y_ = -1;
    bool has_key_ = false;
    bool door_open_ = false;

    // point_mass
    double pos_[2] = {0, 0};
    double vel_[2] = {0, 0};
    double target_[2] = {0, 0};

    void generate_maze(Rng& rng);
    void generate_key_door(Rng& rng);
    void generate_point_mass(Rng& rng);
    Step step_grid(int action);
    bool passable(int x, int y) const;
};

// Minimum number of moves from the agent to the goal on a grid level
// (walls and the closed door block); -1 when unreachable. Optimal-play
// oracle for proc_maze.
int shortest_path_steps(const Env& env);

// point_mass integration constants
constexpr double kPointMassDt = 0.05;
constexpr double kPointMassGoalRadius = 0.05;

// Synchronously advanced batch of environments with automatic resets.
// On termination the returned observation is the first observation of a
// fresh level sampled from the train partition.
class VecEnv {
public:
    VecEnv(const EnvSpec& spec, int n_envs, std::uint64_t level_stream_seed);

    int size() const { return static_cast<int>(envs_.size()); }
    int obs_dim() const { return spec_.obs_dim(); }
    const EnvSpec& spec() const { return spec_; }

    // (Re)starts every environment on a fresh train-partition level.
    std::vector<double> reset_all();  // n_envs * obs_dim

    struct StepOut {
        std::vector<double> obs;      // n_envs * obs_dim (post-reset on done)
        std::vector<double> rewards;  // raw env rewards
        std::vector<std::uint8_t> dones;
    };
    StepOut step_discrete(std::span<const int> actions);
    StepOut step_continuous(std::span<const double> actions);  // n_envs * action_dim

    // Raw returns of episodes that finished since the last drain.
    std::vector<double> drain_completed_returns();

private:
    EnvSpec spec_;
    std::vector<Env> envs_;
    Rng level_rng_;
    std::vector<double> running_returns_;
    std::vector<double> completed_returns_;

    void handle_done(int i, StepOut& out, double reward);
};

}  // namespace ebrl
