#include "ebrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace ebrl {

std::string to_string(EnvKind kind) {
    switch (kind) {
        case EnvKind::proc_maze: return "proc_maze";
        case EnvKind::key_door: return "key_door";
        case EnvKind::point_mass: return "point_mass";
    }
    return "proc_maze";
}

EnvKind env_kind_from_string(const std::string& name) {
    if (name == "proc_maze") return EnvKind::proc_maze;
    if (name == "key_door") return EnvKind::key_door;
    if (name == "point_mass") return EnvKind::point_mass;
    throw std::invalid_argument("unknown env kind: " + name);
}

void EnvSpec::validate() const {
    if (max_episode_steps < 1) throw std::invalid_argument("env: max_episode_steps must be >= 1");
    if (level_mode == LevelMode::fixed_set && n_levels < 1)
        throw std::invalid_argument("env: n_levels must be >= 1 in fixed_set mode");
    if (kind == EnvKind::proc_maze) {
        if (width < 5 || height < 5 || width % 2 == 0 || height % 2 == 0)
            throw std::invalid_argument("env: proc_maze needs odd width/height >= 5");
    } else if (kind == EnvKind::key_door) {
        if (width < 5 || height < 4)
            throw std::invalid_argument("env: key_door needs width >= 5, height >= 4");
    }
}

int EnvSpec::obs_dim() const {
    if (kind == EnvKind::point_mass) return 4;
    return 5 * width * height;
}

int EnvSpec::action_count() const {
    switch (kind) {
        case EnvKind::proc_maze: return 4;
        case EnvKind::key_door: return 6;
        case EnvKind::point_mass: return 0;
    }
    return 0;
}

int EnvSpec::action_dim() const { return kind == EnvKind::point_mass ? 2 : 0; }

std::uint64_t sample_level(const EnvSpec& spec, Rng& rng, LevelPartition partition) {
    if (spec.level_mode == LevelMode::full_distribution) return rng.next_u64();
    const auto n = static_cast<std::uint64_t>(spec.n_levels);
    if (partition == LevelPartition::train) return rng.uniform_index(n);
    std::uint64_t seed;
    do {
        seed = rng.next_u64();
    } while (seed < n);
    return seed;
}

Env::Env(const EnvSpec& spec) : spec_(spec) { spec_.validate(); }

std::vector<double> Env::reset(std::uint64_t level_seed) {
    level_seed_ = level_seed;
    steps_ = 0;
    terminal_ = false;
    has_key_ = false;
    door_open_ = false;
    key_x_ = key_y_ = door_x_ = door_y_ = -1;
    Rng rng(mix64(level_seed, 0x6c65766cULL, static_cast<std::uint64_t>(spec_.kind)));
    switch (spec_.kind) {
        case EnvKind::proc_maze: generate_maze(rng); break;
        case EnvKind::key_door: generate_key_door(rng); break;
        case EnvKind::point_mass: generate_point_mass(rng); break;
    }
    return observation();
}

// Recursive-backtracking maze over cells at odd coordinates; the carved
// spanning tree makes every open cell reachable from every other.
void Env::generate_maze(Rng& rng) {
    const int w = spec_.width, h = spec_.height;
    walls_.assign(static_cast<std::size_t>(w) * h, 1);
    auto open = [&](int x, int y) { walls_[static_cast<std::size_t>(y) * w + x] = 0; };

    std::vector<std::pair<int, int>> stack{{1, 1}};
    open(1, 1);
    const int dx[4] = {0, 0, -2, 2};
    const int dy[4] = {-2, 2, 0, 0};
    while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        int order[4] = {0, 1, 2, 3};
        rng.shuffle(order, order + 4);
        bool advanced = false;
        for (int d : order) {
            const int nx = cx + dx[d], ny = cy + dy[d];
            if (nx < 1 || ny < 1 || nx >= w - 1 || ny >= h - 1) continue;
            if (!wall_at(nx, ny)) continue;
            open(nx, ny);
            open(cx + dx[d] / 2, cy + dy[d] / 2);
            stack.emplace_back(nx, ny);
            advanced = true;
            break;
        }
        if (!advanced) stack.pop_back();
    }

    // goal in the far corner (always carved), agent at a random other cell
    goal_x_ = w - 2;
    goal_y_ = h - 2;
    std::vector<std::pair<int, int>> cells;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (!wall_at(x, y) && !(x == goal_x_ && y == goal_y_)) cells.emplace_back(x, y);
    const auto ai = rng.uniform_index(cells.size());
    agent_x_ = cells[ai].first;
    agent_y_ = cells[ai].second;
}

// Two rooms split by a wall with a locked door; the key spawns on the
// agent's side, the goal behind the door. Reachable by construction.
void Env::generate_key_door(Rng& rng) {
    const int w = spec_.width, h = spec_.height;
    walls_.assign(static_cast<std::size_t>(w) * h, 0);
    for (int x = 0; x < w; ++x) {
        walls_[x] = 1;
        walls_[static_cast<std::size_t>(h - 1) * w + x] = 1;
    }
    for (int y = 0; y < h; ++y) {
        walls_[static_cast<std::size_t>(y) * w] = 1;
        walls_[static_cast<std::size_t>(y) * w + (w - 1)] = 1;
    }
    const int split = 2 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(w - 4)));
    for (int y = 1; y < h - 1; ++y) walls_[static_cast<std::size_t>(y) * w + split] = 1;
    door_x_ = split;
    door_y_ = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(h - 2)));
    walls_[static_cast<std::size_t>(door_y_) * w + door_x_] = 0;  // door cell, blocked until opened

    std::vector<std::pair<int, int>> left, right;
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < split; ++x) left.emplace_back(x, y);
        for (int x = split + 1; x < w - 1; ++x) right.emplace_back(x, y);
    }
    const auto ai = rng.uniform_index(left.size());
    auto ki = rng.uniform_index(left.size() - 1);
    if (ki >= ai) ++ki;
    agent_x_ = left[ai].first;
    agent_y_ = left[ai].second;
    key_x_ = left[ki].first;
    key_y_ = left[ki].second;
    const auto gi = rng.uniform_index(right.size());
    goal_x_ = right[gi].first;
    goal_y_ = right[gi].second;
}

void Env::generate_point_mass(Rng& rng) {
    pos_[0] = rng.uniform();
    pos_[1] = rng.uniform();
    target_[0] = rng.uniform();
    target_[1] = rng.uniform();
    vel_[0] = vel_[1] = 0.0;
}

bool Env::wall_at(int x, int y) const {
    return walls_[static_cast<std::size_t>(y) * spec_.width + x] != 0;
}

bool Env::passable(int x, int y) const {
    if (x < 0 || y < 0 || x >= spec_.width || y >= spec_.height) return false;
    if (wall_at(x, y)) return false;
    if (x == door_x_ && y == door_y_ && !door_open_) return false;
    return true;
}

std::vector<double> Env::observation() const {
    std::vector<double> obs(spec_.obs_dim(), 0.0);
    if (spec_.kind == EnvKind::point_mass) {
        obs[0] = target_[0] - pos_[0];
        obs[1] = target_[1] - pos_[1];
        obs[2] = vel_[0];
        obs[3] = vel_[1];
        return obs;
    }
    const int w = spec_.width, h = spec_.height, plane = w * h;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (wall_at(x, y)) obs[static_cast<std::size_t>(y) * w + x] = 1.0;
    obs[1 * plane + agent_y_ * w + agent_x_] = 1.0;
    if (key_x_ >= 0 && !has_key_) obs[2 * plane + key_y_ * w + key_x_] = 1.0;
    if (door_x_ >= 0 && !door_open_) obs[3 * plane + door_y_ * w + door_x_] = 1.0;
    obs[4 * plane + goal_y_ * w + goal_x_] = 1.0;
    return obs;
}

Env::Step Env::step(int action) {
    if (terminal_) throw std::logic_error("Env::step: episode already terminal");
    if (spec_.kind == EnvKind::point_mass)
        throw std::logic_error("Env::step: point_mass takes a continuous action");
    if (action < 0 || action >= spec_.action_count())
        throw std::invalid_argument("Env::step: action out of range");
    return step_grid(action);
}

Env::Step Env::step_grid(int action) {
    ++steps_;
    const int dx[4] = {0, 0, -1, 1};
    const int dy[4] = {-1, 1, 0, 0};
    if (action < 4) {
        const int nx = agent_x_ + dx[action], ny = agent_y_ + dy[action];
        if (passable(nx, ny)) {
            agent_x_ = nx;
            agent_y_ = ny;
        }
    } else if (action == 4) {  // pickup
        if (!has_key_ && agent_x_ == key_x_ && agent_y_ == key_y_) has_key_ = true;
    } else {  // toggle
        if (has_key_ && !door_open_ && std::abs(agent_x_ - door_x_) + std::abs(agent_y_ - door_y_) == 1)
            door_open_ = true;
    }

    Step out;
    const bool at_goal = (agent_x_ == goal_x_ && agent_y_ == goal_y_);
    if (spec_.kind == EnvKind::proc_maze) {
        if (at_goal) {
            out.reward = 1.0;
            out.done = true;
        } else {
            out.reward = spec_.sparse_reward ? 0.0 : -0.01;
            out.done = steps_ >= spec_.max_episode_steps;
        }
    } else {  // key_door
        if (at_goal) {
            out.reward = 1.0 - 0.9 * static_cast<double>(steps_) / spec_.max_episode_steps;
            out.done = true;
        } else {
            out.reward = 0.0;
            out.done = steps_ >= spec_.max_episode_steps;
        }
    }
    terminal_ = out.done;
    return out;
}

Env::Step Env::step(std::span<const double> action) {
    if (terminal_) throw std::logic_error("Env::step: episode already terminal");
    if (spec_.kind != EnvKind::point_mass)
        throw std::logic_error("Env::step: grid kinds take a discrete action");
    if (action.size() != 2) throw std::invalid_argument("Env::step: force must be 2-dimensional");
    ++steps_;
    for (int i = 0; i < 2; ++i) {
        const double f = std::clamp(action[i], -1.0, 1.0);
        vel_[i] += f * kPointMassDt;
        const double moved = pos_[i] + vel_[i] * kPointMassDt;
        pos_[i] = std::clamp(moved, 0.0, 1.0);
        if (moved != pos_[i]) vel_[i] = 0.0;  // inelastic walls
    }
    const double dist = std::hypot(target_[0] - pos_[0], target_[1] - pos_[1]);
    Step out;
    out.reward = -dist;
    out.done = dist < kPointMassGoalRadius || steps_ >= spec_.max_episode_steps;
    terminal_ = out.done;
    return out;
}

std::string Env::render_ascii() const {
    std::ostringstream os;
    if (spec_.kind == EnvKind::point_mass) {
        os << "pos=(" << pos_[0] << ", " << pos_[1] << ") vel=(" << vel_[0] << ", " << vel_[1]
           << ") target=(" << target_[0] << ", " << target_[1] << ")\n";
        return os.str();
    }
    for (int y = 0; y < spec_.height; ++y) {
        for (int x = 0; x < spec_.width; ++x) {
            char c = wall_at(x, y) ? '#' : '.';
            if (x == door_x_ && y == door_y_) c = door_open_ ? '/' : 'D';
            if (x == goal_x_ && y == goal_y_) c = 'G';
            if (x == key_x_ && y == key_y_ && !has_key_) c = 'k';
            if (x == agent_x_ && y == agent_y_) c = 'A';
            os << c;
        }
        os << '\n';
    }
    return os.str();
}

int shortest_path_steps(const Env& env) {
    const auto& spec = env.spec();
    if (spec.kind == EnvKind::point_mass) return -1;
    const int w = spec.width, h = spec.height;
    std::vector<int> dist(static_cast<std::size_t>(w) * h, -1);
    std::deque<std::pair<int, int>> queue;
    auto [ax, ay] = env.agent_pos();
    auto [gx, gy] = env.goal_pos();
    dist[static_cast<std::size_t>(ay) * w + ax] = 0;
    queue.emplace_back(ax, ay);
    const int dx[4] = {0, 0, -1, 1};
    const int dy[4] = {-1, 1, 0, 0};
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        if (x == gx && y == gy) return dist[static_cast<std::size_t>(y) * w + x];
        for (int d = 0; d < 4; ++d) {
            const int nx = x + dx[d], ny = y + dy[d];
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (env.wall_at(nx, ny)) continue;
            auto& cell = dist[static_cast<std::size_t>(ny) * w + nx];
            if (cell >= 0) continue;
            cell = dist[static_cast<std::size_t>(y) * w + x] + 1;
            queue.emplace_back(nx, ny);
        }
    }
    return -1;
}

VecEnv::VecEnv(const EnvSpec& spec, int n_envs, std::uint64_t level_stream_seed)
    : spec_(spec), level_rng_(mix64(level_stream_seed, 0x6c766c73ULL)) {
    if (n_envs < 1) throw std::invalid_argument("VecEnv: n_envs must be >= 1");
    envs_.reserve(n_envs);
    for (int i = 0; i < n_envs; ++i) envs_.emplace_back(spec_);
    running_returns_.assign(n_envs, 0.0);
}

std::vector<double> VecEnv::reset_all() {
    std::vector<double> obs(static_cast<std::size_t>(size()) * obs_dim());
    for (int i = 0; i < size(); ++i) {
        const auto o = envs_[i].reset(sample_level(spec_, level_rng_, LevelPartition::train));
        std::copy(o.begin(), o.end(), obs.begin() + static_cast<std::size_t>(i) * obs_dim());
        running_returns_[i] = 0.0;
    }
    completed_returns_.clear();
    return obs;
}

void VecEnv::handle_done(int i, StepOut& out, double reward) {
    running_returns_[i] += reward;
    if (out.dones[i]) {
        completed_returns_.push_back(running_returns_[i]);
        running_returns_[i] = 0.0;
        const auto o = envs_[i].reset(sample_level(spec_, level_rng_, LevelPartition::train));
        std::copy(o.begin(), o.end(), out.obs.begin() + static_cast<std::size_t>(i) * obs_dim());
    } else {
        const auto o = envs_[i].observation();
        std::copy(o.begin(), o.end(), out.obs.begin() + static_cast<std::size_t>(i) * obs_dim());
    }
}

VecEnv::StepOut VecEnv::step_discrete(std::span<const int> actions) {
    if (static_cast<int>(actions.size()) != size())
        throw std::invalid_argument("VecEnv::step_discrete: action count mismatch");
    StepOut out;
    out.obs.resize(static_cast<std::size_t>(size()) * obs_dim());
    out.rewards.resize(size());
    out.dones.resize(size());
    for (int i = 0; i < size(); ++i) {
        const auto r = envs_[i].step(actions[i]);
        out.rewards[i] = r.reward;
        out.dones[i] = r.done ? 1 : 0;
        handle_done(i, out, r.reward);
    }
    return out;
}

VecEnv::StepOut VecEnv::step_continuous(std::span<const double> actions) {
    const int ad = spec_.action_dim();
    if (static_cast<int>(actions.size()) != size() * ad)
        throw std::invalid_argument("VecEnv::step_continuous: action size mismatch");
    StepOut out;
    out.obs.resize(static_cast<std::size_t>(size()) * obs_dim());
    out.rewards.resize(size());
    out.dones.resize(size());
    for (int i = 0; i < size(); ++i) {
        const auto r = envs_[i].step(actions.subspan(static_cast<std::size_t>(i) * ad, ad));
        out.rewards[i] = r.reward;
        out.dones[i] = r.done ? 1 : 0;
        handle_done(i, out, r.reward);
    }
    return out;
}

std::vector<double> VecEnv::drain_completed_returns() {
    std::vector<double> out;
    out.swap(completed_returns_);
    return out;
}

}  // namespace ebrl
