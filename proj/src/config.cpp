#include "ebrl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ebrl {

namespace {

using nlohmann::json;

// Tracks consumed keys so leftovers can be rejected by name.
class StrictObj {
public:
    StrictObj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw std::invalid_argument("config: " + path_ + " must be an object");
    }

    bool has(const std::string& key) {
        if (j_.contains(key)) {
            seen_.insert(key);
            return true;
        }
        return false;
    }

    const json& at(const std::string& key) { return j_.at(key); }

    template <typename T>
    void opt(const std::string& key, T& out) {
        if (!has(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw std::invalid_argument("config: bad value type for key '" + full(key) + "'");
        }
    }

    std::string full(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw std::invalid_argument("config: unknown key '" + full(it.key()) + "'");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

int default_max_steps(EnvKind kind) {
    switch (kind) {
        case EnvKind::proc_maze: return 48;
        case EnvKind::key_door: return 120;
        case EnvKind::point_mass: return 200;
    }
    return 48;
}

EnvSpec parse_env(const json& j) {
    StrictObj o(j, "env");
    EnvSpec env;
    std::string kind = to_string(env.kind);
    o.opt("kind", kind);
    env.kind = env_kind_from_string(kind);
    env.max_episode_steps = default_max_steps(env.kind);
    o.opt("width", env.width);
    o.opt("height", env.height);
    o.opt("max_episode_steps", env.max_episode_steps);
    std::string mode = "fixed_set";
    o.opt("level_mode", mode);
    if (mode == "fixed_set")
        env.level_mode = LevelMode::fixed_set;
    else if (mode == "full_distribution")
        env.level_mode = LevelMode::full_distribution;
    else
        throw std::invalid_argument("config: env.level_mode must be fixed_set or full_distribution");
    o.opt("n_levels", env.n_levels);
    o.opt("sparse_reward", env.sparse_reward);
    o.finish();
    return env;
}

SchedulerConfig parse_scheduler(const json& j) {
    StrictObj o(j, "scheduler");
    SchedulerConfig s;
    std::string algo = to_string(s.kind);
    o.opt("algorithm", algo);
    s.kind = scheduler_kind_from_string(algo);
    o.opt("k", s.fixed_k);
    if (o.has("epoch_set")) {
        try {
            s.epochs.values = o.at("epoch_set").get<std::vector<int>>();
        } catch (const json::exception&) {
            throw std::invalid_argument("config: bad value type for key 'scheduler.epoch_set'");
        }
    }
    o.opt("c", s.c);
    std::uint64_t window = s.window;
    o.opt("window", window);
    s.window = static_cast<std::size_t>(window);
    o.opt("eta", s.eta);
    o.opt("prior_mean", s.prior_mean);
    o.opt("prior_var", s.prior_var);
    o.opt("var_floor", s.var_floor);
    std::string signal = "value_prediction";
    o.opt("signal", signal);
    if (signal == "value_prediction")
        s.signal = BanditSignal::value_prediction;
    else if (signal == "episodic_return")
        s.signal = BanditSignal::episodic_return;
    else
        throw std::invalid_argument(
            "config: scheduler.signal must be value_prediction or episodic_return");
    o.finish();
    return s;
}

PpoHyper parse_ppo(const json& j, bool& reward_norm_given) {
    StrictObj o(j, "ppo");
    PpoHyper p;
    o.opt("gamma", p.gamma);
    o.opt("gae_lambda", p.gae_lambda);
    o.opt("clip_eps", p.clip_eps);
    o.opt("value_coef", p.value_coef);
    o.opt("entropy_coef", p.entropy_coef);
    o.opt("value_clip", p.value_clip);
    o.opt("max_grad_norm", p.max_grad_norm);
    o.opt("learning_rate", p.learning_rate);
    o.opt("n_minibatches", p.n_minibatches);
    o.opt("batch_size", p.batch_size);
    o.opt("adv_normalize", p.adv_normalize);
    reward_norm_given = o.has("reward_normalize");
    if (reward_norm_given) o.opt("reward_normalize", p.reward_normalize);
    o.finish();
    return p;
}

DracHyper parse_drac(const json& j) {
    StrictObj o(j, "drac");
    DracHyper d;
    o.opt("reg_coef", d.reg_coef);
    std::string t = to_string(d.transform);
    o.opt("transform", t);
    d.transform = transform_from_string(t);
    o.finish();
    return d;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (name.empty()) throw std::invalid_argument("config: name must be nonempty");
    if (algorithm != "ppo" && algorithm != "ppo_drac")
        throw std::invalid_argument("config: algorithm must be ppo or ppo_drac");
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
    if (eval_episodes < 1) throw std::invalid_argument("config: eval_episodes must be >= 1");
    train_settings().validate();
}

TrainSettings ExperimentConfig::train_settings() const {
    TrainSettings t;
    t.env = env;
    t.use_drac = algorithm == "ppo_drac";
    t.drac = drac;
    t.ppo = ppo;
    t.scheduler = scheduler;
    t.policy_hidden = policy_hidden;
    t.value_hidden = value_hidden;
    t.n_episodes = n_episodes;
    t.rollout_steps = rollout_steps;
    t.n_envs = n_envs;
    return t;
}

std::string ExperimentConfig::resolved_out_dir() const {
    return out_dir.empty() ? "runs/" + name : out_dir;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + ex.what());
    }
    StrictObj o(j, "");
    ExperimentConfig c;
    o.opt("name", c.name);
    if (o.has("env")) c.env = parse_env(o.at("env"));
    o.opt("algorithm", c.algorithm);
    if (c.algorithm != "ppo" && c.algorithm != "ppo_drac")
        throw std::invalid_argument("config: algorithm must be ppo or ppo_drac");
    if (o.has("scheduler")) c.scheduler = parse_scheduler(o.at("scheduler"));
    bool reward_norm_given = false;
    if (o.has("ppo")) c.ppo = parse_ppo(o.at("ppo"), reward_norm_given);
    // reward scaling defaults on for plain runs and off with augmentation
    // regularizers, unless set explicitly
    if (!reward_norm_given) c.ppo.reward_normalize = (c.algorithm == "ppo");
    if (o.has("drac")) c.drac = parse_drac(o.at("drac"));
    o.opt("policy_hidden", c.policy_hidden);
    o.opt("value_hidden", c.value_hidden);
    o.opt("seeds", c.seeds);
    o.opt("n_episodes", c.n_episodes);
    o.opt("eval_episodes", c.eval_episodes);
    o.opt("rollout_steps", c.rollout_steps);
    o.opt("n_envs", c.n_envs);
    o.opt("out_dir", c.out_dir);
    o.finish();
    c.validate();
    return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    json j;
    j["name"] = c.name;
    j["env"] = {{"kind", to_string(c.env.kind)},
                {"width", c.env.width},
                {"height", c.env.height},
                {"max_episode_steps", c.env.max_episode_steps},
                {"level_mode",
                 c.env.level_mode == LevelMode::fixed_set ? "fixed_set" : "full_distribution"},
                {"n_levels", c.env.n_levels},
                {"sparse_reward", c.env.sparse_reward}};
    j["algorithm"] = c.algorithm;
    j["scheduler"] = {{"algorithm", to_string(c.scheduler.kind)},
                      {"k", c.scheduler.fixed_k},
                      {"epoch_set", c.scheduler.epochs.values},
                      {"c", c.scheduler.c},
                      {"window", static_cast<std::uint64_t>(c.scheduler.window)},
                      {"eta", c.scheduler.eta},
                      {"prior_mean", c.scheduler.prior_mean},
                      {"prior_var", c.scheduler.prior_var},
                      {"var_floor", c.scheduler.var_floor},
                      {"signal", c.scheduler.signal == BanditSignal::value_prediction
                                     ? "value_prediction"
                                     : "episodic_return"}};
    j["ppo"] = {{"gamma", c.ppo.gamma},
                {"gae_lambda", c.ppo.gae_lambda},
                {"clip_eps", c.ppo.clip_eps},
                {"value_coef", c.ppo.value_coef},
                {"entropy_coef", c.ppo.entropy_coef},
                {"value_clip", c.ppo.value_clip},
                {"max_grad_norm", c.ppo.max_grad_norm},
                {"learning_rate", c.ppo.learning_rate},
                {"n_minibatches", c.ppo.n_minibatches},
                {"batch_size", c.ppo.batch_size},
                {"adv_normalize", c.ppo.adv_normalize},
                {"reward_normalize", c.ppo.reward_normalize}};
    j["drac"] = {{"reg_coef", c.drac.reg_coef}, {"transform", to_string(c.drac.transform)}};
    j["policy_hidden"] = c.policy_hidden;
    j["value_hidden"] = c.value_hidden;
    j["seeds"] = c.seeds;
    j["n_episodes"] = c.n_episodes;
    j["eval_episodes"] = c.eval_episodes;
    j["rollout_steps"] = c.rollout_steps;
    j["n_envs"] = c.n_envs;
    j["out_dir"] = c.resolved_out_dir();
    return j.dump(2) + "\n";
}

}  // namespace ebrl
