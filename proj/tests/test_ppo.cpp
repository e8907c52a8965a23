#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "ebrl/env.hpp"
#include "ebrl/ppo.hpp"
#include "ebrl/rollout.hpp"

using namespace ebrl;

namespace {

// Small discrete setup shared by update-phase tests.
struct Setup {
    EnvSpec spec;
    Policy policy;
    Net value;
    VecEnv venv;
    Rng action_rng;
    std::vector<double> obs;

    explicit Setup(std::uint64_t seed, int n_envs = 2)
        : spec(make_spec()),
          policy(Policy::make_discrete(NetArch{{spec.obs_dim(), 8, 4}}, mix64(seed, 1))),
          value(Net::init(NetArch{{spec.obs_dim(), 8, 1}}, mix64(seed, 2))),
          venv(spec, n_envs, mix64(seed, 4)),
          action_rng(mix64(seed, 3)) {
        obs = venv.reset_all();
    }

    static EnvSpec make_spec() {
        EnvSpec s;
        s.kind = EnvKind::proc_maze;
        s.width = 5;
        s.height = 5;
        s.max_episode_steps = 20;
        s.n_levels = 4;
        return s;
    }

    RolloutBuffer rollout(int steps) {
        auto b = collect_rollout(policy, value, venv, steps, action_rng, nullptr, obs);
        compute_gae(b, 0.99, 0.95);
        return b;
    }
};

}  // namespace

TEST_SUITE("ppo.losses") {
    TEST_CASE("clipped surrogate hand values") {
        CHECK(ppo_policy_loss(0.0, 0.0, 1.0, 0.2) == doctest::Approx(-1.0).epsilon(1e-9));
        CHECK(ppo_policy_loss(std::log(1.5), 0.0, 1.0, 0.2) ==
              doctest::Approx(-1.2).epsilon(1e-9));
        CHECK(ppo_policy_loss(std::log(0.5), 0.0, -1.0, 0.2) ==
              doctest::Approx(0.8).epsilon(1e-9));
    }

    TEST_CASE("per-sample loss never drops below -(1+eps)|A|") {
        Rng rng(1);
        for (int trial = 0; trial < 2000; ++trial) {
            const double lp_new = rng.uniform(-3.0, 3.0);
            const double lp_old = rng.uniform(-3.0, 3.0);
            const double adv = rng.uniform(-5.0, 5.0);
            const double eps = rng.uniform(0.05, 0.5);
            CHECK(ppo_policy_loss(lp_new, lp_old, adv, eps) >=
                  -(1.0 + eps) * std::abs(adv) - 1e-12);
        }
    }

    TEST_CASE("value loss hand values") {
        CHECK(ppo_value_loss(0.7, 0.0, 0.7, 0.0) == doctest::Approx(0.0));
        CHECK(ppo_value_loss(2.0, 0.0, 0.0, 0.0) == doctest::Approx(4.0).epsilon(1e-9));
        CHECK(ppo_value_loss(0.5, 0.0, 1.0, 0.2) == doctest::Approx(0.64).epsilon(1e-9));
    }
}

TEST_SUITE("ppo.transforms") {
    TEST_CASE("horizontal flip is an involution") {
        const GridShape shape{5, 4, 3};
        Rng rng(2);
        std::vector<double> obs(5 * 4 * 3);
        for (double& x : obs) x = rng.uniform(0.0, 1.0);
        const auto once = apply_transform(obs, shape, Transform::horizontal_flip, rng);
        const auto twice = apply_transform(once, shape, Transform::horizontal_flip, rng);
        CHECK(twice == obs);
    }

    TEST_CASE("translating an all-zero observation stays all-zero") {
        const GridShape shape{5, 4, 4};
        Rng rng(3);
        const std::vector<double> zeros(5 * 4 * 4, 0.0);
        for (int i = 0; i < 20; ++i) {
            const auto out = apply_transform(zeros, shape, Transform::random_translate, rng);
            CHECK(out == zeros);
        }
    }

    TEST_CASE("uniform noise perturbs at least one entry") {
        const GridShape shape{5, 3, 3};
        Rng rng(4);
        const std::vector<double> obs(5 * 3 * 3, 0.25);
        for (int i = 0; i < 100; ++i) {
            const auto out = apply_transform(obs, shape, Transform::uniform_noise, rng);
            CHECK(out != obs);
        }
    }

    TEST_CASE("cell-moving transforms require a grid-shaped observation") {
        Rng rng(5);
        const std::vector<double> obs(7, 0.0);
        CHECK_THROWS_AS(apply_transform(obs, GridShape{5, 2, 2}, Transform::horizontal_flip, rng),
                        std::invalid_argument);
    }
}

TEST_SUITE("ppo.drac") {
    TEST_CASE("identity transform gives zero regularizers") {
        auto policy = Policy::make_discrete(NetArch{{8, 6, 3}}, 6);
        auto value = Net::init(NetArch{{8, 6, 1}}, 7);
        Rng rng(8);
        std::vector<double> batch(4 * 8);
        for (double& x : batch) x = rng.uniform(-1.0, 1.0);
        const GridShape shape{};
        CHECK(drac_policy_reg(policy, batch, 4, shape, Transform::identity, rng) ==
              doctest::Approx(0.0).epsilon(1e-12));
        CHECK(drac_value_reg(value, batch, 4, shape, Transform::identity, rng) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }

    TEST_CASE("value regularizer is the squared prediction difference") {
        // 1x2 grid, single channel; the net reads the first cell, so a flip
        // swaps predictions 1.0 and 0.4
        auto value = Net::init(NetArch{{2, 1}}, 9);
        value.unflatten_params(std::vector<double>{1.0, 0.0, 0.0});
        const std::vector<double> obs{1.0, 0.4};
        Rng rng(10);
        const double reg =
            drac_value_reg(value, obs, 1, GridShape{1, 2, 1}, Transform::horizontal_flip, rng);
        CHECK(reg == doctest::Approx(0.36).epsilon(1e-12));
    }

    TEST_CASE("regularizers are nonnegative on random transforms") {
        auto policy = Policy::make_discrete(NetArch{{20, 8, 4}}, 11);
        auto value = Net::init(NetArch{{20, 8, 1}}, 12);
        const GridShape shape{5, 2, 2};
        Rng rng(13);
        std::vector<double> batch(6 * 20);
        for (double& x : batch) x = rng.uniform(0.0, 1.0);
        for (auto t : {Transform::horizontal_flip, Transform::random_translate,
                       Transform::uniform_noise}) {
            CHECK(drac_policy_reg(policy, batch, 6, shape, t, rng) >= -1e-12);
            CHECK(drac_value_reg(value, batch, 6, shape, t, rng) >= -1e-12);
        }
    }
}

TEST_SUITE("ppo.update_phase") {
    TEST_CASE("K=1 performs one optimizer step per minibatch; K=0 is rejected") {
        Setup s(100);
        auto buffer = s.rollout(8);  // 16 samples
        PpoHyper hyper;
        hyper.n_minibatches = 4;
        CHECK_THROWS_AS(update_phase(s.policy, s.value, buffer, 0, hyper, nullptr, {}, 1, 1,
                                     nullptr, 1),
                        std::invalid_argument);
        const auto stats =
            update_phase(s.policy, s.value, buffer, 1, hyper, nullptr, {}, 1, 1, nullptr, 1);
        CHECK(stats.optimizer_steps == 4);
        CHECK(s.policy.net().step_count() == 4);
        CHECK(s.value.step_count() == 4);
    }

    TEST_CASE("zero learning rate freezes the parameters for any K") {
        Setup s(200);
        auto buffer = s.rollout(8);
        PpoHyper hyper;
        hyper.learning_rate = 0.0;
        hyper.n_minibatches = 2;
        const auto before_p = s.policy.net().flatten_params();
        const auto before_v = s.value.flatten_params();
        update_phase(s.policy, s.value, buffer, 3, hyper, nullptr, {}, 2, 1, nullptr, 1);
        CHECK(s.policy.net().flatten_params() == before_p);
        CHECK(s.value.flatten_params() == before_v);
    }

    TEST_CASE("doubling K doubles the recorded update FLOPs") {
        Setup a(300), b(300);
        auto buf_a = a.rollout(8);
        auto buf_b = b.rollout(8);
        PpoHyper hyper;
        hyper.n_minibatches = 2;
        FlopsLedger la, lb;
        update_phase(a.policy, a.value, buf_a, 1, hyper, nullptr, {}, 3, 1, &la, 1000);
        update_phase(b.policy, b.value, buf_b, 2, hyper, nullptr, {}, 3, 1, &lb, 1000);
        CHECK(lb.update_total() == 2 * la.update_total());
    }

    TEST_CASE("identity-transform regularizers change nothing") {
        Setup plain(400), reg(400);
        auto buf_plain = plain.rollout(8);
        auto buf_reg = reg.rollout(8);
        PpoHyper hyper;
        hyper.n_minibatches = 2;
        DracHyper drac;
        drac.reg_coef = 0.7;
        drac.transform = Transform::identity;
        const GridShape shape = GridShape::of(plain.spec);
        update_phase(plain.policy, plain.value, buf_plain, 2, hyper, nullptr, shape, 4, 1,
                     nullptr, 1);
        update_phase(reg.policy, reg.value, buf_reg, 2, hyper, &drac, shape, 4, 1, nullptr, 1);
        const auto p1 = plain.policy.net().flatten_params();
        const auto p2 = reg.policy.net().flatten_params();
        const auto v1 = plain.value.flatten_params();
        const auto v2 = reg.value.flatten_params();
        for (std::size_t i = 0; i < p1.size(); ++i) CHECK(std::abs(p1[i] - p2[i]) <= 1e-10);
        for (std::size_t i = 0; i < v1.size(); ++i) CHECK(std::abs(v1[i] - v2[i]) <= 1e-10);
    }

    TEST_CASE("minibatch count must divide the sample count") {
        Setup s(500);
        auto buffer = s.rollout(7);  // 14 samples
        PpoHyper hyper;
        hyper.n_minibatches = 4;
        CHECK_THROWS_AS(update_phase(s.policy, s.value, buffer, 1, hyper, nullptr, {}, 5, 1,
                                     nullptr, 1),
                        std::invalid_argument);
    }
}

TEST_SUITE("ppo.collect") {
    TEST_CASE("identical seeds give bitwise-identical buffers") {
        Setup a(600), b(600);
        const auto ba = a.rollout(6);
        const auto bb = b.rollout(6);
        CHECK(ba.observations == bb.observations);
        CHECK(ba.actions_disc == bb.actions_disc);
        CHECK(ba.log_probs == bb.log_probs);
        CHECK(ba.rewards == bb.rewards);
        CHECK(ba.values == bb.values);
        CHECK(ba.dones == bb.dones);
    }

    TEST_CASE("values carry the bootstrap row") {
        Setup s(700, 1);
        const auto b = s.rollout(1);
        CHECK(b.values.size() == 2);
    }

    TEST_CASE("stored log-probs match a recompute under unchanged parameters") {
        Setup s(800);
        const auto b = s.rollout(10);
        for (int t = 0; t < b.steps; ++t)
            for (int e = 0; e < b.n_envs; ++e) {
                const std::size_t i = b.flat(t, e);
                const double lp =
                    s.policy.log_prob_of(b.obs_at(t, e), b.actions_disc[i], {});
                CHECK(lp == doctest::Approx(b.log_probs[i]).epsilon(1e-12));
            }
    }

    TEST_CASE("mean_estimated_return averages the stored predictions") {
        auto b = RolloutBuffer::make(2, 2, 1, 0);
        b.values = {0.0, 1.0, 2.0, 3.0, 9.0, 9.0};  // bootstrap row excluded
        CHECK(mean_estimated_return(b) == doctest::Approx(1.5).epsilon(1e-12));
    }

    TEST_CASE("stored predictions equal a recompute from the same parameters") {
        Setup s(900);
        const auto b = s.rollout(6);
        CHECK(mean_value_prediction(s.value, b) ==
              doctest::Approx(mean_estimated_return(b)).epsilon(1e-12));
    }

    TEST_CASE("a constant value head reports its constant") {
        Setup s(1000);
        // zero weights, bias c on the output layer
        std::vector<double> flat(s.value.param_count(), 0.0);
        flat.back() = 0.75;
        s.value.unflatten_params(flat);
        const auto b = collect_rollout(s.policy, s.value, s.venv, 4, s.action_rng, nullptr,
                                       s.obs);
        CHECK(mean_estimated_return(b) == doctest::Approx(0.75).epsilon(1e-12));
    }
}
