#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "ebrl/rng.hpp"
#include "ebrl/rollout.hpp"

using namespace ebrl;

namespace {

// Independent advantage oracle: the lambda-weighted mixture of n-step
// advantages, expanded term by term with explicit reach masks. Covers the
// same quantity the backward recursion computes, by a different route.
double nstep_mixture_advantage(const RolloutBuffer& b, int env, int t, double gamma,
                               double lambda) {
    const int T = b.steps;
    // mask[u] = 1 while no episode boundary occurred in [t, t+u)
    auto mask = [&](int u) {
        double m = 1.0;
        for (int j = t; j < t + u; ++j) m *= b.dones[b.flat(j, env)] ? 0.0 : 1.0;
        return m;
    };
    auto nstep_return = [&](int n) {
        double g = 0.0;
        for (int i = 0; i < n; ++i)
            g += std::pow(gamma, i) * mask(i) * b.rewards[b.flat(t + i, env)];
        g += std::pow(gamma, n) * mask(n) * b.values[b.flat(t + n, env)];
        return g;
    };
    const int horizon = T - t;
    const double v = b.values[b.flat(t, env)];
    double adv = 0.0;
    for (int n = 1; n < horizon; ++n)
        adv += (1.0 - lambda) * std::pow(lambda, n - 1) * (nstep_return(n) - v);
    adv += std::pow(lambda, horizon - 1) * (nstep_return(horizon) - v);
    return adv;
}

RolloutBuffer random_buffer(int steps, int n_envs, Rng& rng, double done_prob) {
    auto b = RolloutBuffer::make(steps, n_envs, 1, 0);
    for (int i = 0; i < b.sample_count(); ++i) {
        b.rewards[i] = rng.uniform(-1.0, 1.0);
        b.dones[i] = rng.uniform() < done_prob ? 1 : 0;
    }
    for (auto& v : b.values) v = rng.uniform(-1.0, 1.0);
    return b;
}

}  // namespace

TEST_SUITE("gae") {
    TEST_CASE("single terminal step") {
        auto b = RolloutBuffer::make(1, 1, 1, 0);
        b.rewards[0] = 1.0;
        b.values[0] = 0.5;
        b.values[1] = 123.0;  // masked by the terminal flag
        b.dones[0] = 1;
        compute_gae(b, 0.99, 0.95);
        CHECK(b.advantages[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(b.returns[0] == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("lambda=0 collapses to the one-step TD error") {
        Rng rng(2);
        auto b = random_buffer(12, 3, rng, 0.15);
        compute_gae(b, 0.97, 0.0);
        for (int e = 0; e < b.n_envs; ++e)
            for (int t = 0; t < b.steps; ++t) {
                const std::size_t i = b.flat(t, e);
                const double nonterminal = b.dones[i] ? 0.0 : 1.0;
                const double delta = b.rewards[i] +
                                     0.97 * b.values[b.flat(t + 1, e)] * nonterminal -
                                     b.values[i];
                CHECK(b.advantages[i] == doctest::Approx(delta).epsilon(1e-12));
            }
    }

    TEST_CASE("matches the n-step mixture oracle on random episodes") {
        Rng rng(33);
        for (int trial = 0; trial < 1000; ++trial) {
            auto b = random_buffer(10, 1, rng, 0.2);
            compute_gae(b, 0.99, 0.95);
            for (int t = 0; t < b.steps; ++t) {
                const double oracle = nstep_mixture_advantage(b, 0, t, 0.99, 0.95);
                CHECK(std::abs(b.advantages[b.flat(t, 0)] - oracle) < 1e-8);
            }
        }
    }

    TEST_CASE("returns equal advantages plus values") {
        Rng rng(4);
        auto b = random_buffer(16, 2, rng, 0.1);
        compute_gae(b, 0.95, 0.9);
        for (int i = 0; i < b.sample_count(); ++i)
            CHECK(b.returns[i] == doctest::Approx(b.advantages[i] + b.values[i]).epsilon(1e-12));
    }

    TEST_CASE("lambda=1 telescopes to the discounted reward sum plus bootstrap") {
        Rng rng(6);
        auto b = random_buffer(8, 1, rng, 0.0);  // no terminations
        const double gamma = 0.98;
        compute_gae(b, gamma, 1.0);
        for (int t = 0; t < b.steps; ++t) {
            double expected = 0.0;
            for (int s = t; s < b.steps; ++s)
                expected += std::pow(gamma, s - t) * b.rewards[b.flat(s, 0)];
            expected += std::pow(gamma, b.steps - t) * b.values[b.flat(b.steps, 0)];
            CHECK(std::abs(b.advantages[b.flat(t, 0)] + b.values[b.flat(t, 0)] - expected) <
                  1e-8);
        }
    }
}

TEST_SUITE("rollout.buffer") {
    TEST_CASE("values carry one extra time row") {
        const auto b = RolloutBuffer::make(5, 3, 2, 0);
        CHECK(b.values.size() == 6u * 3u);
        CHECK(b.observations.size() == 5u * 3u * 2u);
        CHECK(b.actions_disc.size() == 15u);
    }

    TEST_CASE("continuous buffers allocate the action plane") {
        const auto b = RolloutBuffer::make(4, 2, 3, 2);
        CHECK(b.actions_cont.size() == 4u * 2u * 2u);
        CHECK(b.actions_disc.empty());
    }

    TEST_CASE("invalid shapes are rejected") {
        CHECK_THROWS_AS(RolloutBuffer::make(0, 1, 1, 0), std::invalid_argument);
    }
}

TEST_SUITE("rollout.reward_norm") {
    TEST_CASE("scaling is deterministic and finite") {
        RewardNormalizer a(0.99, 2), b(0.99, 2);
        Rng rng(8);
        for (int i = 0; i < 500; ++i) {
            const double r = rng.uniform(-1.0, 1.0);
            const bool done = rng.uniform() < 0.05;
            const double sa = a.normalize(i % 2, r, done);
            const double sb = b.normalize(i % 2, r, done);
            CHECK(sa == sb);
            CHECK(std::isfinite(sa));
        }
    }

    TEST_CASE("variance estimate tracks the running returns") {
        RewardNormalizer n(0.0, 1);  // gamma 0: returns are the raw rewards
        Rng rng(9);
        for (int i = 0; i < 20000; ++i) n.normalize(0, rng.normal(), false);
        CHECK(n.variance() == doctest::Approx(1.0).epsilon(0.05));
    }

    TEST_CASE("episode boundaries reset the running return") {
        RewardNormalizer with_reset(1.0, 1);
        for (int i = 0; i < 10; ++i) with_reset.normalize(0, 1.0, true);
        // with gamma=1 and a reset each step every running return is 1.0
        CHECK(with_reset.variance() < 1.0);
    }
}
