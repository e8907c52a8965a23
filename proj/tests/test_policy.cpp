#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ebrl/policy.hpp"

using namespace ebrl;

TEST_SUITE("policy.categorical") {
    TEST_CASE("softmax sums to one") {
        Rng rng(1);
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> logits(1 + rng.uniform_index(8));
            for (double& z : logits) z = rng.uniform(-8.0, 8.0);
            const auto p = softmax(logits);
            double sum = 0.0;
            for (double x : p) sum += x;
            CHECK(std::abs(sum - 1.0) < 1e-9);
        }
    }

    TEST_CASE("entropy is maximal exactly at uniform logits") {
        const std::vector<double> uniform(5, 0.3);
        const double h_max = entropy_categorical(uniform);
        CHECK(h_max == doctest::Approx(std::log(5.0)).epsilon(1e-12));
        Rng rng(2);
        for (int trial = 0; trial < 200; ++trial) {
            auto logits = uniform;
            for (double& z : logits) z += rng.uniform(-0.5, 0.5);
            double spread = 0.0;
            for (double z : logits) spread += std::abs(z - logits[0]);
            if (spread < 1e-9) continue;
            CHECK(entropy_categorical(logits) < h_max);
        }
    }

    TEST_CASE("log_prob matches the softmax probability") {
        const std::vector<double> logits{0.2, -1.1, 2.4};
        const auto p = softmax(logits);
        for (int a = 0; a < 3; ++a)
            CHECK(log_prob_categorical(logits, a) ==
                  doctest::Approx(std::log(p[a])).epsilon(1e-12));
    }

    TEST_CASE("sampling follows the distribution") {
        const std::vector<double> logits{0.0, 0.0};
        Rng rng(3);
        int first = 0;
        const int n = 100000;
        for (int i = 0; i < n; ++i)
            if (sample_categorical(logits, rng) == 0) ++first;
        CHECK(std::abs(first / static_cast<double>(n) - 0.5) < 0.02);
    }

    TEST_CASE("kl of a hand-evaluated pair") {
        const std::vector<double> lp{std::log(0.5), std::log(0.5)};
        const std::vector<double> lq{std::log(0.9), std::log(0.1)};
        CHECK(kl_categorical(lp, lq) == doctest::Approx(0.5108256237659905).epsilon(1e-9));
        CHECK(kl_categorical(lp, lp) == doctest::Approx(0.0));
    }

    TEST_CASE("kl is nonnegative") {
        Rng rng(4);
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> a(4), b(4);
            for (double& z : a) z = rng.uniform(-4.0, 4.0);
            for (double& z : b) z = rng.uniform(-4.0, 4.0);
            CHECK(kl_categorical(a, b) >= -1e-12);
        }
    }
}

TEST_SUITE("policy.heads") {
    TEST_CASE("discrete evaluate gradients match finite differences") {
        auto policy = Policy::make_discrete(NetArch{{3, 6, 4}}, 11);
        Rng rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> out(4);
            for (double& z : out) z = rng.uniform(-2.0, 2.0);
            const int action = static_cast<int>(rng.uniform_index(4));
            const auto ev = policy.evaluate(out, action, {});
            const double h = 1e-6;
            for (int j = 0; j < 4; ++j) {
                auto up = out, down = out;
                up[j] += h;
                down[j] -= h;
                const double fd_lp = (log_prob_categorical(up, action) -
                                      log_prob_categorical(down, action)) /
                                     (2 * h);
                const double fd_h =
                    (entropy_categorical(up) - entropy_categorical(down)) / (2 * h);
                CHECK(ev.dlogp_dout[j] == doctest::Approx(fd_lp).epsilon(1e-5));
                CHECK(ev.dent_dout[j] == doctest::Approx(fd_h).epsilon(1e-5));
            }
        }
    }

    TEST_CASE("gaussian log-density and gradients") {
        auto policy = Policy::make_continuous(NetArch{{2, 4, 2}}, 13);
        Rng rng(6);
        std::vector<double> mean{0.3, -0.8};
        std::vector<double> action{0.9, -0.2};
        const auto ev = policy.evaluate(mean, 0, action);
        // hand density: sum of per-dim normal log-densities with sigma=1
        double expected = 0.0;
        for (int j = 0; j < 2; ++j) {
            const double z = action[j] - mean[j];
            expected += -0.5 * z * z - 0.5 * std::log(2.0 * M_PI);
        }
        CHECK(ev.log_prob == doctest::Approx(expected).epsilon(1e-12));
        CHECK(ev.entropy ==
              doctest::Approx(2.0 * (0.5 + 0.5 * std::log(2.0 * M_PI))).epsilon(1e-12));
        for (int j = 0; j < 2; ++j) {
            CHECK(ev.dlogp_dout[j] == doctest::Approx(action[j] - mean[j]).epsilon(1e-12));
            CHECK(ev.dent_dlogstd[j] == doctest::Approx(1.0));
        }
        (void)rng;
    }

    TEST_CASE("sampled actions reproduce their stored log-probability") {
        auto policy = Policy::make_discrete(NetArch{{4, 8, 3}}, 17);
        Rng rng(7);
        for (int i = 0; i < 50; ++i) {
            std::vector<double> obs(4);
            for (double& x : obs) x = rng.uniform(-1.0, 1.0);
            const auto s = policy.sample(obs, rng);
            CHECK(policy.log_prob_of(obs, s.action_disc, {}) ==
                  doctest::Approx(s.log_prob).epsilon(1e-12));
        }
    }

    TEST_CASE("serialization round-trips both policy kinds") {
        {
            auto p = Policy::make_discrete(NetArch{{3, 5, 2}}, 19);
            std::stringstream ss;
            p.write_text(ss);
            const auto q = Policy::read_text(ss);
            CHECK(q.discrete());
            CHECK(q.net().flatten_params() == p.net().flatten_params());
        }
        {
            auto p = Policy::make_continuous(NetArch{{3, 5, 2}}, 19);
            std::stringstream ss;
            p.write_text(ss);
            const auto q = Policy::read_text(ss);
            CHECK_FALSE(q.discrete());
            CHECK(q.log_std() == p.log_std());
        }
    }

    TEST_CASE("greedy action is the argmax of the logits") {
        auto p = Policy::make_discrete(NetArch{{2, 3}}, 23);
        std::vector<double> obs{0.5, -0.5};
        const auto logits = p.net().forward(obs);
        CHECK(p.act_greedy(obs) == argmax_categorical(logits));
    }
}
