#include <doctest.h>

#include <stdexcept>

#include "ebrl/flops.hpp"

using namespace ebrl;

TEST_SUITE("flops") {
    TEST_CASE("reference configuration closed forms") {
        const auto m = verification_reference_model();
        CHECK(o_sampling(m) == 8'690'860'032ULL);
        CHECK(o_update(m, 3) == 311'653'564'416ULL);
        const std::vector<int> ks(kVerificationEpisodes, 3);
        CHECK(o_total(m, ks) == 488'525'247'283'200ULL);
    }

    TEST_CASE("zero-length episodes still pay the bootstrap prediction") {
        auto m = verification_reference_model();
        m.episode_len = 0;
        CHECK(o_sampling(m) == m.n_envs * m.o_bs1);
    }

    TEST_CASE("sampling is linear in the environment count") {
        auto m = verification_reference_model();
        const auto base = o_sampling(m);
        m.n_envs *= 2;
        CHECK(o_sampling(m) == 2 * base);
    }

    TEST_CASE("update cost is linear in K and zero at K=0") {
        const auto m = verification_reference_model();
        CHECK(o_update(m, 0) == 0);
        CHECK(o_update(m, 2) == 2 * o_update(m, 1));
    }

    TEST_CASE("per-episode totals sum sampling and update terms") {
        auto m = verification_reference_model();
        m.n_episodes = 4;
        const std::vector<int> zeros(4, 0);
        CHECK(o_total(m, zeros) == 4 * o_sampling(m));
        const std::vector<int> wrong(3, 1);
        CHECK_THROWS_AS(o_total(m, wrong), std::invalid_argument);
    }

    TEST_CASE("alternating Ks cut the update total to two thirds of fixed 3") {
        auto m = verification_reference_model();
        m.n_episodes = 300;
        std::vector<int> rrs;
        for (int e = 0; e < 300; ++e) rrs.push_back(3 - e % 3);
        const std::vector<int> fixed(300, 3);
        std::uint64_t rrs_update = 0, fixed_update = 0;
        for (int e = 0; e < 300; ++e) {
            rrs_update += o_update(m, static_cast<std::uint64_t>(rrs[e]));
            fixed_update += o_update(m, 3);
        }
        CHECK(3 * rrs_update == 2 * fixed_update);
        (void)fixed;
    }

    TEST_CASE("ledger accumulates monotonically and keeps the breakdown") {
        FlopsLedger ledger;
        CHECK(ledger.total() == 0);
        ledger.record(FlopsPhase::sampling, 5);
        ledger.record(FlopsPhase::sampling, 5);
        ledger.record(FlopsPhase::update, 7);
        CHECK(ledger.sampling_total() == 10);
        CHECK(ledger.update_total() == 7);
        CHECK(ledger.total() == 17);
        CHECK(ledger.entries().size() == 3);
    }

    TEST_CASE("a ledger fed the model amounts reproduces the closed form") {
        auto m = verification_reference_model();
        m.n_episodes = 7;
        const std::vector<int> ks{3, 2, 1, 3, 1, 2, 3};
        FlopsLedger ledger;
        for (int k : ks) {
            ledger.record(FlopsPhase::sampling, o_sampling(m));
            ledger.record(FlopsPhase::update, o_update(m, static_cast<std::uint64_t>(k)));
        }
        CHECK(ledger.total() == o_total(m, ks));
    }

    TEST_CASE("invalid models are rejected") {
        FlopsModel m;
        CHECK_THROWS_AS(o_sampling(m), std::invalid_argument);
    }
}
