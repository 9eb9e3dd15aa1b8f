#include <cmath>
#include <vector>

#include "doctest.h"
#include "tiered/bandit_tiered.hpp"

using namespace tiered;

TEST_CASE("confidence_radius: unpulled arm has infinite radius") {
    BanditState st(3, 1.5);
    CHECK(std::isinf(confidence_radius(st, 0)));
}

TEST_CASE("confidence_radius: f(1) = 257 for two arms") {
    BanditState st(2, 1.1);
    st.k = 1;
    CHECK(st.f() == doctest::Approx(257.0));  // 1 + 16*4*4
}

TEST_CASE("confidence_radius: hand-evaluated value at N=4") {
    BanditState st(2, 1.1);
    st.k = 1;
    st.counts[0] = 4;
    st.sums[0] = 2.0;
    const double expected = std::sqrt(2.0 * 1.1 * std::log(257.0) / 4.0);
    CHECK(confidence_radius(st, 0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(confidence_radius(st, 0) == doctest::Approx(1.7472).epsilon(1e-4));
}

TEST_CASE("select_pair: all unpulled ties to the first arm on both sides") {
    BanditState st(4, 1.5);
    const ArmPair pair = select_pair(st);
    CHECK(pair.explore_arm == 0);
    CHECK(pair.exploit_arm == 0);
}

TEST_CASE("select_pair: dominant arm wins both indices once radii are small") {
    BanditState st(2, 1.5);
    st.k = 100000;
    st.counts = {50000, 50000};
    st.sums = {45000.0, 5000.0};  // means 0.9 and 0.1
    const ArmPair pair = select_pair(st);
    CHECK(pair.explore_arm == 0);
    CHECK(pair.exploit_arm == 0);
}

TEST_CASE("select_pair: exploration bonus and pessimism penalty split the pair") {
    // means 0.6 vs 0.5 but with very unequal counts: the rarely-pulled arm
    // has the larger UCB, the well-pulled one the larger LCB.
    BanditState st(2, 1.1);
    st.k = 1000;
    st.counts = {4, 400};
    st.sums = {2.4, 200.0};
    const double rad0 = confidence_radius(st, 0);
    const double rad1 = confidence_radius(st, 1);
    REQUIRE(0.6 + rad0 > 0.5 + rad1);
    REQUIRE(0.6 - rad0 < 0.5 - rad1);
    const ArmPair pair = select_pair(st);
    CHECK(pair.explore_arm == 0);
    CHECK(pair.exploit_arm == 1);
}

TEST_CASE("update: running mean identities") {
    BanditState st(2, 1.5);
    update(st, 0, 0.7);
    CHECK(st.mean(0) == doctest::Approx(0.7));
    CHECK(st.counts[0] == 1);
    CHECK(st.k == 2);

    BanditState st2(2, 1.5);
    st2.counts[0] = 3;
    st2.sums[0] = 1.5;  // mean 0.5
    update(st2, 0, 0.9);
    CHECK(st2.mean(0) == doctest::Approx(0.6));
}

TEST_CASE("update: long reward list reproduces the arithmetic mean") {
    BanditState st(2, 1.5);
    Rng rng(5);
    double total = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double r = rng.uniform01();
        total += r;
        update(st, 1, r);
    }
    CHECK(st.mean(1) == doctest::Approx(total / 1000.0).epsilon(1e-12));
}

TEST_CASE("f is strictly increasing in k") {
    BanditState st(3, 1.5);
    double prev = st.f();
    for (int i = 0; i < 50; ++i) {
        st.k += 1;
        CHECK(st.f() > prev);
        prev = st.f();
    }
}

TEST_CASE("run_bandit_tiered: single-optimal-arm degenerate gaps") {
    BanditInstance inst;
    inst.means = {0.5, 0.5};  // both optimal: regret identically zero
    BanditRunOptions opts;
    opts.k_max = 200;
    Rng rng(3);
    const RegretLedger led = run_bandit_tiered(inst, opts, rng);
    CHECK(led.cum_o.back() == 0.0);
    CHECK(led.cum_e.back() == 0.0);
}

TEST_CASE("run_bandit_tiered: deterministic (1,0) trace") {
    BanditInstance inst;
    inst.means = {1.0, 0.0};
    BanditRunOptions opts;
    opts.k_max = 2000;
    std::vector<int> first_pulls;
    opts.observer = [&](const BanditState& st, ArmPair pair) {
        if (st.k <= 2) first_pulls.push_back(pair.explore_arm);
    };
    for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
        first_pulls.clear();
        Rng rng(seed);
        const RegretLedger led = run_bandit_tiered(inst, opts, rng);
        CHECK(first_pulls == std::vector<int>{0, 1});  // forced initial sweep
        for (std::size_t k = 1; k < led.episodes(); ++k)
            CHECK(led.inst_e[k] == 0.0);  // exploiter never leaves the good arm
    }
}

TEST_CASE("run_bandit_tiered: forced exploration and index ordering invariants") {
    BanditInstance inst;
    inst.means = {0.6, 0.5, 0.4, 0.3};
    BanditRunOptions opts;
    opts.k_max = 3000;
    std::vector<long long> first_pull_episode(4, -1);
    bool order_ok = true;
    opts.observer = [&](const BanditState& st, ArmPair pair) {
        if (first_pull_episode[pair.explore_arm] < 0)
            first_pull_episode[pair.explore_arm] = st.k;
        for (int i = 0; i < st.num_arms; ++i) {
            const double rad = confidence_radius(st, i);
            if (st.counts[i] > 0)
                order_ok &= st.mean(i) - rad <= st.mean(i) + rad;
        }
    };
    Rng rng(12);
    run_bandit_tiered(inst, opts, rng);
    for (int i = 0; i < 4; ++i) {
        CHECK(first_pull_episode[i] >= 1);
        CHECK(first_pull_episode[i] <= 4);  // each arm within the first A episodes
    }
    CHECK(order_ok);
}

TEST_CASE("pessimism event bound: exploiter rarely prefers a dominated arm with data") {
    // Over 200 seeded runs, count episodes where the exploiter takes the
    // suboptimal arm while the optimal arm already has the visit count
    // required by the pessimism guarantee. The theoretical budget is
    // sum_k 2/k^(2 alpha); a 3x slack keeps the assertion statistical.
    const double alpha = 1.5;
    BanditInstance inst;
    inst.means = {0.7, 0.5};  // gap 0.2
    const double gap = 0.2;
    const long long K = 2000;
    const int runs = 200;
    long long events = 0;
    for (int run = 0; run < runs; ++run) {
        BanditRunOptions opts;
        opts.k_max = K;
        opts.alpha = alpha;
        opts.observer = [&](const BanditState& st, ArmPair pair) {
            if (pair.exploit_arm == 1 &&
                static_cast<double>(st.counts[0]) >=
                    8.0 * alpha * std::log(st.f()) / (gap * gap))
                ++events;
        };
        Rng rng(static_cast<std::uint64_t>(run));
        run_bandit_tiered(inst, opts, rng);
    }
    double budget = 0.0;
    for (long long k = 1; k <= K; ++k) budget += 2.0 / std::pow(k, 2.0 * alpha);
    CHECK(static_cast<double>(events) / runs <= 3.0 * budget);
}

TEST_CASE("ucb pull-share bound: suboptimal arm share drops below 1/(2A)") {
    const double alpha = 1.5;
    BanditInstance inst;
    inst.means = {0.7, 0.5};
    const long long burn_in = 10000;
    const long long K = 20000;
    const int runs = 100;
    int good_runs = 0;
    for (int run = 0; run < runs; ++run) {
        bool ok = true;
        BanditRunOptions opts;
        opts.k_max = K;
        opts.alpha = alpha;
        opts.observer = [&](const BanditState& st, ArmPair) {
            if (st.k >= burn_in && st.k % 100 == 0)
                ok &= static_cast<double>(st.counts[1]) <
                      static_cast<double>(st.k) / (2.0 * st.num_arms);
        };
        Rng rng(1000 + static_cast<std::uint64_t>(run));
        run_bandit_tiered(inst, opts, rng);
        good_runs += ok;
    }
    CHECK(good_runs >= 95);
}
