#pragma once

#include <functional>
#include <vector>

#include "tiered/bandit.hpp"
#include "tiered/ledger.hpp"
#include "tiered/rng.hpp"

namespace tiered {

// Shared learner state for the UCB explorer / LCB exploiter pair. Counts and
// sums track explorer pulls only.
struct BanditState {
    int num_arms = 0;
    double alpha = 1.5;  // confidence exponent, > 1
    long long k = 1;     // current episode index, 1-based
    std::vector<long long> counts;
    std::vector<double> sums;

    BanditState(int arms, double alpha_)
        : num_arms(arms), alpha(alpha_), counts(arms, 0), sums(arms, 0.0) {}

    double mean(int arm) const {
        return counts[arm] > 0 ? sums[arm] / static_cast<double>(counts[arm]) : 0.0;
    }
    // f(k) = 1 + 16 A^2 (k+1)^2
    double f() const {
        const double kk = static_cast<double>(k) + 1.0;
        return 1.0 + 16.0 * num_arms * num_arms * kk * kk;
    }
};

// sqrt(2 alpha log f(k) / N_i); +infinity when the arm is unpulled.
double confidence_radius(const BanditState& state, int arm);

struct ArmPair {
    int explore_arm;
    int exploit_arm;
};

// Explorer takes the UCB argmax, exploiter the LCB argmax. Unpulled arms
// have UCB +inf and LCB -inf; ties break to the lowest arm index.
ArmPair select_pair(const BanditState& state);

// Records the explorer's pull and advances the episode counter. Exploiter
// pulls never enter the counts.
void update(BanditState& state, int pulled_arm, double reward);

struct BanditRunOptions {
    long long k_max = 1;
    double alpha = 1.5;
    // When set, the exploiter's arm is also pulled so its realized reward can
    // be logged; the draw never enters the learner state.
    bool sample_exploit_rewards = false;
    // Invoked after each selection, before the update.
    std::function<void(const BanditState&, ArmPair)> observer;
};

RegretLedger run_bandit_tiered(const BanditInstance& inst, const BanditRunOptions& opts,
                               Rng& rng);

}  // namespace tiered
