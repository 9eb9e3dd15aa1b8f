#include "tiered/bandit_tiered.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tiered {

double confidence_radius(const BanditState& state, int arm) {
    if (state.counts[arm] == 0) return std::numeric_limits<double>::infinity();
    return std::sqrt(2.0 * state.alpha * std::log(state.f()) /
                     static_cast<double>(state.counts[arm]));
}

ArmPair select_pair(const BanditState& state) {
    const double inf = std::numeric_limits<double>::infinity();
    int best_o = 0, best_e = 0;
    double top_o = -inf, top_e = -inf;
    for (int i = 0; i < state.num_arms; ++i) {
        const double rad = confidence_radius(state, i);
        const double ucb = state.counts[i] == 0 ? inf : state.mean(i) + rad;
        const double lcb = state.counts[i] == 0 ? -inf : state.mean(i) - rad;
        if (ucb > top_o) {
            top_o = ucb;
            best_o = i;
        }
        if (lcb > top_e) {
            top_e = lcb;
            best_e = i;
        }
    }
    return {best_o, best_e};
}

void update(BanditState& state, int pulled_arm, double reward) {
    if (pulled_arm < 0 || pulled_arm >= state.num_arms)
        throw std::out_of_range("update: arm index out of range");
    state.counts[pulled_arm] += 1;
    state.sums[pulled_arm] += reward;
    state.k += 1;
}

RegretLedger run_bandit_tiered(const BanditInstance& inst, const BanditRunOptions& opts,
                               Rng& rng) {
    inst.validate();
    if (!(opts.alpha > 1.0)) throw std::invalid_argument("run_bandit_tiered: alpha must be > 1");
    BanditState state(inst.num_arms(), opts.alpha);
    RegretLedger ledger;
    for (long long k = 1; k <= opts.k_max; ++k) {
        const ArmPair pair = select_pair(state);
        if (opts.observer) opts.observer(state, pair);
        ledger.append(inst.gap(pair.explore_arm), inst.gap(pair.exploit_arm));
        const double reward = pull_arm(inst, pair.explore_arm, rng);
        ledger.realized_o.push_back(reward);
        if (opts.sample_exploit_rewards)
            ledger.realized_e.push_back(pull_arm(inst, pair.exploit_arm, rng));
        update(state, pair.explore_arm, reward);
    }
    return ledger;
}

}  // namespace tiered
