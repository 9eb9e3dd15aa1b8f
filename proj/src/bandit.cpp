#include "tiered/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tiered {

double BanditInstance::best_mean() const {
    return *std::max_element(means.begin(), means.end());
}

double BanditInstance::delta_min() const {
    const double best = best_mean();
    double dm = std::numeric_limits<double>::infinity();
    for (double mu : means) {
        const double gap = best - mu;
        if (gap > 0.0) dm = std::min(dm, gap);
    }
    return dm;
}

void BanditInstance::validate() const {
    if (means.size() < 2) throw std::invalid_argument("BanditInstance: need A >= 2");
    for (double mu : means) {
        if (!(mu >= 0.0 && mu <= 1.0))
            throw std::invalid_argument("BanditInstance: mean outside [0,1]");
    }
}

double pull_arm(const BanditInstance& inst, int arm, Rng& rng) {
    if (arm < 0 || arm >= inst.num_arms())
        throw std::out_of_range("pull_arm: arm index out of range");
    const double mu = inst.means[arm];
    switch (inst.reward_kind) {
        case BanditRewardKind::bernoulli:
            return rng.bernoulli(mu) ? 1.0 : 0.0;
        case BanditRewardKind::bounded_uniform: {
            // Half-width chosen so the support stays in [0,1] and the mean is
            // exactly mu.
            const double w = std::min(mu, 1.0 - mu);
            return mu + w * (2.0 * rng.uniform01() - 1.0);
        }
    }
    return mu;
}

}  // namespace tiered
