#pragma once

#include <vector>

#include "tiered/rng.hpp"

namespace tiered {

enum class BanditRewardKind {
    bernoulli,        // reward in {0,1} with the arm's mean
    bounded_uniform,  // uniform on [mu-w, mu+w] with w = min(mu, 1-mu)
};

// Stochastic bandit instance: per-arm means in [0,1]. Gaps are derived,
// Delta_i = max_j mu_j - mu_i.
struct BanditInstance {
    std::vector<double> means;
    BanditRewardKind reward_kind = BanditRewardKind::bernoulli;

    int num_arms() const { return static_cast<int>(means.size()); }
    double best_mean() const;
    double gap(int arm) const { return best_mean() - means[arm]; }

    // Smallest strictly positive gap; +infinity when all arms are optimal.
    double delta_min() const;

    // Throws std::invalid_argument unless A >= 2 and every mean is in [0,1].
    void validate() const;
};

// Unbiased draw with mean means[arm]. Arm indices are 0-based.
double pull_arm(const BanditInstance& inst, int arm, Rng& rng);

}  // namespace tiered
