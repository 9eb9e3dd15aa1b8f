#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tiered/mdp.hpp"

namespace tiered {

// Optimal (or fixed-policy) value tables. v has H+1 layers with v[H] == 0.
struct ValueTables {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    std::vector<double> v;  // [(H+1)][s]
    std::vector<double> q;  // [h][s][a]

    double value(int h, int s) const { return v[static_cast<std::size_t>(h) * num_states + s]; }
    double qvalue(int h, int s, int a) const {
        return q[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
};

// State-action occupancy d[h][s][a] of a policy from the fixed start state.
struct Occupancy {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    std::vector<double> d;  // [h][s][a]

    double at(int h, int s, int a) const {
        return d[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
    double& at(int h, int s, int a) {
        return d[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
};

// Gap structure of an instance. Gaps below a 1e-9 zero-tolerance are treated
// as exactly zero; delta_min is the smallest surviving positive gap (+inf if
// none). d_min minimizes, over the enumerated optimal policies, each policy's
// smallest strictly positive occupancy; it is unavailable when enumeration
// was skipped or exceeded the cap.
struct GapReport {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    std::vector<double> gaps;                   // [h][s][a]
    double delta_min = 0.0;
    std::vector<std::vector<int>> opt_actions;  // [h*S + s] -> ascending action list
    long long num_optimal_policies = -1;        // -1 when not enumerated
    double d_min = 0.0;
    bool d_min_available = false;

    double gap(int h, int s, int a) const {
        return gaps[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
    const std::vector<int>& optimal_actions(int h, int s) const {
        return opt_actions[static_cast<std::size_t>(h) * num_states + s];
    }
};

class EnumerationCapExceeded : public std::runtime_error {
public:
    explicit EnumerationCapExceeded(std::size_t cap)
        : std::runtime_error("optimal-policy enumeration exceeded cap of " +
                             std::to_string(cap)) {}
};

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

// Backward induction: Q*[h] = r + P_h max_a Q*[h+1].
ValueTables optimal_values(const TabularMdp& mdp);

// Exact V^pi_1(s1) by forward DP; mixtures are weighted sums of component
// values.
double policy_value(const TabularMdp& mdp, const DetPolicy& policy);
double policy_value(const TabularMdp& mdp, const MixedPolicy& policy);

Occupancy occupancy(const TabularMdp& mdp, const DetPolicy& policy);
Occupancy occupancy(const TabularMdp& mdp, const MixedPolicy& policy);

// Gap table plus Pi* diagnostics. Enumerates optimal policies to fill d_min
// and |Pi*|; throws EnumerationCapExceeded past the cap.
GapReport gap_report(const TabularMdp& mdp, std::size_t cap = kDefaultEnumerationCap);

// Gap table and optimal-action sets only; never enumerates.
GapReport gap_report_gaps_only(const TabularMdp& mdp);

// All deterministic optimal policies distinct up to occupancy. Unreachable
// states are pinned to the lowest-index optimal action.
std::vector<DetPolicy> enumerate_optimal_policies(const TabularMdp& mdp,
                                                  std::size_t cap = kDefaultEnumerationCap);

// Keeps pi_h(s) where it is already optimal, otherwise substitutes the
// lowest-index optimal action.
DetPolicy convert_to_optimal(const TabularMdp& mdp, const DetPolicy& policy,
                             const GapReport& report);

// Per-cell verdict of the occupancy inequality
//   sum_k d^{pi_k} >= sum_k d^{pi*_k} - (sum_k V* - V^{pi_k}) / delta_min
// with pi*_k = convert_to_optimal(pi_k).
struct OccupancyBoundReport {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    std::vector<double> lhs;  // [h][s][a]
    std::vector<double> rhs;  // [h][s][a]
    double worst_slack = 0.0;  // min over cells of lhs - rhs
    bool holds = false;        // worst_slack >= -1e-8
};
OccupancyBoundReport check_occupancy_bound(const TabularMdp& mdp,
                                           const std::vector<DetPolicy>& policies);

// Well-covered mixture built from a sequence of optimal policies, together
// with the coverage floor tilde_d it certifies:
//   sum_k d^{pi*_k}(s,a) >= (K/2) * tilde_d(s,a) wherever d^{cover}(s,a) > 0.
struct WellCoveredResult {
    MixedPolicy cover;
    Occupancy cover_occupancy;
    std::vector<double> tilde_d;  // [h][s][a]
    double worst_slack = 0.0;     // min over support of lhs - (K/2)*tilde_d
    bool holds = false;
};
WellCoveredResult well_covered_policy(const TabularMdp& mdp,
                                      const std::vector<DetPolicy>& opt_sequence,
                                      std::size_t cap = kDefaultEnumerationCap);

// JSON encodings for summary output (1-based indices in the emitted text).
std::string to_json(const GapReport& report);
std::string to_json(const OccupancyBoundReport& report);

}  // namespace tiered
