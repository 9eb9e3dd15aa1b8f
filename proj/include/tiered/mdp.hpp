#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tiered/rng.hpp"

namespace tiered {

// Time-dependent deterministic policy: one action per (layer, state).
struct DetPolicy {
    int num_states = 0;
    int horizon = 0;
    std::vector<int> action;  // [h][s], row-major

    DetPolicy() = default;
    DetPolicy(int horizon_, int num_states_, int fill = 0)
        : num_states(num_states_), horizon(horizon_),
          action(static_cast<std::size_t>(horizon_) * num_states_, fill) {}

    int& at(int h, int s) { return action[static_cast<std::size_t>(h) * num_states + s]; }
    int at(int h, int s) const { return action[static_cast<std::size_t>(h) * num_states + s]; }

    bool operator==(const DetPolicy&) const = default;
};

// Convex mixture over whole-episode deterministic policies. A component is
// drawn once per episode, not per step.
struct MixedPolicy {
    std::vector<DetPolicy> components;
    std::vector<double> weights;  // nonnegative, summing to 1 within 1e-12

    void validate() const;
};

struct Trajectory {
    struct Step {
        int state;
        int action;
        double reward;
        int next_state;
    };
    std::vector<Step> steps;  // length exactly H
};

// Episodic tabular MDP with time-indexed transitions and deterministic
// rewards. Layers are 0-based internally (h = 0..H-1); the external JSON
// format is 1-based.
struct TabularMdp {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    int initial_state = 0;
    std::vector<double> transitions;  // [h][s][a][s'], row-major
    std::vector<double> rewards;      // [h][s][a]

    TabularMdp() = default;
    TabularMdp(int s, int a, int h)
        : num_states(s), num_actions(a), horizon(h),
          transitions(static_cast<std::size_t>(h) * s * a * s, 0.0),
          rewards(static_cast<std::size_t>(h) * s * a, 0.0) {}

    std::size_t sa_index(int h, int s, int a) const {
        return (static_cast<std::size_t>(h) * num_states + s) * num_actions + a;
    }
    std::span<const double> row(int h, int s, int a) const {
        return {transitions.data() + sa_index(h, s, a) * num_states,
                static_cast<std::size_t>(num_states)};
    }
    std::span<double> mutable_row(int h, int s, int a) {
        return {transitions.data() + sa_index(h, s, a) * num_states,
                static_cast<std::size_t>(num_states)};
    }
    double reward(int h, int s, int a) const { return rewards[sa_index(h, s, a)]; }
    double& reward(int h, int s, int a) { return rewards[sa_index(h, s, a)]; }

    // Throws std::invalid_argument when a structural invariant is violated
    // (row sums off by more than 1e-12, rewards outside [0,1], bad dims).
    void validate() const;
};

// Random instance following the standard recipe: each transition row is S
// integers drawn uniformly from {1..10} and normalized, each reward is xi/10
// with xi uniform in {1..10}.
TabularMdp generate_random_mdp(int num_states, int num_actions, int horizon, Rng& rng);

Trajectory sample_trajectory(const TabularMdp& mdp, const DetPolicy& policy, Rng& rng);
Trajectory sample_trajectory(const TabularMdp& mdp, const MixedPolicy& policy, Rng& rng);

// JSON serialization. Fields: {"S","A","H","transitions","rewards"} with
// transitions[h][s][a][s'] and rewards[h][s][a] as nested arrays; indices in
// the file are 1-based (layer 1 = first step). The initial state is always
// state 1 of the file.
std::string mdp_to_json(const TabularMdp& mdp);
TabularMdp mdp_from_json(const std::string& text);
void save_mdp(const TabularMdp& mdp, const std::string& path);
TabularMdp load_mdp(const std::string& path);

}  // namespace tiered
