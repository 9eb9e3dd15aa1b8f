#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "tiered/ledger.hpp"
#include "tiered/mdp.hpp"
#include "tiered/oracle.hpp"
#include "tiered/rng.hpp"

namespace tiered {

// Visit counts accumulated from explorer trajectories. The empirical
// transition row is n_sas / n_sa, with an all-zero row at unvisited cells.
struct EpisodeDataset {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    long long episodes = 0;
    std::vector<long long> n_sa;   // [h][s][a]
    std::vector<long long> n_sas;  // [h][s][a][s']

    EpisodeDataset() = default;
    EpisodeDataset(int s, int a, int h)
        : num_states(s), num_actions(a), horizon(h),
          n_sa(static_cast<std::size_t>(h) * s * a, 0),
          n_sas(static_cast<std::size_t>(h) * s * a * s, 0) {}

    std::size_t sa_index(int h, int s, int a) const {
        return (static_cast<std::size_t>(h) * num_states + s) * num_actions + a;
    }
    long long count(int h, int s, int a) const { return n_sa[sa_index(h, s, a)]; }
    long long count(int h, int s, int a, int sp) const {
        return n_sas[sa_index(h, s, a) * num_states + sp];
    }

    void append(const Trajectory& traj);
    void clear();
};

enum class BonusKind { naive_hoeffding, scaled_hoeffding };

// Hoeffding-style confidence width b(n, delta) = scale * H * S *
// sqrt(log(SAH/delta) / n), +infinity at n = 0. The pair (b1, b2) is the
// envelope the width satisfies: b <= b1 * sqrt(log(b2/delta) / n).
struct BonusSpec {
    BonusKind kind = BonusKind::scaled_hoeffding;
    double scale = 0.25;

    double effective_scale() const {
        return kind == BonusKind::naive_hoeffding ? 1.0 : scale;
    }
    double b1(int num_states, int horizon) const {
        return effective_scale() * horizon * num_states;
    }
    double b2(int num_states, int num_actions, int horizon) const {
        return static_cast<double>(num_states) * num_actions * horizon;
    }
};

double bonus(const BonusSpec& spec, int num_states, int num_actions, int horizon,
             long long n, double delta);

struct PviOutput {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    std::vector<double> q_hat;  // [h][s][a], clamped at 0
    std::vector<double> v_hat;  // [(H+1)][s], layer H zero
    DetPolicy policy;

    double q(int h, int s, int a) const {
        return q_hat[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
    double v(int h, int s) const { return v_hat[static_cast<std::size_t>(h) * num_states + s]; }
};

// Pessimistic value iteration: Q = max{r + P_hat V - b, 0}, greedy policy
// with lowest-index tie-break. Only rewards and dimensions of `mdp` are read.
PviOutput pvi(const TabularMdp& mdp, const EpisodeDataset& data, const BonusSpec& spec,
              double delta);

// Same recursion with +b and values clamped to [0, H-h+1]; the greedy policy
// is the explorer's choice.
PviOutput optimistic_values(const TabularMdp& mdp, const EpisodeDataset& data,
                            const BonusSpec& spec, double delta);
DetPolicy optimistic_explorer_step(const TabularMdp& mdp, const EpisodeDataset& data,
                                   const BonusSpec& spec, double delta);

enum class ExplorerKind { optimistic_vi, scripted };

struct TieredRunConfig {
    long long k_max = 10000;
    double alpha = 1.5;  // delta_k = k^-alpha, alpha > 1
    BonusSpec bonus;
    ExplorerKind explorer = ExplorerKind::optimistic_vi;
    // Feed the exploiter's trajectories into the dataset as well (the
    // experiment protocol does; the core framework does not).
    bool use_exploit_data = false;
    // Mixed-arrival only: ratio C = P(exploit user) / P(explore user).
    double mixed_ratio = 1.0;

    void validate() const;
};

// Hook invoked once per episode after both policies are chosen, before data
// collection. Used by diagnostics and tests.
struct EpisodeView {
    long long k;
    double delta_k;
    const PviOutput& exploit;
    const PviOutput& explore;
    const EpisodeDataset& data;
};
using EpisodeObserver = std::function<void(const EpisodeView&)>;

// Framework loop: both policies are recomputed from the shared dataset every
// episode; only explorer trajectories feed the counts (plus exploiter ones
// when use_exploit_data is set). Regret is recorded exactly from oracle
// policy values.
RegretLedger run_framework1(const TabularMdp& mdp, const TieredRunConfig& cfg, Rng& rng,
                            const EpisodeObserver& observer = nullptr);

// Bookkeeping trace of the doubling wrapper, for structural checks.
struct DoublingTrace {
    struct Episode {
        int epoch;              // n = 1, 2, ...
        long long k_in_epoch;   // 1-based within the epoch
        bool replayed;          // exploit policy came from the previous epoch
        long long replay_index; // source index when replayed, else -1
    };
    std::vector<Episode> episodes;
    std::vector<std::vector<DetPolicy>> stored_exploit;  // [epoch-1][k-1]
};

// Epoch-restarted variant: epoch n runs K_n = 2^n episodes on a fresh
// dataset with a fixed explorer confidence delta_n = K_n^-alpha. During the
// first half of an epoch the exploit policy replays the stored policy
// pi^E_{n-1, K_{n-1}/2 + ceil(k/2)}; afterwards it is recomputed with
// delta = k^-alpha. Runs until cfg.k_max total episodes.
RegretLedger run_doubling(const TabularMdp& mdp, const TieredRunConfig& cfg, Rng& rng,
                          DoublingTrace* trace = nullptr);

// Single-stream arrival protocol: each arrival is an exploit user with
// probability C/(1+C). Explore arrivals collect data and refresh both
// policies; exploit arrivals are served by the current exploit policy and
// only log regret.
RegretLedger run_mixed_arrival(const TabularMdp& mdp, const TieredRunConfig& cfg, Rng& rng);

// Hard instance M+ plus the scripted explorer schedule of the adversarial
// scenario. The absorbing chain is entered from the root with probability
// d_min/4; absorbing rewards are delta_min on the planted action only. The
// schedule plays pi_plus (optimal except at the last absorbing state, where
// it plays a_bar) through k_sup and the optimal policy afterwards.
struct HardMdpPlus {
    TabularMdp mdp_plus;
    int absorb_state = 0;       // index of the added state
    std::vector<int> a_star;    // planted optimal action per layer h >= 2
    int a_bar = 0;              // scripted suboptimal action at layer H
    DetPolicy pi_plus;
    DetPolicy pi_star_plus;
    long long k_sup = 0;
    double d_plus_min = 0.0;    // = d_min / 4 of the base instance
    double planted_regret = 0.0;  // d_plus_min * delta_min, pi_plus's per-episode regret
};

struct AdversarialOptions {
    double c1 = 0.0;  // <= 0 means the default H*S*A/delta_min
    double c2 = 0.0;
    std::vector<int> a_star;  // empty means all zeros (layer H overridden to avoid a_bar)
    int a_bar = -1;           // negative means the highest action index
};

HardMdpPlus build_hard_mdp_plus(const TabularMdp& mdp, const GapReport& report,
                                const AdversarialOptions& opts = {});

// Framework loop with the scripted explorer; the exploiter is PVI as usual.
RegretLedger run_adversarial(const HardMdpPlus& hard, const TieredRunConfig& cfg, Rng& rng);

// Largest integer k with k <= (c1 + c2 * log k) / (d * delta). Exposed for
// the scan oracle in tests.
long long solve_k_sup(double c1, double c2, double d_times_delta);

}  // namespace tiered
