#pragma once

#include <span>
#include <vector>

#include "tiered/ledger.hpp"
#include "tiered/mdp.hpp"
#include "tiered/oracle.hpp"
#include "tiered/rl_tiered.hpp"

namespace tiered {

// Clip[x | eps] = x * 1[x >= eps].
double clip(double x, double eps);

// Gap-scaled clipping threshold: delta_min/(2H+2) for a unique optimal
// policy, d_min*delta_min/(2SAH) otherwise.
double clip_threshold(const GapReport& report, int horizon, long long pi_star_count);

// Per-cell pessimism slack E[h][s][a] = r + P_h Vhat_{h+1} - Qhat, evaluated
// with the true transitions. Negative entries flag bonus-event violations.
std::vector<double> surplus(const TabularMdp& mdp, const PviOutput& pvi_out);

// Whether the two-sided bonus event held for this episode: the empirical
// transition applied to Vhat stays within b of the true one at every cell,
// and b stays below the (b1, b2) envelope. Checked against the supplied
// value table (pessimistic Vhat or optimistic Vtilde).
struct BonusEventResult {
    bool held = false;
    int violations = 0;
    double worst_margin = 0.0;  // min over cells of b - |Phat V - P V|
};
BonusEventResult check_bonus_event(const TabularMdp& mdp, const PviOutput& values,
                                   const EpisodeDataset& data, const BonusSpec& spec,
                                   double delta);

// Clipped upper bound on the exploiter's suboptimality,
//   2 E_{pi*}[ sum_h Clip[min{H, 2 b1 sqrt(log(b2/delta)/N)} | eps_clip] ],
// evaluated along a canonical optimal policy, together with the true gap
// V* - V^{pi_PVI} so callers can assert bound >= truth on bonus-event
// episodes.
struct ClippedBoundResult {
    double bound = 0.0;
    double true_gap = 0.0;
    double eps_clip = 0.0;
};
ClippedBoundResult clipped_suboptimality_bound(const TabularMdp& mdp,
                                               const EpisodeDataset& data,
                                               const BonusSpec& spec, double delta,
                                               const GapReport& report);

// Per-episode record of the analysis-side good events. The bonus and
// optimism flags evaluate the two-sided width condition against the
// exploiter's and explorer's value tables; the concentration flag checks
// N_{k,h}(s,a) >= (1/2) sum_k' d^{pi_O_k'}(s,a) - alpha log(SAH k) at every
// cell. All three are computed with oracle access to the true transitions.
struct GoodEventTrace {
    std::vector<std::uint8_t> bonus_event_held;
    std::vector<std::uint8_t> optimism_event_held;
    std::vector<std::uint8_t> concentration_event_held;
};

class GoodEventMonitor {
public:
    GoodEventMonitor(const TabularMdp& mdp, BonusSpec spec, double alpha);

    // Wire into a run as its EpisodeObserver.
    void observe(const EpisodeView& view);
    const GoodEventTrace& trace() const { return trace_; }

private:
    const TabularMdp& mdp_;
    BonusSpec spec_;
    double alpha_;
    std::vector<double> explorer_occupancy_sum_;  // [h][s][a]
    GoodEventTrace trace_;
};

// Cross-seed aggregation of regret curves.
struct RunSummary {
    std::size_t num_ledgers = 0;
    std::size_t episodes = 0;
    std::vector<double> mean_cum_o;
    std::vector<double> mean_cum_e;
    std::vector<double> stderr_cum_o;
    std::vector<double> stderr_cum_e;
    std::vector<double> final_cum_o;  // per seed
    std::vector<double> final_cum_e;
    double mean_final_o = 0.0;
    double mean_final_e = 0.0;
    double stderr_final_o = 0.0;
    double stderr_final_e = 0.0;
    double flatness_o = 0.0;  // mean of per-seed flatness
    double flatness_e = 0.0;
};
RunSummary summarize(std::span<const RegretLedger> ledgers);

}  // namespace tiered
