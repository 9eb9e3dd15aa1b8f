#include "tiered/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tiered {

double clip(double x, double eps) {
    if (eps < 0.0) throw std::invalid_argument("clip: eps must be >= 0");
    return x >= eps ? x : 0.0;
}

double clip_threshold(const GapReport& report, int horizon, long long pi_star_count) {
    if (!std::isfinite(report.delta_min) || report.delta_min <= 0.0)
        throw std::invalid_argument("clip_threshold: delta_min must be positive");
    if (pi_star_count == 1)
        return report.delta_min / (2.0 * horizon + 2.0);
    if (!report.d_min_available)
        throw std::invalid_argument("clip_threshold: d_min unavailable for |Pi*| > 1");
    return report.d_min * report.delta_min /
           (2.0 * report.num_states * report.num_actions * horizon);
}

std::vector<double> surplus(const TabularMdp& mdp, const PviOutput& pvi_out) {
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    std::vector<double> e(static_cast<std::size_t>(H) * S * A, 0.0);
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const auto row = mdp.row(h, s, a);
                double pv = 0.0;
                for (int sp = 0; sp < S; ++sp) pv += row[sp] * pvi_out.v(h + 1, sp);
                e[(static_cast<std::size_t>(h) * S + s) * A + a] =
                    mdp.reward(h, s, a) + pv - pvi_out.q(h, s, a);
            }
        }
    }
    return e;
}

BonusEventResult check_bonus_event(const TabularMdp& mdp, const PviOutput& values,
                                   const EpisodeDataset& data, const BonusSpec& spec,
                                   double delta) {
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    const double b1 = spec.b1(S, H);
    const double b2 = spec.b2(S, A, H);
    BonusEventResult res;
    res.worst_margin = std::numeric_limits<double>::infinity();
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const long long n = data.count(h, s, a);
                if (n == 0) continue;  // infinite width never violates
                const double b = bonus(spec, S, A, H, n, delta);
                double emp = 0.0, truth = 0.0;
                const auto row = mdp.row(h, s, a);
                for (int sp = 0; sp < S; ++sp) {
                    const double v = values.v(h + 1, sp);
                    truth += row[sp] * v;
                    const long long c = data.count(h, s, a, sp);
                    if (c != 0) emp += static_cast<double>(c) * v;
                }
                emp /= static_cast<double>(n);
                const double margin = b - std::abs(emp - truth);
                res.worst_margin = std::min(res.worst_margin, margin);
                const double envelope = b1 * std::sqrt(std::log(b2 / delta) / static_cast<double>(n));
                if (margin <= 0.0 || b > envelope + 1e-12) ++res.violations;
            }
        }
    }
    res.held = res.violations == 0;
    return res;
}

ClippedBoundResult clipped_suboptimality_bound(const TabularMdp& mdp,
                                               const EpisodeDataset& data,
                                               const BonusSpec& spec, double delta,
                                               const GapReport& report) {
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    ClippedBoundResult res;
    res.eps_clip = clip_threshold(report, H, report.num_optimal_policies);

    // Canonical optimal policy: lowest-index optimal action everywhere.
    DetPolicy pistar(H, S, 0);
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s) pistar.at(h, s) = report.optimal_actions(h, s).front();
    const Occupancy occ = occupancy(mdp, pistar);

    const double b1 = spec.b1(S, H);
    const double b2 = spec.b2(S, A, H);
    const double log_term = std::log(b2 / delta);
    double total = 0.0;
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const double mass = occ.at(h, s, a);
                if (mass == 0.0) continue;
                const long long n = data.count(h, s, a);
                const double width =
                    n == 0 ? std::numeric_limits<double>::infinity()
                           : 2.0 * b1 * std::sqrt(log_term / static_cast<double>(n));
                total += mass * clip(std::min(static_cast<double>(H), width), res.eps_clip);
            }
        }
    }
    res.bound = 2.0 * total;

    const PviOutput out = pvi(mdp, data, spec, delta);
    const ValueTables t = optimal_values(mdp);
    res.true_gap = t.value(0, mdp.initial_state) - policy_value(mdp, out.policy);
    return res;
}

GoodEventMonitor::GoodEventMonitor(const TabularMdp& mdp, BonusSpec spec, double alpha)
    : mdp_(mdp), spec_(spec), alpha_(alpha),
      explorer_occupancy_sum_(
          static_cast<std::size_t>(mdp.horizon) * mdp.num_states * mdp.num_actions, 0.0) {}

void GoodEventMonitor::observe(const EpisodeView& view) {
    trace_.bonus_event_held.push_back(
        check_bonus_event(mdp_, view.exploit, view.data, spec_, view.delta_k).held);
    trace_.optimism_event_held.push_back(
        check_bonus_event(mdp_, view.explore, view.data, spec_, view.delta_k).held);

    bool concentrated = true;
    const double slack = alpha_ * std::log(static_cast<double>(mdp_.num_states) *
                                           mdp_.num_actions * mdp_.horizon *
                                           static_cast<double>(view.k));
    for (std::size_t i = 0; i < explorer_occupancy_sum_.size() && concentrated; ++i)
        concentrated = static_cast<double>(view.data.n_sa[i]) >=
                       0.5 * explorer_occupancy_sum_[i] - slack;
    trace_.concentration_event_held.push_back(concentrated);

    const Occupancy occ = occupancy(mdp_, view.explore.policy);
    for (std::size_t i = 0; i < explorer_occupancy_sum_.size(); ++i)
        explorer_occupancy_sum_[i] += occ.d[i];
}

double flatness(const std::vector<double>& cum) {
    if (cum.empty()) return 0.0;
    const std::size_t k = cum.size();
    const std::size_t q = 3 * k / 4;
    const double at_q = q == 0 ? 0.0 : cum[q - 1];
    return (cum.back() - at_q) / std::max(cum.back(), 1e-12);
}

RunSummary summarize(std::span<const RegretLedger> ledgers) {
    if (ledgers.empty()) throw std::invalid_argument("summarize: no ledgers");
    const std::size_t k = ledgers.front().episodes();
    for (const auto& l : ledgers)
        if (l.episodes() != k)
            throw std::invalid_argument("summarize: ledgers have mismatched lengths");

    RunSummary s;
    s.num_ledgers = ledgers.size();
    s.episodes = k;
    s.mean_cum_o.assign(k, 0.0);
    s.mean_cum_e.assign(k, 0.0);
    s.stderr_cum_o.assign(k, 0.0);
    s.stderr_cum_e.assign(k, 0.0);
    const double n = static_cast<double>(ledgers.size());
    for (const auto& l : ledgers) {
        for (std::size_t i = 0; i < k; ++i) {
            s.mean_cum_o[i] += l.cum_o[i] / n;
            s.mean_cum_e[i] += l.cum_e[i] / n;
        }
        s.final_cum_o.push_back(l.cum_o.back());
        s.final_cum_e.push_back(l.cum_e.back());
        s.flatness_o += flatness(l.cum_o) / n;
        s.flatness_e += flatness(l.cum_e) / n;
    }
    if (ledgers.size() > 1) {
        for (const auto& l : ledgers) {
            for (std::size_t i = 0; i < k; ++i) {
                const double do_ = l.cum_o[i] - s.mean_cum_o[i];
                const double de = l.cum_e[i] - s.mean_cum_e[i];
                s.stderr_cum_o[i] += do_ * do_;
                s.stderr_cum_e[i] += de * de;
            }
        }
        for (std::size_t i = 0; i < k; ++i) {
            s.stderr_cum_o[i] = std::sqrt(s.stderr_cum_o[i] / (n - 1.0) / n);
            s.stderr_cum_e[i] = std::sqrt(s.stderr_cum_e[i] / (n - 1.0) / n);
        }
    }
    for (double v : s.final_cum_o) s.mean_final_o += v / n;
    for (double v : s.final_cum_e) s.mean_final_e += v / n;
    if (ledgers.size() > 1) {
        double vo = 0.0, ve = 0.0;
        for (std::size_t i = 0; i < ledgers.size(); ++i) {
            vo += (s.final_cum_o[i] - s.mean_final_o) * (s.final_cum_o[i] - s.mean_final_o);
            ve += (s.final_cum_e[i] - s.mean_final_e) * (s.final_cum_e[i] - s.mean_final_e);
        }
        s.stderr_final_o = std::sqrt(vo / (n - 1.0) / n);
        s.stderr_final_e = std::sqrt(ve / (n - 1.0) / n);
    }
    return s;
}

}  // namespace tiered
