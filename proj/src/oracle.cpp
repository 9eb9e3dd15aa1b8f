#include "tiered/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace tiered {

namespace {

constexpr double kGapZeroTolerance = 1e-9;

std::size_t cell(const TabularMdp& m, int h, int s, int a) {
    return (static_cast<std::size_t>(h) * m.num_states + s) * m.num_actions + a;
}

}  // namespace

ValueTables optimal_values(const TabularMdp& mdp) {
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    ValueTables t;
    t.num_states = S;
    t.num_actions = A;
    t.horizon = H;
    t.v.assign(static_cast<std::size_t>(H + 1) * S, 0.0);
    t.q.assign(static_cast<std::size_t>(H) * S * A, 0.0);
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < A; ++a) {
                const auto row = mdp.row(h, s, a);
                double q = mdp.reward(h, s, a);
                for (int sp = 0; sp < S; ++sp)
                    q += row[sp] * t.v[static_cast<std::size_t>(h + 1) * S + sp];
                t.q[cell(mdp, h, s, a)] = q;
                best = std::max(best, q);
            }
            t.v[static_cast<std::size_t>(h) * S + s] = best;
        }
    }
    return t;
}

double policy_value(const TabularMdp& mdp, const DetPolicy& policy) {
    if (policy.num_states != mdp.num_states || policy.horizon != mdp.horizon)
        throw std::invalid_argument("policy_value: dims mismatch");
    const int S = mdp.num_states;
    std::vector<double> dist(S, 0.0), next(S);
    dist[mdp.initial_state] = 1.0;
    double value = 0.0;
    for (int h = 0; h < mdp.horizon; ++h) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < S; ++s) {
            const double mass = dist[s];
            if (mass == 0.0) continue;
            const int a = policy.at(h, s);
            value += mass * mdp.reward(h, s, a);
            const auto row = mdp.row(h, s, a);
            for (int sp = 0; sp < S; ++sp) next[sp] += mass * row[sp];
        }
        dist.swap(next);
    }
    return value;
}

double policy_value(const TabularMdp& mdp, const MixedPolicy& policy) {
    policy.validate();
    double value = 0.0;
    for (std::size_t i = 0; i < policy.components.size(); ++i)
        value += policy.weights[i] * policy_value(mdp, policy.components[i]);
    return value;
}

Occupancy occupancy(const TabularMdp& mdp, const DetPolicy& policy) {
    if (policy.num_states != mdp.num_states || policy.horizon != mdp.horizon)
        throw std::invalid_argument("occupancy: dims mismatch");
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    Occupancy occ;
    occ.num_states = S;
    occ.num_actions = A;
    occ.horizon = H;
    occ.d.assign(static_cast<std::size_t>(H) * S * A, 0.0);
    std::vector<double> dist(S, 0.0), next(S);
    dist[mdp.initial_state] = 1.0;
    for (int h = 0; h < H; ++h) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < S; ++s) {
            const double mass = dist[s];
            if (mass == 0.0) continue;
            const int a = policy.at(h, s);
            occ.at(h, s, a) += mass;
            const auto row = mdp.row(h, s, a);
            for (int sp = 0; sp < S; ++sp) next[sp] += mass * row[sp];
        }
        dist.swap(next);
    }
    return occ;
}

Occupancy occupancy(const TabularMdp& mdp, const MixedPolicy& policy) {
    policy.validate();
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    Occupancy occ;
    occ.num_states = S;
    occ.num_actions = A;
    occ.horizon = H;
    occ.d.assign(static_cast<std::size_t>(H) * S * A, 0.0);
    for (std::size_t i = 0; i < policy.components.size(); ++i) {
        const Occupancy part = occupancy(mdp, policy.components[i]);
        for (std::size_t j = 0; j < occ.d.size(); ++j)
            occ.d[j] += policy.weights[i] * part.d[j];
    }
    return occ;
}

GapReport gap_report_gaps_only(const TabularMdp& mdp) {
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    const ValueTables t = optimal_values(mdp);
    GapReport rep;
    rep.num_states = S;
    rep.num_actions = A;
    rep.horizon = H;
    rep.gaps.assign(static_cast<std::size_t>(H) * S * A, 0.0);
    rep.opt_actions.assign(static_cast<std::size_t>(H) * S, {});
    rep.delta_min = std::numeric_limits<double>::infinity();
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            auto& opts = rep.opt_actions[static_cast<std::size_t>(h) * S + s];
            for (int a = 0; a < A; ++a) {
                const double raw = t.value(h, s) - t.qvalue(h, s, a);
                if (raw < kGapZeroTolerance) {
                    rep.gaps[cell(mdp, h, s, a)] = 0.0;
                    opts.push_back(a);
                } else {
                    rep.gaps[cell(mdp, h, s, a)] = raw;
                    rep.delta_min = std::min(rep.delta_min, raw);
                }
            }
        }
    }
    return rep;
}

namespace {

// Enumerates optimal policies layer by layer over the currently reachable
// state set; unreachable states take the lowest-index optimal action. The
// result is deduplicated by exact occupancy.
struct Enumerator {
    const TabularMdp& mdp;
    const GapReport& rep;
    std::size_t cap;
    std::vector<DetPolicy> out;
    DetPolicy scratch;

    Enumerator(const TabularMdp& m, const GapReport& r, std::size_t c)
        : mdp(m), rep(r), cap(c), scratch(m.horizon, m.num_states, 0) {
        for (int h = 0; h < m.horizon; ++h)
            for (int s = 0; s < m.num_states; ++s)
                scratch.at(h, s) = r.optimal_actions(h, s).front();
    }

    void recurse(int h, const std::vector<char>& reachable) {
        if (h == mdp.horizon) {
            if (out.size() >= cap) throw EnumerationCapExceeded(cap);
            out.push_back(scratch);
            return;
        }
        std::vector<int> states;
        for (int s = 0; s < mdp.num_states; ++s)
            if (reachable[s]) states.push_back(s);
        assign(h, 0, states, reachable);
    }

    void assign(int h, std::size_t i, const std::vector<int>& states,
                const std::vector<char>& reachable) {
        if (i == states.size()) {
            std::vector<char> next(mdp.num_states, 0);
            for (int s : states) {
                const auto row = mdp.row(h, s, scratch.at(h, s));
                for (int sp = 0; sp < mdp.num_states; ++sp)
                    if (row[sp] > 0.0) next[sp] = 1;
            }
            recurse(h + 1, next);
            return;
        }
        const int s = states[i];
        for (int a : rep.optimal_actions(h, s)) {
            scratch.at(h, s) = a;
            assign(h, i + 1, states, reachable);
        }
        scratch.at(h, s) = rep.optimal_actions(h, s).front();
    }
};

std::vector<DetPolicy> dedupe_by_occupancy(const TabularMdp& mdp,
                                           std::vector<DetPolicy> policies) {
    std::map<std::vector<double>, std::size_t> seen;
    std::vector<DetPolicy> unique;
    for (auto& p : policies) {
        Occupancy occ = occupancy(mdp, p);
        if (seen.emplace(std::move(occ.d), unique.size()).second)
            unique.push_back(std::move(p));
    }
    return unique;
}

}  // namespace

std::vector<DetPolicy> enumerate_optimal_policies(const TabularMdp& mdp, std::size_t cap) {
    const GapReport rep = gap_report_gaps_only(mdp);
    Enumerator en(mdp, rep, cap);
    std::vector<char> reachable(mdp.num_states, 0);
    reachable[mdp.initial_state] = 1;
    en.recurse(0, reachable);
    return dedupe_by_occupancy(mdp, std::move(en.out));
}

GapReport gap_report(const TabularMdp& mdp, std::size_t cap) {
    GapReport rep = gap_report_gaps_only(mdp);
    const std::vector<DetPolicy> pis = enumerate_optimal_policies(mdp, cap);
    rep.num_optimal_policies = static_cast<long long>(pis.size());
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& p : pis) {
        const Occupancy occ = occupancy(mdp, p);
        for (double d : occ.d)
            if (d > 0.0) dmin = std::min(dmin, d);
    }
    rep.d_min = dmin;
    rep.d_min_available = true;
    return rep;
}

DetPolicy convert_to_optimal(const TabularMdp& mdp, const DetPolicy& policy,
                             const GapReport& report) {
    DetPolicy out = policy;
    for (int h = 0; h < mdp.horizon; ++h) {
        for (int s = 0; s < mdp.num_states; ++s) {
            const auto& opts = report.optimal_actions(h, s);
            if (!std::binary_search(opts.begin(), opts.end(), policy.at(h, s)))
                out.at(h, s) = opts.front();
        }
    }
    return out;
}

OccupancyBoundReport check_occupancy_bound(const TabularMdp& mdp,
                                           const std::vector<DetPolicy>& policies) {
    if (policies.empty())
        throw std::invalid_argument("check_occupancy_bound: empty policy list");
    const GapReport rep = gap_report_gaps_only(mdp);
    if (!std::isfinite(rep.delta_min) || rep.delta_min <= 0.0)
        throw std::invalid_argument("check_occupancy_bound: delta_min is zero");
    const ValueTables t = optimal_values(mdp);
    const double vstar = t.value(0, mdp.initial_state);

    OccupancyBoundReport out;
    out.num_states = mdp.num_states;
    out.num_actions = mdp.num_actions;
    out.horizon = mdp.horizon;
    const std::size_t cells = static_cast<std::size_t>(mdp.horizon) * mdp.num_states *
                              mdp.num_actions;
    out.lhs.assign(cells, 0.0);
    out.rhs.assign(cells, 0.0);

    double regret_sum = 0.0;
    for (const auto& pi : policies) {
        const Occupancy d = occupancy(mdp, pi);
        const Occupancy dstar = occupancy(mdp, convert_to_optimal(mdp, pi, rep));
        for (std::size_t i = 0; i < cells; ++i) {
            out.lhs[i] += d.d[i];
            out.rhs[i] += dstar.d[i];
        }
        regret_sum += vstar - policy_value(mdp, pi);
    }
    const double penalty = regret_sum / rep.delta_min;
    out.worst_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cells; ++i) {
        out.rhs[i] -= penalty;
        out.worst_slack = std::min(out.worst_slack, out.lhs[i] - out.rhs[i]);
    }
    out.holds = out.worst_slack >= -1e-8;
    return out;
}

WellCoveredResult well_covered_policy(const TabularMdp& mdp,
                                      const std::vector<DetPolicy>& opt_sequence,
                                      std::size_t cap) {
    if (opt_sequence.empty())
        throw std::invalid_argument("well_covered_policy: empty sequence");
    const ValueTables t = optimal_values(mdp);
    const double vstar = t.value(0, mdp.initial_state);
    for (const auto& pi : opt_sequence) {
        if (std::abs(policy_value(mdp, pi) - vstar) > 1e-9)
            throw std::invalid_argument("well_covered_policy: sequence contains a non-optimal policy");
    }

    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    const std::size_t cells = static_cast<std::size_t>(H) * S * A;
    const std::size_t K = opt_sequence.size();

    std::vector<Occupancy> seq_occ;
    seq_occ.reserve(K);
    for (const auto& pi : opt_sequence) seq_occ.push_back(occupancy(mdp, pi));

    // Accumulated occupancy and per-cell hit counts over the sequence.
    std::vector<double> acc(cells, 0.0);
    std::vector<std::size_t> hits(cells, 0);
    for (const auto& occ : seq_occ) {
        for (std::size_t i = 0; i < cells; ++i) {
            acc[i] += occ.d[i];
            if (occ.d[i] > 0.0) ++hits[i];
        }
    }

    // Reachability structure over the full optimal-policy set.
    const std::vector<DetPolicy> all_opt = enumerate_optimal_policies(mdp, cap);
    std::vector<Occupancy> all_occ;
    all_occ.reserve(all_opt.size());
    for (const auto& pi : all_opt) all_occ.push_back(occupancy(mdp, pi));

    std::vector<char> in_zstar(cells, 0);    // reachable by some optimal policy
    std::vector<char> in_zdiv(cells, 0);     // reachable by some, missed by another
    std::vector<double> dh_min(cells, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < cells; ++i) {
        bool any_pos = false, any_zero = false;
        for (const auto& occ : all_occ) {
            if (occ.d[i] > 0.0) {
                any_pos = true;
                dh_min[i] = std::min(dh_min[i], occ.d[i]);
            } else {
                any_zero = true;
            }
        }
        in_zstar[i] = any_pos;
        in_zdiv[i] = any_pos && any_zero;
    }

    std::vector<std::size_t> zdiv_count(H, 0);
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a)
                zdiv_count[h] += in_zdiv[cell(mdp, h, s, a)];

    // Drop sequence indices that hit an insufficiently covered cell at any
    // layer; the surviving indices form the cover mixture.
    std::vector<char> insufficient(cells, 0);
    for (int h = 0; h < H; ++h) {
        const double threshold =
            static_cast<double>(K) / (2.0 * (static_cast<double>(zdiv_count[h]) + 1.0) * H);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const std::size_t i = cell(mdp, h, s, a);
                insufficient[i] = in_zstar[i] && static_cast<double>(hits[i]) < threshold;
            }
    }
    std::vector<std::size_t> suff;
    for (std::size_t k = 0; k < K; ++k) {
        bool bad = false;
        for (std::size_t i = 0; i < cells && !bad; ++i)
            bad = insufficient[i] && seq_occ[k].d[i] > 0.0;
        if (!bad) suff.push_back(k);
    }
    if (suff.empty())
        throw std::logic_error("well_covered_policy: no sufficient indices (unexpected)");

    WellCoveredResult res;
    // Merge duplicate policies so the mixture stays small.
    std::map<std::vector<int>, std::size_t> comp_index;
    for (std::size_t k : suff) {
        auto [it, fresh] = comp_index.emplace(opt_sequence[k].action, res.cover.components.size());
        if (fresh) {
            res.cover.components.push_back(opt_sequence[k]);
            res.cover.weights.push_back(0.0);
        }
        res.cover.weights[it->second] += 1.0 / static_cast<double>(suff.size());
    }
    res.cover_occupancy = occupancy(mdp, res.cover);

    res.tilde_d.assign(cells, 0.0);
    res.worst_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cells; ++i) {
        if (!in_zstar[i]) continue;
        const int h = static_cast<int>(i / (static_cast<std::size_t>(S) * A));
        const double floor_term =
            dh_min[i] / ((static_cast<double>(zdiv_count[h]) + 1.0) * H);
        res.tilde_d[i] = std::max(floor_term, res.cover_occupancy.d[i]);
        if (res.cover_occupancy.d[i] > 0.0) {
            const double slack = acc[i] - 0.5 * static_cast<double>(K) * res.tilde_d[i];
            res.worst_slack = std::min(res.worst_slack, slack);
        }
    }
    res.holds = res.worst_slack >= -1e-9;
    return res;
}

}  // namespace tiered
