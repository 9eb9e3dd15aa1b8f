#include "tiered/rl_tiered.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace tiered {

void EpisodeDataset::append(const Trajectory& traj) {
    if (static_cast<int>(traj.steps.size()) != horizon)
        throw std::invalid_argument("EpisodeDataset::append: trajectory length != H");
    for (int h = 0; h < horizon; ++h) {
        const auto& st = traj.steps[h];
        const std::size_t i = sa_index(h, st.state, st.action);
        n_sa[i] += 1;
        n_sas[i * num_states + st.next_state] += 1;
    }
    episodes += 1;
}

void EpisodeDataset::clear() {
    std::fill(n_sa.begin(), n_sa.end(), 0);
    std::fill(n_sas.begin(), n_sas.end(), 0);
    episodes = 0;
}

double bonus(const BonusSpec& spec, int num_states, int num_actions, int horizon,
             long long n, double delta) {
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("bonus: delta must lie in (0, 1/2)");
    if (n == 0) return std::numeric_limits<double>::infinity();
    const double log_term =
        std::log(static_cast<double>(num_states) * num_actions * horizon / delta);
    return spec.effective_scale() * horizon * num_states *
           std::sqrt(log_term / static_cast<double>(n));
}

namespace {

// Shared backward induction. Pessimistic: Q = max{r + P_hat V - b, 0}.
// Optimistic: Q = clamp(r + P_hat V + b, 0, H-h+1), with unvisited cells
// pinned to the clamp ceiling. Greedy policy, lowest-index tie-break.
PviOutput value_iteration(const TabularMdp& mdp, const EpisodeDataset& data,
                          const BonusSpec& spec, double delta, bool optimistic) {
    if (data.num_states != mdp.num_states || data.num_actions != mdp.num_actions ||
        data.horizon != mdp.horizon)
        throw std::invalid_argument("value_iteration: dataset dims do not match mdp");
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    PviOutput out;
    out.num_states = S;
    out.num_actions = A;
    out.horizon = H;
    out.q_hat.assign(static_cast<std::size_t>(H) * S * A, 0.0);
    out.v_hat.assign(static_cast<std::size_t>(H + 1) * S, 0.0);
    out.policy = DetPolicy(H, S, 0);

    for (int h = H - 1; h >= 0; --h) {
        const double ceiling = static_cast<double>(H - h);
        for (int s = 0; s < S; ++s) {
            int best_a = 0;
            double best_q = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < A; ++a) {
                const std::size_t i = data.sa_index(h, s, a);
                const long long n = data.n_sa[i];
                double q;
                if (n == 0) {
                    // Infinite width: pessimism clamps to 0, optimism to the
                    // value ceiling.
                    q = optimistic ? ceiling : 0.0;
                } else {
                    double pv = 0.0;
                    const long long* counts = data.n_sas.data() + i * S;
                    for (int sp = 0; sp < S; ++sp) {
                        if (counts[sp] != 0)
                            pv += static_cast<double>(counts[sp]) *
                                  out.v_hat[static_cast<std::size_t>(h + 1) * S + sp];
                    }
                    pv /= static_cast<double>(n);
                    const double b = bonus(spec, S, A, H, n, delta);
                    q = mdp.reward(h, s, a) + pv + (optimistic ? b : -b);
                    q = std::max(q, 0.0);
                    if (optimistic) q = std::min(q, ceiling);
                }
                out.q_hat[i] = q;
                if (q > best_q) {
                    best_q = q;
                    best_a = a;
                }
            }
            out.v_hat[static_cast<std::size_t>(h) * S + s] = best_q;
            out.policy.at(h, s) = best_a;
        }
    }
    return out;
}

// Exact policy values are needed every episode; policies repeat heavily, so
// memoize by action table.
class PolicyValueCache {
public:
    explicit PolicyValueCache(const TabularMdp& mdp) : mdp_(mdp) {}
    double value(const DetPolicy& policy) {
        auto [it, fresh] = cache_.try_emplace(policy.action, 0.0);
        if (fresh) it->second = policy_value(mdp_, policy);
        return it->second;
    }

private:
    const TabularMdp& mdp_;
    std::map<std::vector<int>, double> cache_;
};

}  // namespace

PviOutput pvi(const TabularMdp& mdp, const EpisodeDataset& data, const BonusSpec& spec,
              double delta) {
    return value_iteration(mdp, data, spec, delta, /*optimistic=*/false);
}

PviOutput optimistic_values(const TabularMdp& mdp, const EpisodeDataset& data,
                            const BonusSpec& spec, double delta) {
    return value_iteration(mdp, data, spec, delta, /*optimistic=*/true);
}

DetPolicy optimistic_explorer_step(const TabularMdp& mdp, const EpisodeDataset& data,
                                   const BonusSpec& spec, double delta) {
    return optimistic_values(mdp, data, spec, delta).policy;
}

void TieredRunConfig::validate() const {
    if (!(alpha > 1.0)) throw std::invalid_argument("TieredRunConfig: alpha must be > 1");
    if (k_max < 1) throw std::invalid_argument("TieredRunConfig: k_max must be >= 1");
    if (!(bonus.scale > 0.0)) throw std::invalid_argument("TieredRunConfig: bonus scale <= 0");
    if (mixed_ratio < 0.0) throw std::invalid_argument("TieredRunConfig: mixed_ratio < 0");
}

namespace {

// deltas below this are clamped so the bonus stays finite in long runs
constexpr double kDeltaFloor = 1e-300;

double delta_at(long long k, double alpha) {
    return std::max(std::pow(static_cast<double>(k), -alpha), kDeltaFloor);
}

}  // namespace

RegretLedger run_framework1(const TabularMdp& mdp, const TieredRunConfig& cfg, Rng& rng,
                            const EpisodeObserver& observer) {
    cfg.validate();
    if (cfg.explorer != ExplorerKind::optimistic_vi)
        throw std::invalid_argument("run_framework1: scripted explorer requires run_adversarial");
    const ValueTables tables = optimal_values(mdp);
    const double vstar = tables.value(0, mdp.initial_state);
    PolicyValueCache values(mdp);
    EpisodeDataset data(mdp.num_states, mdp.num_actions, mdp.horizon);
    RegretLedger ledger;
    for (long long k = 1; k <= cfg.k_max; ++k) {
        const double delta = delta_at(k, cfg.alpha);
        const PviOutput exploit = pvi(mdp, data, cfg.bonus, delta);
        const PviOutput explore = optimistic_values(mdp, data, cfg.bonus, delta);
        if (observer) observer({k, delta, exploit, explore, data});
        ledger.append(vstar - values.value(explore.policy), vstar - values.value(exploit.policy));
        data.append(sample_trajectory(mdp, explore.policy, rng));
        if (cfg.use_exploit_data) data.append(sample_trajectory(mdp, exploit.policy, rng));
    }
    return ledger;
}

RegretLedger run_doubling(const TabularMdp& mdp, const TieredRunConfig& cfg, Rng& rng,
                          DoublingTrace* trace) {
    cfg.validate();
    const ValueTables tables = optimal_values(mdp);
    const double vstar = tables.value(0, mdp.initial_state);
    PolicyValueCache values(mdp);
    RegretLedger ledger;

    const EpisodeDataset empty(mdp.num_states, mdp.num_actions, mdp.horizon);
    // Virtual epoch 0: the single policy computed from no data.
    std::vector<DetPolicy> previous = {pvi(mdp, empty, cfg.bonus, 0.25).policy};
    if (trace) trace->stored_exploit.push_back(previous);

    long long total = 0;
    for (int n = 1; total < cfg.k_max; ++n) {
        const long long epoch_len = 1LL << n;  // K_n = 2^n
        const double delta_n = delta_at(epoch_len, cfg.alpha);
        EpisodeDataset data(mdp.num_states, mdp.num_actions, mdp.horizon);
        std::vector<DetPolicy> stored;
        stored.reserve(epoch_len);
        for (long long k = 1; k <= epoch_len && total < cfg.k_max; ++k) {
            DetPolicy exploit;
            bool replayed = false;
            long long replay_index = -1;
            if (k <= epoch_len / 2) {
                // Replay pi^E_{n-1, K_{n-1}/2 + ceil(k/2)}.
                replay_index = (epoch_len / 2) / 2 + (k + 1) / 2;
                exploit = previous.at(static_cast<std::size_t>(replay_index - 1));
                replayed = true;
            } else {
                exploit = pvi(mdp, data, cfg.bonus, delta_at(k, cfg.alpha)).policy;
            }
            const DetPolicy explore =
                optimistic_explorer_step(mdp, data, cfg.bonus, delta_n);
            ledger.append(vstar - values.value(explore), vstar - values.value(exploit));
            data.append(sample_trajectory(mdp, explore, rng));
            if (cfg.use_exploit_data) data.append(sample_trajectory(mdp, exploit, rng));
            stored.push_back(std::move(exploit));
            if (trace) trace->episodes.push_back({n, k, replayed, replay_index});
            ++total;
        }
        previous = std::move(stored);
        if (trace) trace->stored_exploit.push_back(previous);
    }
    return ledger;
}

RegretLedger run_mixed_arrival(const TabularMdp& mdp, const TieredRunConfig& cfg, Rng& rng) {
    cfg.validate();
    const ValueTables tables = optimal_values(mdp);
    const double vstar = tables.value(0, mdp.initial_state);
    PolicyValueCache values(mdp);
    EpisodeDataset data(mdp.num_states, mdp.num_actions, mdp.horizon);
    RegretLedger ledger;

    const double p_exploit = cfg.mixed_ratio / (1.0 + cfg.mixed_ratio);
    DetPolicy exploit = pvi(mdp, data, cfg.bonus, 0.25).policy;
    DetPolicy explore = optimistic_explorer_step(mdp, data, cfg.bonus, 0.25);
    long long explorer_arrivals = 0;
    for (long long k = 1; k <= cfg.k_max; ++k) {
        if (rng.bernoulli(p_exploit)) {
            // Exploit user: serve the current policy, log regret, no update.
            ledger.append(0.0, vstar - values.value(exploit));
            ledger.exploit_arrival.push_back(1);
        } else {
            ledger.append(vstar - values.value(explore), 0.0);
            ledger.exploit_arrival.push_back(0);
            data.append(sample_trajectory(mdp, explore, rng));
            ++explorer_arrivals;
            // Confidence tracks the dataset size, mirroring the per-episode
            // schedule of the paired framework.
            const double delta = delta_at(explorer_arrivals + 1, cfg.alpha);
            exploit = pvi(mdp, data, cfg.bonus, delta).policy;
            explore = optimistic_explorer_step(mdp, data, cfg.bonus, delta);
        }
    }
    return ledger;
}

long long solve_k_sup(double c1, double c2, double d_times_delta) {
    if (!(d_times_delta > 0.0))
        throw std::invalid_argument("solve_k_sup: d * delta must be positive");
    const double scale = 1.0 / d_times_delta;
    long long last = 0;
    // Past max(c2/dd, current k), k - bound(k) is increasing, so scanning may
    // stop at the first failure beyond that point.
    const double monotone_from = c2 * scale;
    for (long long k = 1;; ++k) {
        const double bound = scale * (c1 + c2 * std::log(static_cast<double>(k)));
        if (static_cast<double>(k) <= bound) {
            last = k;
        } else if (static_cast<double>(k) > monotone_from) {
            break;
        }
        if (k > (1LL << 40))
            throw std::runtime_error("solve_k_sup: k_sup exceeds supported range");
    }
    return last;
}

HardMdpPlus build_hard_mdp_plus(const TabularMdp& mdp, const GapReport& report,
                                const AdversarialOptions& opts) {
    if (mdp.num_actions < 2 || mdp.horizon < 2)
        throw std::invalid_argument("build_hard_mdp_plus: need A >= 2 and H >= 2");
    if (!std::isfinite(report.delta_min) || report.delta_min <= 0.0)
        throw std::invalid_argument("build_hard_mdp_plus: zero gap");
    if (!report.d_min_available || report.d_min <= 0.0)
        throw std::invalid_argument("build_hard_mdp_plus: d_min unavailable");
    if (report.delta_min > 1.0)
        throw std::invalid_argument("build_hard_mdp_plus: delta_min > 1 cannot be a reward");

    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    HardMdpPlus hard;
    hard.absorb_state = S;
    hard.a_bar = opts.a_bar >= 0 ? opts.a_bar : A - 1;
    hard.a_star = opts.a_star.empty() ? std::vector<int>(H, 0) : opts.a_star;
    if (static_cast<int>(hard.a_star.size()) != H)
        throw std::invalid_argument("build_hard_mdp_plus: a_star must have one entry per layer");
    if (hard.a_star[H - 1] == hard.a_bar)
        throw std::invalid_argument("build_hard_mdp_plus: planted action equals a_bar at layer H");

    const double entry = report.d_min / 4.0;
    TabularMdp plus(S + 1, A, H);
    plus.initial_state = mdp.initial_state;
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                auto dst = plus.mutable_row(h, s, a);
                const auto src = mdp.row(h, s, a);
                if (h == 0 && s == mdp.initial_state) {
                    for (int sp = 0; sp < S; ++sp) dst[sp] = (1.0 - entry) * src[sp];
                    dst[S] = entry;
                    plus.reward(h, s, a) = (1.0 - entry) * mdp.reward(h, s, a);
                } else {
                    for (int sp = 0; sp < S; ++sp) dst[sp] = src[sp];
                    dst[S] = 0.0;
                    plus.reward(h, s, a) = mdp.reward(h, s, a);
                }
            }
        }
        for (int a = 0; a < A; ++a) {
            auto dst = plus.mutable_row(h, S, a);
            dst[S] = 1.0;
            plus.reward(h, S, a) =
                h >= 1 && a == hard.a_star[h] ? report.delta_min : 0.0;
        }
    }
    plus.validate();
    hard.mdp_plus = std::move(plus);

    const ValueTables t = optimal_values(hard.mdp_plus);
    hard.pi_star_plus = DetPolicy(H, S + 1, 0);
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s <= S; ++s) {
            int best = 0;
            for (int a = 1; a < A; ++a)
                if (t.qvalue(h, s, a) > t.qvalue(h, s, best)) best = a;
            hard.pi_star_plus.at(h, s) = best;
        }
    }
    hard.pi_plus = hard.pi_star_plus;
    hard.pi_plus.at(H - 1, S) = hard.a_bar;

    hard.d_plus_min = report.d_min / 4.0;
    hard.planted_regret = hard.d_plus_min * report.delta_min;
    const double c1 = opts.c1 > 0.0 ? opts.c1 : H * S * A / report.delta_min;
    const double c2 = opts.c2 > 0.0 ? opts.c2 : H * S * A / report.delta_min;
    hard.k_sup = solve_k_sup(c1, c2, hard.d_plus_min * report.delta_min);
    return hard;
}

RegretLedger run_adversarial(const HardMdpPlus& hard, const TieredRunConfig& cfg, Rng& rng) {
    cfg.validate();
    const TabularMdp& mdp = hard.mdp_plus;
    const ValueTables tables = optimal_values(mdp);
    const double vstar = tables.value(0, mdp.initial_state);
    PolicyValueCache values(mdp);
    EpisodeDataset data(mdp.num_states, mdp.num_actions, mdp.horizon);
    RegretLedger ledger;
    for (long long k = 1; k <= cfg.k_max; ++k) {
        const double delta = delta_at(k, cfg.alpha);
        const DetPolicy& explore = k <= hard.k_sup ? hard.pi_plus : hard.pi_star_plus;
        const DetPolicy exploit = pvi(mdp, data, cfg.bonus, delta).policy;
        ledger.append(vstar - values.value(explore), vstar - values.value(exploit));
        data.append(sample_trajectory(mdp, explore, rng));
        if (cfg.use_exploit_data) data.append(sample_trajectory(mdp, exploit, rng));
    }
    return ledger;
}

}  // namespace tiered
