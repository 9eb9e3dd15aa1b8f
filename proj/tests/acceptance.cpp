// Acceptance suite: one self-contained check per criterion, each printing a
// single PASS/FAIL line with its measured numbers. The process exits with
// the number of failed criteria.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <vector>

#include "tiered/bandit_tiered.hpp"
#include "tiered/diagnostics.hpp"
#include "tiered/experiment.hpp"
#include "tiered/oracle.hpp"
#include "tiered/rl_tiered.hpp"

using namespace tiered;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------------------
// B1 + B2: bandit constant regret, forced exploration, index ordering.
// Shared runs: A=5, means (0.5,0.5,0.4,0.4,0.3), alpha=1.5, K=1e5, 20 seeds.

struct BanditCriteria {
    Outcome b1;
    Outcome b2;
};

BanditCriteria run_bandit_criteria() {
    const double t0 = now_seconds();
    BanditInstance inst;
    inst.means = {0.5, 0.5, 0.4, 0.4, 0.3};
    const long long K = 100000;
    const int num_seeds = 20;

    std::vector<RegretLedger> ledgers(num_seeds);
    std::atomic<long long> order_violations{0};
    std::atomic<long long> forced_violations{0};
    parallel_for(num_seeds, resolve_jobs(0), [&](std::size_t i) {
        BanditRunOptions opts;
        opts.k_max = K;
        opts.alpha = 1.5;
        std::vector<long long> first_pull(inst.num_arms(), -1);
        opts.observer = [&](const BanditState& st, ArmPair pair) {
            if (first_pull[pair.explore_arm] < 0) first_pull[pair.explore_arm] = st.k;
            for (int arm = 0; arm < st.num_arms; ++arm) {
                if (st.counts[arm] == 0) continue;  // LCB -inf <= UCB +inf
                const double rad = confidence_radius(st, arm);
                if (st.mean(arm) - rad > st.mean(arm) + rad) ++order_violations;
            }
        };
        Rng rng(static_cast<std::uint64_t>(i));
        ledgers[i] = run_bandit_tiered(inst, opts, rng);
        for (int arm = 0; arm < inst.num_arms(); ++arm)
            if (first_pull[arm] < 1 || first_pull[arm] > inst.num_arms()) ++forced_violations;
    });

    const RunSummary summary = summarize(ledgers);
    const double elapsed = now_seconds() - t0;
    BanditCriteria out;
    const bool b1_pass =
        summary.flatness_e < 0.02 && summary.flatness_o > 0.15 && elapsed < 30.0;
    bool explorer_grows = true;
    for (const auto& led : ledgers)
        explorer_grows &= led.cum_o.back() > led.cum_o[3 * led.episodes() / 4 - 1];
    out.b1 = {b1_pass,
              fmt("exploiter flatness %.4f (< 0.02), explorer flatness %.4f (> 0.15), "
                  "%.1fs (< 30s); explorer still growing in every run: %s; a pure "
                  "c*log(k) curve has flatness %.3f at this K",
                  summary.flatness_e, summary.flatness_o, elapsed,
                  explorer_grows ? "yes" : "no", std::log(4.0 / 3.0) / std::log(1e5))};
    const bool b2_pass = forced_violations == 0 && order_violations == 0;
    out.b2 = {b2_pass, fmt("forced-exploration violations %lld, index-order violations %lld "
                           "over %d runs of K=%lld",
                           forced_violations.load(), order_violations.load(), num_seeds, K)};
    return out;
}

// ---------------------------------------------------------------------------
// M1: Appendix-style reproduction at S=A=H=5 with gap-filtered instances.

Outcome run_m1() {
    const double t0 = now_seconds();
    const std::vector<double> targets = {0.0015, 0.003, 0.009};
    const GapSearchResult found = filter_seeds_by_gap(5, 5, 5, targets, 0.5, 10000);
    if (!found.all_found) return {false, "gap-filtered seeds not found within budget"};

    struct InstanceResult {
        double delta_min;
        double flatness_e;
        double mean_final_e;
        bool explorer_grows;
    };
    std::vector<InstanceResult> results(targets.size());

    struct Job {
        std::size_t instance;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    const int runs_per_instance = 10;
    for (std::size_t t = 0; t < targets.size(); ++t)
        for (int s = 0; s < runs_per_instance; ++s)
            jobs.push_back({t, static_cast<std::uint64_t>(s)});

    std::vector<TabularMdp> instances;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        Rng gen(*found.seeds[t]);
        instances.push_back(generate_random_mdp(5, 5, 5, gen));
    }

    std::vector<std::vector<RegretLedger>> ledgers(targets.size(),
                                                   std::vector<RegretLedger>(runs_per_instance));
    parallel_for(jobs.size(), resolve_jobs(0), [&](std::size_t j) {
        TieredRunConfig cfg;
        cfg.k_max = 20000;
        cfg.alpha = 1.5;
        cfg.bonus = {BonusKind::scaled_hoeffding, 0.25};
        cfg.use_exploit_data = true;
        Rng rng(jobs[j].seed);
        ledgers[jobs[j].instance][jobs[j].seed] = run_framework1(instances[jobs[j].instance], cfg, rng);
    });

    bool flatness_ok = true, growth_ok = true;
    std::string detail;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const RunSummary s = summarize(ledgers[t]);
        results[t] = {found.achieved[t], s.flatness_e, s.mean_final_e, true};
        for (const auto& led : ledgers[t]) {
            const std::size_t q = 3 * led.episodes() / 4;
            results[t].explorer_grows &= led.cum_o.back() > led.cum_o[q - 1];
        }
        flatness_ok &= results[t].flatness_e < 0.05;
        growth_ok &= results[t].explorer_grows;
        detail += fmt("[dmin %.4g: flatE %.4f, finalE %.1f] ", results[t].delta_min,
                      results[t].flatness_e, results[t].mean_final_e);
    }

    // mean final exploiter regret should decrease as delta_min grows; one
    // inversion is allowed (soft ordering on means)
    std::vector<InstanceResult> by_gap = results;
    std::sort(by_gap.begin(), by_gap.end(),
              [](const InstanceResult& a, const InstanceResult& b) {
                  return a.delta_min < b.delta_min;
              });
    int inversions = 0;
    for (std::size_t t = 0; t + 1 < by_gap.size(); ++t)
        inversions += by_gap[t].mean_final_e < by_gap[t + 1].mean_final_e;

    const double elapsed = now_seconds() - t0;
    const bool pass = flatness_ok && growth_ok && inversions <= 1 && elapsed < 600.0;
    detail += fmt("inversions %d (<= 1), %.0fs (< 600s)", inversions, elapsed);

    if (!flatness_ok) {
        // Reference point for the analysis: the same pipeline with the bonus
        // shrunk by 1/S (the Bernstein-style magnitude the original
        // experiments used) flattens within the same horizon.
        std::vector<RegretLedger> ref(runs_per_instance);
        parallel_for(runs_per_instance, resolve_jobs(0), [&](std::size_t s) {
            TieredRunConfig cfg;
            cfg.k_max = 20000;
            cfg.alpha = 1.5;
            cfg.bonus = {BonusKind::scaled_hoeffding, 0.05};
            Rng rng(static_cast<std::uint64_t>(s));
            ref[s] = run_framework1(instances[0], cfg, rng);
        });
        detail += fmt("; note: bonus scale 0.05 on the first instance gives flatness %.4f",
                      summarize(ref).flatness_e);
    }
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// T1: optimal_values vs brute-force policy enumeration.

Outcome run_t1() {
    struct Dims {
        int s, a, h;
    };
    const std::vector<Dims> shapes = {{2, 2, 3}, {1, 4, 3}, {3, 2, 2}, {2, 3, 2}, {1, 8, 4}};
    int checked = 0;
    double worst = 0.0;
    Rng gen(2026);
    for (int trial = 0; trial < 50; ++trial) {
        const Dims d = shapes[trial % shapes.size()];
        const TabularMdp mdp = generate_random_mdp(d.s, d.a, d.h, gen);
        const int cells = d.s * d.h;
        double best = -1.0;
        DetPolicy pol(d.h, d.s, 0);
        std::vector<int> idx(cells, 0);
        for (;;) {
            for (int i = 0; i < cells; ++i) pol.action[i] = idx[i];
            best = std::max(best, policy_value(mdp, pol));
            int i = 0;
            while (i < cells && ++idx[i] == d.a) idx[i++] = 0;
            if (i == cells) break;
        }
        const double vstar = optimal_values(mdp).value(0, 0);
        worst = std::max(worst, std::abs(vstar - best));
        ++checked;
    }
    return {worst <= 1e-10, fmt("%d instances, worst |V* - brute| = %.3g (<= 1e-10)",
                                checked, worst)};
}

// ---------------------------------------------------------------------------
// T2: occupancy inequality on random policy sequences.

Outcome run_t2() {
    Rng gen(5150);
    int sequences = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (int inst = 0; inst < 10; ++inst) {
        const TabularMdp mdp = generate_random_mdp(3, 3, 3, gen);
        for (int rep = 0; rep < 10; ++rep) {
            std::vector<DetPolicy> seq;
            for (int k = 0; k < 100; ++k) {
                DetPolicy p(3, 3, 0);
                for (auto& a : p.action) a = static_cast<int>(gen.uniform_int(0, 2));
                seq.push_back(std::move(p));
            }
            const OccupancyBoundReport rep_out = check_occupancy_bound(mdp, seq);
            worst = std::min(worst, rep_out.worst_slack);
            if (!rep_out.holds) return {false, fmt("violated, slack %.3g", rep_out.worst_slack)};
            ++sequences;
        }
    }
    return {true, fmt("%d sequences on 10 instances, worst slack %.3g (>= -1e-8)",
                      sequences, worst)};
}

// ---------------------------------------------------------------------------
// T3: well-covered policy on instances engineered with |Pi*| in {2,3,4}.

TabularMdp engineered_branches(int n_opt, bool stochastic, int horizon = 3) {
    const int S = n_opt + 1;
    const int A = n_opt + 1;
    TabularMdp mdp(S, A, horizon);
    for (int a = 0; a < A; ++a) {
        auto row = mdp.mutable_row(0, 0, a);
        if (a < n_opt) {
            if (stochastic) {
                // split between the own branch and branch 1 (same values)
                row[a + 1] = 0.75;
                row[1] = (a + 1 == 1 ? 0.75 : 0.0) + 0.25;
            } else {
                row[a + 1] = 1.0;
            }
            mdp.reward(0, 0, a) = 0.5;
        } else {
            row[1] = 1.0;
            mdp.reward(0, 0, a) = 0.2;  // gap 0.3
        }
        for (int s = 1; s < S; ++s) {
            mdp.mutable_row(0, s, a)[s] = 1.0;
            mdp.reward(0, s, a) = 0.0;
        }
    }
    for (int h = 1; h < horizon; ++h)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                mdp.mutable_row(h, s, a)[s] = 1.0;
                mdp.reward(h, s, a) = a == 0 ? 0.5 : 0.2;
            }
    mdp.validate();
    return mdp;
}

Outcome run_t3() {
    Rng gen(31337);
    int sequences = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (int n_opt : {2, 3, 4}) {
        for (bool stochastic : {false, true}) {
            const TabularMdp mdp = engineered_branches(n_opt, stochastic);
            const auto pis = enumerate_optimal_policies(mdp);
            if (static_cast<int>(pis.size()) != n_opt)
                return {false, fmt("engineered |Pi*| mismatch: got %zu, want %d (stochastic=%d)",
                                   pis.size(), n_opt, stochastic)};
            // skewed, alternating, and random sequences over the optimal set
            for (int variant = 0; variant < 9; ++variant) {
                std::vector<DetPolicy> seq;
                const int K = 24;
                for (int k = 0; k < K; ++k) {
                    std::size_t pick = 0;
                    if (variant % 3 == 0) pick = k == 0 ? 1 : 0;  // adversarial skew
                    else if (variant % 3 == 1) pick = k % pis.size();  // alternating
                    else pick = static_cast<std::size_t>(gen.uniform_int(0, n_opt - 1));
                    seq.push_back(pis[pick]);
                }
                const WellCoveredResult res = well_covered_policy(mdp, seq);
                worst = std::min(worst, res.worst_slack);
                if (!res.holds)
                    return {false, fmt("violated on |Pi*|=%d (stochastic=%d), slack %.3g",
                                       n_opt, stochastic, res.worst_slack)};
                ++sequences;
            }
        }
    }
    // 54 constructed sequences >= the 50 the criterion asks for
    return {sequences >= 50,
            fmt("%d sequences across |Pi*| in {2,3,4}, worst slack %.3g", sequences, worst)};
}

// ---------------------------------------------------------------------------
// P1: pessimism/optimism envelopes under the unscaled naive bonus.

Outcome run_p1() {
    Rng gen(404);
    const TabularMdp mdp = generate_random_mdp(3, 3, 3, gen);
    const ValueTables t = optimal_values(mdp);
    const long long K = 5000;
    const int num_seeds = 50;
    std::atomic<long long> pessimism_violations{0};
    std::atomic<long long> optimism_violations{0};
    parallel_for(num_seeds, resolve_jobs(0), [&](std::size_t i) {
        TieredRunConfig cfg;
        cfg.k_max = K;
        cfg.alpha = 1.5;
        cfg.bonus = {BonusKind::naive_hoeffding, 1.0};
        long long pess = 0, opt = 0;
        const EpisodeObserver observer = [&](const EpisodeView& view) {
            bool bad_pess = false, bad_opt = false;
            for (int h = 0; h < 3 && !(bad_pess && bad_opt); ++h)
                for (int s = 0; s < 3; ++s)
                    for (int a = 0; a < 3; ++a) {
                        const double qstar = t.qvalue(h, s, a);
                        bad_pess |= view.exploit.q(h, s, a) > qstar + 1e-9;
                        bad_opt |= view.explore.q(h, s, a) < qstar - 1e-9;
                    }
            pess += bad_pess;
            opt += bad_opt;
        };
        Rng rng(static_cast<std::uint64_t>(i));
        run_framework1(mdp, cfg, rng, observer);
        pessimism_violations += pess;
        optimism_violations += opt;
    });
    double budget = 0.0;
    for (long long k = 1; k <= K; ++k) budget += std::pow(static_cast<double>(k), -1.5);
    const double allowed = 3.0 * budget;  // episodes per run, on average
    const double rate_pess = static_cast<double>(pessimism_violations) / num_seeds;
    const double rate_opt = static_cast<double>(optimism_violations) / num_seeds;
    return {rate_pess <= allowed && rate_opt <= allowed,
            fmt("violating episodes/run: pessimism %.3f, optimism %.3f (<= %.3f)",
                rate_pess, rate_opt, allowed)};
}

// ---------------------------------------------------------------------------
// P2: clipped suboptimality bound dominates the true gap on bonus-event
// episodes of an M1-style run.

Outcome run_p2() {
    Rng gen(7);
    const TabularMdp mdp = generate_random_mdp(5, 5, 5, gen);
    const GapReport rep = gap_report(mdp);
    TieredRunConfig cfg;
    cfg.k_max = 20000;
    cfg.alpha = 1.5;
    cfg.bonus = {BonusKind::scaled_hoeffding, 0.25};
    cfg.use_exploit_data = true;

    std::atomic<int> flagged{0};
    std::atomic<int> violations{0};
    double worst_margin = std::numeric_limits<double>::infinity();
    std::mutex mu;
    const EpisodeObserver observer = [&](const EpisodeView& view) {
        if (view.k % 100 != 0) return;
        const BonusEventResult ev =
            check_bonus_event(mdp, view.exploit, view.data, cfg.bonus, view.delta_k);
        if (!ev.held) return;
        ++flagged;
        const ClippedBoundResult res =
            clipped_suboptimality_bound(mdp, view.data, cfg.bonus, view.delta_k, rep);
        const double margin = res.bound - res.true_gap;
        {
            std::lock_guard lock(mu);
            worst_margin = std::min(worst_margin, margin);
        }
        if (margin < -1e-8) ++violations;
    };
    Rng rng(1);
    run_framework1(mdp, cfg, rng, observer);
    return {flagged > 0 && violations == 0,
            fmt("%d flagged episodes, %d violations, worst bound-truth margin %.4g",
                flagged.load(), violations.load(), worst_margin)};
}

// ---------------------------------------------------------------------------
// D1: doubling-trick structural replay, exploiter flatness, explorer restart
// cost.

Outcome run_d1() {
    Rng gen(99);
    const TabularMdp mdp = generate_random_mdp(3, 3, 3, gen);
    const long long total = (1LL << 13) - 2;  // twelve full epochs
    const int num_seeds = 8;

    std::atomic<long long> replay_mismatches{0};
    std::vector<RegretLedger> doubling(num_seeds), baseline(num_seeds);
    parallel_for(num_seeds * 2, resolve_jobs(0), [&](std::size_t j) {
        TieredRunConfig cfg;
        cfg.k_max = total;
        cfg.alpha = 1.5;
        cfg.bonus = {BonusKind::scaled_hoeffding, 0.25};
        const std::size_t seed = j / 2;
        Rng rng(seed);
        if (j % 2 == 0) {
            DoublingTrace trace;
            doubling[seed] = run_doubling(mdp, cfg, rng, &trace);
            for (const auto& ep : trace.episodes) {
                if (!ep.replayed) continue;
                const DetPolicy& emitted = trace.stored_exploit[ep.epoch][ep.k_in_epoch - 1];
                const DetPolicy& source =
                    trace.stored_exploit[ep.epoch - 1][ep.replay_index - 1];
                if (!(emitted == source)) ++replay_mismatches;
            }
        } else {
            baseline[seed] = run_framework1(mdp, cfg, rng);
        }
    });

    const RunSummary sd = summarize(doubling);
    const RunSummary sb = summarize(baseline);
    const bool pass = replay_mismatches == 0 && sd.flatness_e < 0.05 &&
                      sd.mean_final_o > sb.mean_final_o;
    return {pass, fmt("replay mismatches %lld, exploiter flatness %.4f (< 0.05), "
                      "explorer regret doubling %.1f vs framework %.1f",
                      replay_mismatches.load(), sd.flatness_e, sd.mean_final_o,
                      sb.mean_final_o)};
}

// ---------------------------------------------------------------------------
// A1: adversarial scenario. Deterministic base chain with d_min = 1 and
// delta_min = 0.5 keeps k_sup tractable; a small bonus scale keeps the
// exploiter's burn-in negligible next to the planted regret.

Outcome run_a1() {
    TabularMdp base(3, 3, 3);
    for (int h = 0; h < 3; ++h)
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 3; ++a) {
                base.mutable_row(h, s, a)[(s + 1) % 3] = 1.0;
                base.reward(h, s, a) = a == 0 ? 1.0 : 0.5;
            }
    base.validate();
    const GapReport rep = gap_report(base);

    const std::vector<double> constants = {10.0, 100.0, 1000.0};
    std::vector<double> ratios;
    std::string detail;
    for (double c : constants) {
        AdversarialOptions opts;
        opts.c1 = c;
        opts.c2 = c;
        opts.a_star = {0, 1, 1};  // planted action differs from the tie-break default
        const HardMdpPlus hard = build_hard_mdp_plus(base, rep, opts);

        TieredRunConfig cfg;
        cfg.k_max = hard.k_sup + 200;
        cfg.alpha = 1.5;
        cfg.bonus = {BonusKind::scaled_hoeffding, 0.05};
        const int num_seeds = 3;
        std::vector<double> exploiter_at_ksup(num_seeds);
        std::atomic<long long> scripted_violations{0};
        parallel_for(num_seeds, resolve_jobs(0), [&](std::size_t i) {
            Rng rng(static_cast<std::uint64_t>(i));
            const RegretLedger led = run_adversarial(hard, cfg, rng);
            for (long long k = 1; k <= cfg.k_max; ++k) {
                const double expect = k <= hard.k_sup ? hard.planted_regret : 0.0;
                if (std::abs(led.inst_o[k - 1] - expect) > 1e-10) ++scripted_violations;
            }
            exploiter_at_ksup[i] = led.cum_e[hard.k_sup - 1];
        });
        if (scripted_violations != 0)
            return {false, fmt("scripted regret mismatch at C=%g", c)};
        double mean = 0.0;
        for (double v : exploiter_at_ksup) mean += v / num_seeds;
        ratios.push_back(mean / static_cast<double>(hard.k_sup));
        detail += fmt("[C=%g: k_sup %lld, R_E %.1f, ratio %.4f] ", c, hard.k_sup, mean,
                      ratios.back());
    }

    double mean_ratio = 0.0;
    for (double r : ratios) mean_ratio += r / ratios.size();
    double worst_dev = 0.0;
    for (double r : ratios) worst_dev = std::max(worst_dev, std::abs(r - mean_ratio) / mean_ratio);
    detail += fmt("worst ratio deviation %.1f%% (<= 30%%)", 100.0 * worst_dev);
    return {worst_dev <= 0.30, detail};
}

}  // namespace

int main() {
    int failures = 0;
    const auto report = [&](const char* name, const Outcome& o) {
        std::printf("%-3s %s: %s\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        failures += !o.pass;
    };

    const BanditCriteria bandit = run_bandit_criteria();
    report("B1", bandit.b1);
    report("B2", bandit.b2);
    report("M1", run_m1());
    report("T1", run_t1());
    report("T2", run_t2());
    report("T3", run_t3());
    report("P1", run_p1());
    report("P2", run_p2());
    report("D1", run_d1());
    report("A1", run_a1());

    std::printf("%d criteria failed\n", failures);
    return failures;
}
