#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tiered/diagnostics.hpp"
#include "tiered/rl_tiered.hpp"

namespace tiered {

inline constexpr const char* kLibraryVersion = "0.1.0";

enum class ExperimentMode { bandit, mdp, doubling, mixed, adversarial };

const char* mode_name(ExperimentMode mode);
ExperimentMode mode_from_name(const std::string& name);

// Fully resolved experiment description. Defaults match the documented CLI
// defaults (alpha 1.5, scaled bonus 0.25, seeds 0..9).
struct ExperimentConfig {
    ExperimentMode mode = ExperimentMode::mdp;

    // Bandit instance: arm count and per-arm gaps. Means are derived as
    // mu_best - gap with mu_best = 1/2 + max_gap/2, which keeps every mean
    // in [0,1] and the gap structure exact.
    int arms = 2;
    std::vector<double> gaps = {0.0, 0.1};

    // MDP instance: generated from mdp_seed unless mdp_file is given.
    int states = 5;
    int actions = 5;
    int horizon = 5;
    std::uint64_t mdp_seed = 0;
    std::string mdp_file;

    long long episodes = 10000;
    double alpha = 1.5;
    BonusSpec bonus;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    bool use_exploit_data = false;
    double mixed_ratio = 1.0;
    double adv_c1 = 0.0;  // 0 selects the H*S*A/delta_min default
    double adv_c2 = 0.0;
    int jobs = 0;  // 0: TIERED_RL_JOBS env var, then hardware concurrency
    std::string out_dir = "out";

    void validate() const;
    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
    // FNV-1a over the canonical (key-sorted) JSON encoding.
    std::string digest() const;
};

// Parses command-line style arguments (without argv[0]). Accepts the flag
// set documented in the README; throws std::invalid_argument on unknown
// flags or out-of-range values.
ExperimentConfig parse_config(const std::vector<std::string>& args);

struct InstanceDiagnostics {
    double delta_min = 0.0;
    double d_min = 0.0;
    bool d_min_available = false;
    long long num_optimal_policies = -1;
    bool enumeration_capped = false;
};

struct RunManifest {
    std::string config_digest;
    std::string library_version;
    std::vector<std::string> csv_files;  // one per seed
    std::string summary_file;
    InstanceDiagnostics diagnostics;
};

// Executes the configured mode once per seed (in parallel, bounded by jobs),
// writes one CSV per seed plus a summary JSON, and returns the manifest.
RunManifest run_experiment(const ExperimentConfig& cfg);

// Scans generator seeds 0..budget-1 for instances whose delta_min falls
// within relative `tolerance` of each target. Seeds already claimed by an
// earlier target are skipped.
struct GapSearchResult {
    std::vector<std::optional<std::uint64_t>> seeds;  // per target
    std::vector<double> achieved;                     // delta_min of the match
    std::vector<std::uint64_t> nearest_seed;          // best seen, per target
    std::vector<double> nearest_delta;
    bool all_found = false;
};
GapSearchResult filter_seeds_by_gap(int states, int actions, int horizon,
                                    const std::vector<double>& targets, double tolerance,
                                    std::uint64_t budget);

// Fixed CSV schema: header k,inst_regret_O,inst_regret_E,cum_regret_O,
// cum_regret_E; one row per episode; 12 significant digits; LF endings.
std::string ledger_to_csv(const RegretLedger& ledger);

// Runs fn(0..n-1) on up to `jobs` worker threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

int resolve_jobs(int requested);

}  // namespace tiered
