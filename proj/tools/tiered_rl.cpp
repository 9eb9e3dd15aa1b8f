#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "tiered/experiment.hpp"

namespace {

constexpr const char* kUsage = R"(tiered_rl - tiered RL experiment runner

Usage:
  tiered_rl [flags]                 run an experiment
  tiered_rl filter-seeds [flags]    scan generator seeds by minimal gap

Experiment flags:
  --mode {bandit,mdp,doubling,mixed,adversarial}
  --arms N --gaps g1,g2,...         bandit instance
  --states S --actions A --horizon H --mdp-seed N | --mdp-file PATH
  --episodes K --alpha A            schedule (alpha > 1)
  --bonus {naive_hoeffding,scaled_hoeffding} --bonus-scale X
  --seeds 0..9 | 0,3,7              run seeds
  --use-exploit-data                also feed exploit trajectories to the data
  --mixed-ratio C                   mixed mode: P(exploit)/P(explore)
  --adv-c1 X --adv-c2 X             adversarial explorer constants
  --jobs N                          worker threads (or TIERED_RL_JOBS)
  --out-dir PATH                    output directory
  --config FILE                     load a JSON config (flags after it override)

filter-seeds flags:
  --states S --actions A --horizon H
  --targets d1,d2,...               delta_min targets
  --tolerance X                     relative tolerance (e.g. 0.5)
  --budget N                        seeds to scan
)";

int run_filter_seeds(const std::vector<std::string>& args) {
    int states = 5, actions = 5, horizon = 5;
    std::vector<double> targets;
    double tolerance = 0.5;
    std::uint64_t budget = 10000;
    for (std::size_t i = 0; i < args.size(); ++i) {
        auto value = [&]() -> std::string {
            if (i + 1 >= args.size())
                throw std::invalid_argument("flag " + args[i] + " expects a value");
            return args[++i];
        };
        if (args[i] == "--states") states = std::stoi(value());
        else if (args[i] == "--actions") actions = std::stoi(value());
        else if (args[i] == "--horizon") horizon = std::stoi(value());
        else if (args[i] == "--tolerance") tolerance = std::stod(value());
        else if (args[i] == "--budget") budget = std::stoull(value());
        else if (args[i] == "--targets") {
            std::string text = value();
            std::size_t pos = 0;
            while (pos < text.size()) {
                const auto comma = text.find(',', pos);
                targets.push_back(std::stod(text.substr(pos, comma - pos)));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
        } else throw std::invalid_argument("unknown flag: " + args[i]);
    }
    if (targets.empty()) throw std::invalid_argument("filter-seeds: --targets required");

    const tiered::GapSearchResult res =
        tiered::filter_seeds_by_gap(states, actions, horizon, targets, tolerance, budget);
    for (std::size_t t = 0; t < targets.size(); ++t) {
        if (res.seeds[t]) {
            std::printf("target %.6g: seed %llu (delta_min %.6g)\n", targets[t],
                        static_cast<unsigned long long>(*res.seeds[t]), res.achieved[t]);
        } else {
            std::printf("target %.6g: not found in %llu seeds; nearest seed %llu (delta_min %.6g)\n",
                        targets[t], static_cast<unsigned long long>(budget),
                        static_cast<unsigned long long>(res.nearest_seed[t]),
                        res.nearest_delta[t]);
        }
    }
    return res.all_found ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        if (!args.empty() && (args[0] == "--help" || args[0] == "-h")) {
            std::fputs(kUsage, stdout);
            return 0;
        }
        if (!args.empty() && args[0] == "filter-seeds")
            return run_filter_seeds({args.begin() + 1, args.end()});

        const tiered::ExperimentConfig cfg = tiered::parse_config(args);
        const tiered::RunManifest manifest = tiered::run_experiment(cfg);
        std::printf("config digest: %s\n", manifest.config_digest.c_str());
        for (const auto& f : manifest.csv_files) std::printf("wrote %s\n", f.c_str());
        std::printf("wrote %s\n", manifest.summary_file.c_str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
