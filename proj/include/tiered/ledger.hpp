#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tiered {

// Per-episode exact pseudo-regret record for both tiers. Cumulative columns
// are running sums of the instantaneous ones; in mixed-arrival mode, the
// column of the tier that was not served in an episode records 0.
struct RegretLedger {
    std::vector<double> inst_o;
    std::vector<double> inst_e;
    std::vector<double> cum_o;
    std::vector<double> cum_e;
    std::vector<double> realized_o;  // realized rewards, filled only when sampled
    std::vector<double> realized_e;
    std::vector<std::uint8_t> exploit_arrival;  // mixed-arrival mode only

    std::uint64_t seed = 0;
    std::string config_digest;
    double delta_min = 0.0;
    double d_min = 0.0;

    std::size_t episodes() const { return inst_o.size(); }

    void append(double regret_o, double regret_e) {
        inst_o.push_back(regret_o);
        inst_e.push_back(regret_e);
        cum_o.push_back((cum_o.empty() ? 0.0 : cum_o.back()) + regret_o);
        cum_e.push_back((cum_e.empty() ? 0.0 : cum_e.back()) + regret_e);
    }
};

// Last-quarter share of cumulative regret: (cum(K) - cum(3K/4)) / cum(K).
// Small values mean the curve has flattened.
double flatness(const std::vector<double>& cum);

}  // namespace tiered
