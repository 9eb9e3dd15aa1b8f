#include <cmath>

#include "json.hpp"

#include "tiered/oracle.hpp"

namespace tiered {

namespace {

nlohmann::json table_by_layer(const std::vector<double>& flat, int S, int A, int H) {
    nlohmann::json out = nlohmann::json::array();
    for (int h = 0; h < H; ++h) {
        nlohmann::json layer = nlohmann::json::array();
        for (int s = 0; s < S; ++s) {
            nlohmann::json row = nlohmann::json::array();
            for (int a = 0; a < A; ++a)
                row.push_back(flat[(static_cast<std::size_t>(h) * S + s) * A + a]);
            layer.push_back(std::move(row));
        }
        out.push_back(std::move(layer));
    }
    return out;
}

}  // namespace

std::string to_json(const GapReport& report) {
    nlohmann::json j;
    j["S"] = report.num_states;
    j["A"] = report.num_actions;
    j["H"] = report.horizon;
    j["gaps"] = table_by_layer(report.gaps, report.num_states, report.num_actions,
                               report.horizon);
    j["delta_min"] = std::isfinite(report.delta_min) ? nlohmann::json(report.delta_min)
                                                     : nlohmann::json("inf");
    nlohmann::json opts = nlohmann::json::array();
    for (int h = 0; h < report.horizon; ++h) {
        nlohmann::json layer = nlohmann::json::array();
        for (int s = 0; s < report.num_states; ++s) {
            nlohmann::json acts = nlohmann::json::array();
            for (int a : report.optimal_actions(h, s)) acts.push_back(a + 1);
            layer.push_back(std::move(acts));
        }
        opts.push_back(std::move(layer));
    }
    j["optimal_actions"] = std::move(opts);
    if (report.num_optimal_policies >= 0)
        j["num_optimal_policies"] = report.num_optimal_policies;
    if (report.d_min_available) j["d_min"] = report.d_min;
    return j.dump();
}

std::string to_json(const OccupancyBoundReport& report) {
    nlohmann::json j;
    j["holds"] = report.holds;
    j["worst_slack"] = report.worst_slack;
    j["lhs"] = table_by_layer(report.lhs, report.num_states, report.num_actions,
                              report.horizon);
    j["rhs"] = table_by_layer(report.rhs, report.num_states, report.num_actions,
                              report.horizon);
    return j.dump();
}

}  // namespace tiered
