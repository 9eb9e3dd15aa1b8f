#include "tiered/mdp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tiered {

void MixedPolicy::validate() const {
    if (components.size() != weights.size())
        throw std::invalid_argument("MixedPolicy: components/weights size mismatch");
    if (components.empty()) throw std::invalid_argument("MixedPolicy: empty mixture");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("MixedPolicy: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("MixedPolicy: weights do not sum to 1");
}

void TabularMdp::validate() const {
    if (num_states < 1 || num_actions < 1 || horizon < 1)
        throw std::invalid_argument("TabularMdp: need S >= 1, A >= 1, H >= 1");
    if (initial_state < 0 || initial_state >= num_states)
        throw std::invalid_argument("TabularMdp: initial state out of range");
    const std::size_t n_sa = static_cast<std::size_t>(horizon) * num_states * num_actions;
    if (rewards.size() != n_sa || transitions.size() != n_sa * num_states)
        throw std::invalid_argument("TabularMdp: table sizes inconsistent with dims");
    for (int h = 0; h < horizon; ++h) {
        for (int s = 0; s < num_states; ++s) {
            for (int a = 0; a < num_actions; ++a) {
                const double r = reward(h, s, a);
                if (!(r >= 0.0 && r <= 1.0))
                    throw std::invalid_argument("TabularMdp: reward outside [0,1]");
                double sum = 0.0;
                for (double p : row(h, s, a)) {
                    if (p < 0.0) throw std::invalid_argument("TabularMdp: negative probability");
                    sum += p;
                }
                if (std::abs(sum - 1.0) > 1e-12)
                    throw std::invalid_argument("TabularMdp: transition row does not sum to 1");
            }
        }
    }
}

TabularMdp generate_random_mdp(int num_states, int num_actions, int horizon, Rng& rng) {
    if (num_states < 1 || num_actions < 1 || horizon < 1)
        throw std::invalid_argument("generate_random_mdp: need S,A,H >= 1");
    TabularMdp mdp(num_states, num_actions, horizon);
    for (int h = 0; h < horizon; ++h) {
        for (int s = 0; s < num_states; ++s) {
            for (int a = 0; a < num_actions; ++a) {
                auto row = mdp.mutable_row(h, s, a);
                double sum = 0.0;
                for (int sp = 0; sp < num_states; ++sp) {
                    row[sp] = static_cast<double>(rng.uniform_int(1, 10));
                    sum += row[sp];
                }
                for (int sp = 0; sp < num_states; ++sp) row[sp] /= sum;
                mdp.reward(h, s, a) = static_cast<double>(rng.uniform_int(1, 10)) / 10.0;
            }
        }
    }
    return mdp;
}

namespace {

Trajectory sample_det(const TabularMdp& mdp, const DetPolicy& policy, Rng& rng) {
    if (policy.num_states != mdp.num_states || policy.horizon != mdp.horizon)
        throw std::invalid_argument("sample_trajectory: policy dims do not match mdp");
    Trajectory traj;
    traj.steps.reserve(mdp.horizon);
    int s = mdp.initial_state;
    for (int h = 0; h < mdp.horizon; ++h) {
        const int a = policy.at(h, s);
        if (a < 0 || a >= mdp.num_actions)
            throw std::invalid_argument("sample_trajectory: action out of range");
        const int sp = rng.categorical(mdp.row(h, s, a));
        traj.steps.push_back({s, a, mdp.reward(h, s, a), sp});
        s = sp;
    }
    return traj;
}

}  // namespace

Trajectory sample_trajectory(const TabularMdp& mdp, const DetPolicy& policy, Rng& rng) {
    return sample_det(mdp, policy, rng);
}

Trajectory sample_trajectory(const TabularMdp& mdp, const MixedPolicy& policy, Rng& rng) {
    policy.validate();
    const int idx = rng.categorical(policy.weights);
    return sample_det(mdp, policy.components[idx], rng);
}

std::string mdp_to_json(const TabularMdp& mdp) {
    nlohmann::json j;
    j["S"] = mdp.num_states;
    j["A"] = mdp.num_actions;
    j["H"] = mdp.horizon;
    nlohmann::json trans = nlohmann::json::array();
    nlohmann::json rew = nlohmann::json::array();
    for (int h = 0; h < mdp.horizon; ++h) {
        nlohmann::json th = nlohmann::json::array();
        nlohmann::json rh = nlohmann::json::array();
        for (int s = 0; s < mdp.num_states; ++s) {
            nlohmann::json ts = nlohmann::json::array();
            nlohmann::json rs = nlohmann::json::array();
            for (int a = 0; a < mdp.num_actions; ++a) {
                ts.push_back(std::vector<double>(mdp.row(h, s, a).begin(), mdp.row(h, s, a).end()));
                rs.push_back(mdp.reward(h, s, a));
            }
            th.push_back(std::move(ts));
            rh.push_back(std::move(rs));
        }
        trans.push_back(std::move(th));
        rew.push_back(std::move(rh));
    }
    j["transitions"] = std::move(trans);
    j["rewards"] = std::move(rew);
    return j.dump();
}

TabularMdp mdp_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    const int S = j.at("S").get<int>();
    const int A = j.at("A").get<int>();
    const int H = j.at("H").get<int>();
    TabularMdp mdp(S, A, H);
    const auto& trans = j.at("transitions");
    const auto& rew = j.at("rewards");
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const auto& row = trans.at(h).at(s).at(a);
                if (static_cast<int>(row.size()) != S)
                    throw std::invalid_argument("mdp_from_json: bad transition row length");
                auto dst = mdp.mutable_row(h, s, a);
                for (int sp = 0; sp < S; ++sp) dst[sp] = row.at(sp).get<double>();
                mdp.reward(h, s, a) = rew.at(h).at(s).at(a).get<double>();
            }
        }
    }
    mdp.validate();
    return mdp;
}

void save_mdp(const TabularMdp& mdp, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_mdp: cannot open " + path);
    out << mdp_to_json(mdp) << '\n';
}

TabularMdp load_mdp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_mdp: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return mdp_from_json(ss.str());
}

}  // namespace tiered
