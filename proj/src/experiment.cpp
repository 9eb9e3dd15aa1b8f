#include "tiered/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "tiered/bandit_tiered.hpp"

namespace tiered {

namespace fs = std::filesystem;

const char* mode_name(ExperimentMode mode) {
    switch (mode) {
        case ExperimentMode::bandit: return "bandit";
        case ExperimentMode::mdp: return "mdp";
        case ExperimentMode::doubling: return "doubling";
        case ExperimentMode::mixed: return "mixed";
        case ExperimentMode::adversarial: return "adversarial";
    }
    return "unknown";
}

ExperimentMode mode_from_name(const std::string& name) {
    for (ExperimentMode m : {ExperimentMode::bandit, ExperimentMode::mdp,
                             ExperimentMode::doubling, ExperimentMode::mixed,
                             ExperimentMode::adversarial}) {
        if (name == mode_name(m)) return m;
    }
    throw std::invalid_argument("unknown mode: " + name);
}

void ExperimentConfig::validate() const {
    if (!(alpha > 1.0)) throw std::invalid_argument("config: alpha must be > 1");
    if (episodes < 1) throw std::invalid_argument("config: episodes must be >= 1");
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
    if (!(bonus.scale > 0.0)) throw std::invalid_argument("config: bonus scale must be > 0");
    if (mode == ExperimentMode::bandit) {
        if (arms < 2) throw std::invalid_argument("config: arms must be >= 2");
        if (static_cast<int>(gaps.size()) != arms)
            throw std::invalid_argument("config: need one gap per arm");
        for (double g : gaps)
            if (g < 0.0 || g > 1.0) throw std::invalid_argument("config: gaps must be in [0,1]");
    } else {
        if (!mdp_file.empty() && mdp_seed != 0)
            throw std::invalid_argument("config: give either --mdp-seed or --mdp-file, not both");
        if (states < 1 || actions < 1 || horizon < 1)
            throw std::invalid_argument("config: S, A, H must be >= 1");
    }
    if (mode == ExperimentMode::mixed && mixed_ratio < 0.0)
        throw std::invalid_argument("config: mixed-ratio must be >= 0");
}

namespace {

nlohmann::json config_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["mode"] = mode_name(c.mode);
    j["arms"] = c.arms;
    j["gaps"] = c.gaps;
    j["states"] = c.states;
    j["actions"] = c.actions;
    j["horizon"] = c.horizon;
    j["mdp_seed"] = c.mdp_seed;
    j["mdp_file"] = c.mdp_file;
    j["episodes"] = c.episodes;
    j["alpha"] = c.alpha;
    j["bonus"] = c.bonus.kind == BonusKind::naive_hoeffding ? "naive_hoeffding"
                                                            : "scaled_hoeffding";
    j["bonus_scale"] = c.bonus.scale;
    j["seeds"] = c.seeds;
    j["use_exploit_data"] = c.use_exploit_data;
    j["mixed_ratio"] = c.mixed_ratio;
    j["adv_c1"] = c.adv_c1;
    j["adv_c2"] = c.adv_c2;
    j["out_dir"] = c.out_dir;
    return j;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const std::uint64_t lo = std::stoull(text.substr(0, dots));
        const std::uint64_t hi = std::stoull(text.substr(dots + 2));
        if (hi < lo) throw std::invalid_argument("seed range is empty: " + text);
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto comma = text.find(',', pos);
        const std::string tok = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (!tok.empty()) seeds.push_back(std::stoull(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (seeds.empty()) throw std::invalid_argument("empty seed list: " + text);
    return seeds;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto comma = text.find(',', pos);
        const std::string tok = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (!tok.empty()) out.push_back(std::stod(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

}  // namespace

std::string ExperimentConfig::to_json() const { return config_json(*this).dump(2); }

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ExperimentConfig c;
    if (j.contains("mode")) c.mode = mode_from_name(j.at("mode").get<std::string>());
    if (j.contains("arms")) c.arms = j.at("arms").get<int>();
    if (j.contains("gaps")) c.gaps = j.at("gaps").get<std::vector<double>>();
    if (j.contains("states")) c.states = j.at("states").get<int>();
    if (j.contains("actions")) c.actions = j.at("actions").get<int>();
    if (j.contains("horizon")) c.horizon = j.at("horizon").get<int>();
    if (j.contains("mdp_seed")) c.mdp_seed = j.at("mdp_seed").get<std::uint64_t>();
    if (j.contains("mdp_file")) c.mdp_file = j.at("mdp_file").get<std::string>();
    if (j.contains("episodes")) c.episodes = j.at("episodes").get<long long>();
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("bonus")) {
        const std::string kind = j.at("bonus").get<std::string>();
        if (kind == "naive_hoeffding") c.bonus.kind = BonusKind::naive_hoeffding;
        else if (kind == "scaled_hoeffding") c.bonus.kind = BonusKind::scaled_hoeffding;
        else throw std::invalid_argument("unknown bonus kind: " + kind);
    }
    if (j.contains("bonus_scale")) c.bonus.scale = j.at("bonus_scale").get<double>();
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("use_exploit_data")) c.use_exploit_data = j.at("use_exploit_data").get<bool>();
    if (j.contains("mixed_ratio")) c.mixed_ratio = j.at("mixed_ratio").get<double>();
    if (j.contains("adv_c1")) c.adv_c1 = j.at("adv_c1").get<double>();
    if (j.contains("adv_c2")) c.adv_c2 = j.at("adv_c2").get<double>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    c.validate();
    return c;
}

std::string ExperimentConfig::digest() const {
    nlohmann::json j = config_json(*this);
    j.erase("out_dir");  // where outputs land does not change the experiment
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(j.dump())));
    return buf;
}

ExperimentConfig parse_config(const std::vector<std::string>& args) {
    ExperimentConfig c;
    auto need_value = [&](std::size_t i) -> const std::string& {
        if (i + 1 >= args.size())
            throw std::invalid_argument("flag " + args[i] + " expects a value");
        return args[i + 1];
    };
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& flag = args[i];
        if (flag == "--mode") c.mode = mode_from_name(need_value(i++));
        else if (flag == "--arms") c.arms = std::stoi(need_value(i++));
        else if (flag == "--gaps") c.gaps = parse_double_list(need_value(i++));
        else if (flag == "--states") c.states = std::stoi(need_value(i++));
        else if (flag == "--actions") c.actions = std::stoi(need_value(i++));
        else if (flag == "--horizon") c.horizon = std::stoi(need_value(i++));
        else if (flag == "--mdp-seed") c.mdp_seed = std::stoull(need_value(i++));
        else if (flag == "--mdp-file") c.mdp_file = need_value(i++);
        else if (flag == "--episodes") c.episodes = std::stoll(need_value(i++));
        else if (flag == "--alpha") c.alpha = std::stod(need_value(i++));
        else if (flag == "--bonus") {
            const std::string kind = need_value(i++);
            if (kind == "naive_hoeffding") c.bonus.kind = BonusKind::naive_hoeffding;
            else if (kind == "scaled_hoeffding") c.bonus.kind = BonusKind::scaled_hoeffding;
            else throw std::invalid_argument("unknown bonus kind: " + kind);
        } else if (flag == "--bonus-scale") c.bonus.scale = std::stod(need_value(i++));
        else if (flag == "--seeds") c.seeds = parse_seed_list(need_value(i++));
        else if (flag == "--use-exploit-data") c.use_exploit_data = true;
        else if (flag == "--mixed-ratio") c.mixed_ratio = std::stod(need_value(i++));
        else if (flag == "--jobs") c.jobs = std::stoi(need_value(i++));
        else if (flag == "--out-dir") c.out_dir = need_value(i++);
        else if (flag == "--adv-c1") c.adv_c1 = std::stod(need_value(i++));
        else if (flag == "--adv-c2") c.adv_c2 = std::stod(need_value(i++));
        else if (flag == "--config") c = ExperimentConfig::from_json([&] {
                std::ifstream in(need_value(i++));
                if (!in) throw std::invalid_argument("cannot open config file");
                return std::string(std::istreambuf_iterator<char>(in), {});
            }());
        else throw std::invalid_argument("unknown flag: " + flag);
    }
    c.validate();
    return c;
}

int resolve_jobs(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("TIERED_RL_JOBS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const int workers = std::min<std::size_t>(std::max(jobs, 1), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::string ledger_to_csv(const RegretLedger& ledger) {
    std::string out = "k,inst_regret_O,inst_regret_E,cum_regret_O,cum_regret_E\n";
    for (std::size_t i = 0; i < ledger.episodes(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += format_double(ledger.inst_o[i]);
        out += ',';
        out += format_double(ledger.inst_e[i]);
        out += ',';
        out += format_double(ledger.cum_o[i]);
        out += ',';
        out += format_double(ledger.cum_e[i]);
        out += '\n';
    }
    return out;
}

namespace {

BanditInstance bandit_instance_from(const ExperimentConfig& cfg) {
    double max_gap = 0.0;
    for (double g : cfg.gaps) max_gap = std::max(max_gap, g);
    const double mu_best = 0.5 + max_gap / 2.0;
    BanditInstance inst;
    for (double g : cfg.gaps) inst.means.push_back(mu_best - g);
    inst.validate();
    return inst;
}

TabularMdp mdp_instance_from(const ExperimentConfig& cfg) {
    if (!cfg.mdp_file.empty()) return load_mdp(cfg.mdp_file);
    Rng rng(cfg.mdp_seed);
    return generate_random_mdp(cfg.states, cfg.actions, cfg.horizon, rng);
}

TieredRunConfig tiered_config_from(const ExperimentConfig& cfg) {
    TieredRunConfig rc;
    rc.k_max = cfg.episodes;
    rc.alpha = cfg.alpha;
    rc.bonus = cfg.bonus;
    rc.use_exploit_data = cfg.use_exploit_data;
    rc.mixed_ratio = cfg.mixed_ratio;
    return rc;
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::string digest = cfg.digest();
    fs::create_directories(cfg.out_dir);

    RunManifest manifest;
    manifest.config_digest = digest;
    manifest.library_version = kLibraryVersion;

    std::optional<TabularMdp> mdp;
    std::optional<BanditInstance> bandit;
    std::optional<HardMdpPlus> hard;
    if (cfg.mode == ExperimentMode::bandit) {
        bandit = bandit_instance_from(cfg);
        manifest.diagnostics.delta_min = bandit->delta_min();
    } else {
        mdp = mdp_instance_from(cfg);
        try {
            const GapReport rep = gap_report(*mdp);
            manifest.diagnostics.delta_min = rep.delta_min;
            manifest.diagnostics.d_min = rep.d_min;
            manifest.diagnostics.d_min_available = rep.d_min_available;
            manifest.diagnostics.num_optimal_policies = rep.num_optimal_policies;
            if (cfg.mode == ExperimentMode::adversarial) {
                AdversarialOptions opts;
                opts.c1 = cfg.adv_c1;
                opts.c2 = cfg.adv_c2;
                hard = build_hard_mdp_plus(*mdp, rep, opts);
                // keep the augmented instance replayable through --mdp-file
                save_mdp(hard->mdp_plus, cfg.out_dir + "/mdp_plus.json");
            }
        } catch (const EnumerationCapExceeded&) {
            // Degrade to gap-only diagnostics; the run itself proceeds.
            const GapReport rep = gap_report_gaps_only(*mdp);
            manifest.diagnostics.delta_min = rep.delta_min;
            manifest.diagnostics.enumeration_capped = true;
            if (cfg.mode == ExperimentMode::adversarial)
                throw std::runtime_error(
                    "adversarial mode needs d_min, but |Pi*| exceeded the enumeration cap");
        }
    }

    std::vector<RegretLedger> ledgers(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), resolve_jobs(cfg.jobs), [&](std::size_t i) {
        Rng rng(cfg.seeds[i]);
        RegretLedger ledger;
        switch (cfg.mode) {
            case ExperimentMode::bandit: {
                BanditRunOptions opts;
                opts.k_max = cfg.episodes;
                opts.alpha = cfg.alpha;
                ledger = run_bandit_tiered(*bandit, opts, rng);
                break;
            }
            case ExperimentMode::mdp:
                ledger = run_framework1(*mdp, tiered_config_from(cfg), rng);
                break;
            case ExperimentMode::doubling:
                ledger = run_doubling(*mdp, tiered_config_from(cfg), rng);
                break;
            case ExperimentMode::mixed:
                ledger = run_mixed_arrival(*mdp, tiered_config_from(cfg), rng);
                break;
            case ExperimentMode::adversarial:
                ledger = run_adversarial(*hard, tiered_config_from(cfg), rng);
                break;
        }
        ledger.seed = cfg.seeds[i];
        ledger.config_digest = digest;
        ledger.delta_min = manifest.diagnostics.delta_min;
        ledger.d_min = manifest.diagnostics.d_min;
        ledgers[i] = std::move(ledger);
    });

    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        const std::string path = cfg.out_dir + "/" + mode_name(cfg.mode) + "_seed" +
                                 std::to_string(cfg.seeds[i]) + ".csv";
        write_atomic(path, ledger_to_csv(ledgers[i]));
        manifest.csv_files.push_back(path);
    }

    const RunSummary summary = summarize(ledgers);
    nlohmann::json j;
    j["config_digest"] = digest;
    j["library_version"] = kLibraryVersion;
    j["mode"] = mode_name(cfg.mode);
    j["episodes"] = cfg.episodes;
    j["seeds"] = cfg.seeds;
    j["csv_files"] = manifest.csv_files;
    j["final_cum_regret_O"] = summary.final_cum_o;
    j["final_cum_regret_E"] = summary.final_cum_e;
    j["mean_final_O"] = summary.mean_final_o;
    j["mean_final_E"] = summary.mean_final_e;
    j["two_stderr_final_O"] = 2.0 * summary.stderr_final_o;
    j["two_stderr_final_E"] = 2.0 * summary.stderr_final_e;
    j["flatness_O"] = summary.flatness_o;
    j["flatness_E"] = summary.flatness_e;
    nlohmann::json diag;
    diag["delta_min"] = manifest.diagnostics.delta_min;
    if (manifest.diagnostics.d_min_available) diag["d_min"] = manifest.diagnostics.d_min;
    if (manifest.diagnostics.num_optimal_policies >= 0)
        diag["num_optimal_policies"] = manifest.diagnostics.num_optimal_policies;
    diag["enumeration_capped"] = manifest.diagnostics.enumeration_capped;
    if (cfg.mode == ExperimentMode::adversarial && hard) {
        diag["k_sup"] = hard->k_sup;
        diag["d_plus_min"] = hard->d_plus_min;
        diag["planted_regret"] = hard->planted_regret;
    }
    j["instance"] = diag;

    manifest.summary_file = cfg.out_dir + "/summary_" + mode_name(cfg.mode) + "_" + digest +
                            ".json";
    write_atomic(manifest.summary_file, j.dump(2) + "\n");
    return manifest;
}

GapSearchResult filter_seeds_by_gap(int states, int actions, int horizon,
                                    const std::vector<double>& targets, double tolerance,
                                    std::uint64_t budget) {
    if (budget < 1) throw std::invalid_argument("filter_seeds_by_gap: budget must be >= 1");
    GapSearchResult res;
    res.seeds.assign(targets.size(), std::nullopt);
    res.achieved.assign(targets.size(), 0.0);
    res.nearest_seed.assign(targets.size(), 0);
    res.nearest_delta.assign(targets.size(),
                             std::numeric_limits<double>::quiet_NaN());
    std::size_t found = 0;
    for (std::uint64_t seed = 0; seed < budget && found < targets.size(); ++seed) {
        Rng rng(seed);
        const TabularMdp mdp = generate_random_mdp(states, actions, horizon, rng);
        const GapReport rep = gap_report_gaps_only(mdp);
        if (!std::isfinite(rep.delta_min)) continue;
        bool claimed = false;
        for (std::size_t t = 0; t < targets.size(); ++t) {
            const double err = std::abs(rep.delta_min - targets[t]);
            if (std::isnan(res.nearest_delta[t]) ||
                err < std::abs(res.nearest_delta[t] - targets[t])) {
                res.nearest_seed[t] = seed;
                res.nearest_delta[t] = rep.delta_min;
            }
            if (!claimed && !res.seeds[t] && err <= tolerance * targets[t]) {
                res.seeds[t] = seed;
                res.achieved[t] = rep.delta_min;
                ++found;
                claimed = true;  // one target per seed
            }
        }
    }
    res.all_found = found == targets.size();
    return res;
}

}  // namespace tiered
