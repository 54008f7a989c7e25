#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "risnoma/agent.hpp"
#include "risnoma/channel.hpp"
#include "risnoma/clustering.hpp"

namespace risnoma {

enum class ChannelMode { Frozen, PerEpisode };

// Everything an experiment needs, with reference defaults. Loaded from a
// flat key=value file plus command-line overrides.
struct ExperimentConfig {
    NetworkConfig net{};
    double alpha_good = 0.2;
    double alpha_poor = 0.8;
    DdpgConfig agent{};
    std::size_t episodes = 300;
    std::size_t steps_per_episode = 200;
    std::size_t early_stop_patience = 40;
    std::size_t min_episodes = 30;
    std::size_t converge_window = 20;
    ChannelMode channel_mode = ChannelMode::Frozen;
    MomaOptions moma{};
    bool well_separated = false;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<std::size_t> d_sweep{2, 4, 8};
    std::vector<std::size_t> n_sweep{4, 9, 16};
    std::vector<double> pt_sweep{10, 15, 20, 25, 30};
    std::vector<std::size_t> timing_steps{1000, 2000, 4000, 8000};
    std::size_t random_slots = 1000;
    std::uint64_t enum_guard = 1000000;

    double rho_per_cluster() const {
        return dbm_to_watt(net.tx_power_dbm) / static_cast<double>(net.num_antennas);
    }
    PowerAllocation allocation() const {
        return PowerAllocation::uniform(net.num_antennas, alpha_good, alpha_poor);
    }

    void validate() const {
        net.validate();
        if (!(alpha_good > 0.0) || !(alpha_poor > 0.0) ||
            std::abs(alpha_good + alpha_poor - 1.0) > 1e-12)
            throw ConfigError("alpha_good/alpha_poor must be positive and sum to 1");
        if (!(alpha_poor > alpha_good))
            throw ConfigError("alpha_poor must exceed alpha_good");
        if (agent.gamma < 0.0 || agent.gamma > 1.0) throw ConfigError("gamma must be in [0,1]");
        if (agent.tau < 0.0 || agent.tau > 1.0) throw ConfigError("tau must be in [0,1]");
        if (agent.exploration.epsilon < 0.0 || agent.exploration.epsilon > 1.0)
            throw ConfigError("epsilon must be in [0,1]");
        if (agent.batch_size == 0) throw ConfigError("batch_size must be positive");
        if (agent.replay_capacity < agent.batch_size)
            throw ConfigError("replay_capacity must be >= batch_size");
        if (agent.hidden_size == 0) throw ConfigError("hidden_size must be positive");
        if (agent.deadzone < 0.0 || agent.deadzone >= 1.0)
            throw ConfigError("deadzone must be in [0,1)");
        if (moma.depth < 2) throw ConfigError("moma_depth must be >= 2");
        if (moma.window == 0) throw ConfigError("moma_window must be positive");
        if (seeds.empty()) throw ConfigError("seeds must be non-empty");
    }
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
    }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    const double d = parse_double(key, v);
    if (d < 0.0 || d != std::floor(d))
        throw ConfigError("value for " + key + " must be a non-negative integer: '" + v + "'");
    return static_cast<std::uint64_t>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "0" || v == "false") return false;
    if (v == "1" || v == "true") return true;
    throw ConfigError("value for " + key + " must be 0/1: '" + v + "'");
}

template <typename T, typename Parse>
inline std::vector<T> parse_list(const std::string& key, const std::string& v, Parse parse) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(static_cast<T>(parse(key, item)));
    }
    if (out.empty()) throw ConfigError("empty list for " + key);
    return out;
}

}  // namespace detail

// Applies one key=value override. Unknown keys are rejected by name.
inline void config_set(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_list;
    using detail::parse_uint;

    if (key == "num_antennas") cfg.net.num_antennas = parse_uint(key, value);
    else if (key == "num_res") cfg.net.num_res = parse_uint(key, value);
    else if (key == "num_users") cfg.net.num_users = parse_uint(key, value);
    else if (key == "bandwidth_hz") cfg.net.bandwidth_hz = parse_double(key, value);
    else if (key == "tx_power_dbm") cfg.net.tx_power_dbm = parse_double(key, value);
    else if (key == "noise_power_dbm") cfg.net.noise_power_dbm = parse_double(key, value);
    else if (key == "side_length_m") cfg.net.side_length_m = parse_double(key, value);
    else if (key == "phase_levels") cfg.net.phase_levels = parse_uint(key, value);
    else if (key == "eta_ap_user") cfg.net.eta_ap_user = parse_double(key, value);
    else if (key == "eta_ap_ris") cfg.net.eta_ap_ris = parse_double(key, value);
    else if (key == "eta_ris_user") cfg.net.eta_ris_user = parse_double(key, value);
    else if (key == "ref_distance_m") cfg.net.ref_distance_m = parse_double(key, value);
    else if (key == "ris_auto_place") cfg.net.ris_auto_place = parse_bool(key, value);
    else if (key == "ris_x") cfg.net.ris_x = parse_double(key, value);
    else if (key == "ris_y") cfg.net.ris_y = parse_double(key, value);
    else if (key == "alpha_good") cfg.alpha_good = parse_double(key, value);
    else if (key == "alpha_poor") cfg.alpha_poor = parse_double(key, value);
    else if (key == "gamma") cfg.agent.gamma = parse_double(key, value);
    else if (key == "tau") cfg.agent.tau = parse_double(key, value);
    else if (key == "lr0") cfg.agent.lr0 = parse_double(key, value);
    else if (key == "lr_schedule") cfg.agent.lr_kind = lr_kind_from_string(value);
    else if (key == "lr_k") cfg.agent.lr_hyper.k = parse_double(key, value);
    else if (key == "lr_drop") cfg.agent.lr_hyper.drop = parse_double(key, value);
    else if (key == "lr_step_drop") cfg.agent.lr_hyper.step_drop = parse_uint(key, value);
    else if (key == "batch_size") cfg.agent.batch_size = parse_uint(key, value);
    else if (key == "replay_capacity") cfg.agent.replay_capacity = parse_uint(key, value);
    else if (key == "hidden_size") cfg.agent.hidden_size = parse_uint(key, value);
    else if (key == "strategy") cfg.agent.strategy = strategy_from_string(value);
    else if (key == "epsilon") cfg.agent.exploration.epsilon = parse_double(key, value);
    else if (key == "softmax_temp") cfg.agent.exploration.softmax_temp = parse_double(key, value);
    else if (key == "exp3_alpha") cfg.agent.exploration.exp3_alpha = parse_double(key, value);
    else if (key == "exp3_beta") cfg.agent.exploration.exp3_beta = parse_double(key, value);
    else if (key == "noise_sigma0") cfg.agent.noise_sigma0 = parse_double(key, value);
    else if (key == "noise_sigma1") cfg.agent.noise_sigma1 = parse_double(key, value);
    else if (key == "deadzone") cfg.agent.deadzone = parse_double(key, value);
    else if (key == "multi_re") cfg.agent.multi_re = parse_bool(key, value);
    else if (key == "episodes") cfg.episodes = parse_uint(key, value);
    else if (key == "steps_per_episode") cfg.steps_per_episode = parse_uint(key, value);
    else if (key == "early_stop_patience") cfg.early_stop_patience = parse_uint(key, value);
    else if (key == "min_episodes") cfg.min_episodes = parse_uint(key, value);
    else if (key == "converge_window") cfg.converge_window = parse_uint(key, value);
    else if (key == "channel_mode") {
        if (value == "frozen") cfg.channel_mode = ChannelMode::Frozen;
        else if (value == "per_episode") cfg.channel_mode = ChannelMode::PerEpisode;
        else throw ConfigError("channel_mode must be frozen|per_episode");
    }
    else if (key == "moma_depth") cfg.moma.depth = parse_uint(key, value);
    else if (key == "moma_window") cfg.moma.window = parse_uint(key, value);
    else if (key == "moma_max_queries") cfg.moma.max_queries = parse_uint(key, value);
    else if (key == "well_separated") cfg.well_separated = parse_bool(key, value);
    else if (key == "seeds")
        cfg.seeds = parse_list<std::uint64_t>(key, value, parse_uint);
    else if (key == "d_sweep")
        cfg.d_sweep = parse_list<std::size_t>(key, value, parse_uint);
    else if (key == "n_sweep")
        cfg.n_sweep = parse_list<std::size_t>(key, value, parse_uint);
    else if (key == "pt_sweep")
        cfg.pt_sweep = parse_list<double>(key, value, parse_double);
    else if (key == "timing_steps")
        cfg.timing_steps = parse_list<std::size_t>(key, value, parse_uint);
    else if (key == "random_slots") cfg.random_slots = parse_uint(key, value);
    else if (key == "enum_guard") cfg.enum_guard = parse_uint(key, value);
    else throw ConfigError("unknown key: " + key);
}

// Flat key=value file; '#' starts a comment, blank lines ignored. An empty
// file yields the built-in defaults.
inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ExperimentConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string{};
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        config_set(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

}  // namespace risnoma
