#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "risnoma/baselines.hpp"
#include "risnoma/config.hpp"

namespace risnoma {

// ---- CSV emission -------------------------------------------------------

inline std::string csv_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void emit_csv(const std::string& path, const std::string& header,
                     const std::vector<std::string>& rows) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("emit_csv: cannot open " + path);
    std::fprintf(f, "%s\n", header.c_str());
    for (const auto& r : rows) std::fprintf(f, "%s\n", r.c_str());
    std::fclose(f);
}

struct MeanCi {
    double mean = 0.0;
    double ci95 = 0.0;
};

inline MeanCi mean_ci(const std::vector<double>& xs) {
    MeanCi r;
    if (xs.empty()) return r;
    for (double x : xs) r.mean += x;
    r.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - r.mean) * (x - r.mean);
        const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        r.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
    }
    return r;
}

// Runs fn(0..jobs-1) across up to `hw` workers. Each job owns its state, so
// results are independent of scheduling.
inline void parallel_cells(std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(hw, jobs);
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : pool) t.join();
}

// ---- per-seed experiment setup ------------------------------------------

// Equal-radius pair layout: K tight good/poor pairs spread on a ring, the
// good member slightly inside. Produces unambiguously separable clusters.
inline Placement separated_placement(const NetworkConfig& cfg, Rng& rng) {
    const std::size_t k = cfg.num_antennas;
    const double ring = cfg.side_length_m / 3.0;
    const double sep = cfg.side_length_m / 40.0;
    const double jitter = cfg.side_length_m / 200.0;
    std::vector<Point> pos(2 * k);
    for (std::size_t j = 0; j < k; ++j) {
        const double ang = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(k);
        const double cx = std::cos(ang), cy = std::sin(ang);
        pos[j] = {(ring - sep) * cx + rng.uniform(-jitter, jitter),
                  (ring - sep) * cy + rng.uniform(-jitter, jitter)};
        pos[k + j] = {(ring + sep) * cx + rng.uniform(-jitter, jitter),
                      (ring + sep) * cy + rng.uniform(-jitter, jitter)};
    }
    Placement p;
    p.ap = {0.0, 0.0};
    p.positions = std::move(pos);
    p.groups.assign(2 * k, UserGroup::Poor);
    for (std::size_t j = 0; j < k; ++j) {
        p.groups[j] = UserGroup::Good;
        p.good_ids.push_back(j);
        p.poor_ids.push_back(k + j);
    }
    if (cfg.ris_auto_place) {
        Point c{0.0, 0.0};
        for (auto id : p.poor_ids) {
            c.x += p.positions[id].x;
            c.y += p.positions[id].y;
        }
        c.x /= static_cast<double>(k);
        c.y /= static_cast<double>(k);
        p.ris = c;
    } else {
        p.ris = {cfg.ris_x, cfg.ris_y};
    }
    return p;
}

// Channel-strength proxy per user for the clustering features: Euclidean
// norm of the direct row (good) or the RIS-side row (poor).
inline std::vector<double> channel_gains(const NetworkInstance& inst) {
    const std::size_t users = inst.placement.positions.size();
    std::vector<double> g(users, 0.0);
    for (std::size_t k = 0; k < inst.placement.good_ids.size(); ++k) {
        double s = 0.0;
        for (std::size_t a = 0; a < inst.h_au.cols(); ++a) s += std::norm(inst.h_au(k, a));
        g[inst.placement.good_ids[k]] = std::sqrt(s);
    }
    for (std::size_t k = 0; k < inst.placement.poor_ids.size(); ++k) {
        double s = 0.0;
        for (const auto& c : inst.h_ru[k]) s += std::norm(c);
        g[inst.placement.poor_ids[k]] = std::sqrt(s);
    }
    return g;
}

// Reorders the poor-user rows so that row k belongs to the clustermate of
// good user k. Falls back to index order for users the assignment leaves
// unmatched (non-converged automaton).
inline std::vector<std::size_t> pairing_permutation(const Placement& placement,
                                                    const ClusterAssignment& assignment) {
    const std::size_t k = placement.good_ids.size();
    std::vector<std::size_t> perm(k, k);  // k = unset
    std::vector<bool> used(k, false);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t mate = assignment.mate_of(placement.good_ids[i]);
        const auto it = std::find(placement.poor_ids.begin(), placement.poor_ids.end(), mate);
        if (it == placement.poor_ids.end()) continue;
        const std::size_t pi = it - placement.poor_ids.begin();
        if (!used[pi]) {
            perm[i] = pi;
            used[pi] = true;
        }
    }
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (perm[i] != k) continue;
        while (used[cursor]) ++cursor;
        perm[i] = cursor;
        used[cursor] = true;
    }
    return perm;
}

inline NetworkInstance permute_poor(NetworkInstance inst, const std::vector<std::size_t>& perm) {
    NetworkInstance out = inst;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        out.h_ru[i] = inst.h_ru[perm[i]];
        out.noise_var_poor[i] = inst.noise_var_poor[perm[i]];
        out.placement.poor_ids[i] = inst.placement.poor_ids[perm[i]];
    }
    return out;
}

struct SeedSetup {
    Placement placement;
    NetworkInstance instance;  // poor rows already paired to good rows
    std::vector<std::size_t> pairing;
    MomaResult moma;
};

// placement -> channels -> features -> automaton clustering -> paired instance
inline SeedSetup make_setup(const ExperimentConfig& cfg, Rng& rng) {
    SeedSetup s;
    s.placement = cfg.well_separated ? separated_placement(cfg.net, rng)
                                     : place_users(cfg.net, rng);
    NetworkInstance raw = sample_channels(cfg.net, s.placement, rng);
    const FeatureSet features = normalize_features(s.placement.positions, channel_gains(raw));
    s.moma = moma_run(features, s.placement.groups, rng, cfg.moma);
    s.pairing = pairing_permutation(s.placement, s.moma.assignment);
    s.instance = permute_poor(std::move(raw), s.pairing);
    return s;
}

inline PhaseShiftEnv make_env(const ExperimentConfig& cfg, const SeedSetup& setup,
                              double tx_power_dbm) {
    const double rho =
        dbm_to_watt(tx_power_dbm) / static_cast<double>(cfg.net.num_antennas);
    return PhaseShiftEnv(setup.instance, cfg.allocation(), rho, cfg.net.phase_levels);
}

inline TrainOptions train_options(const ExperimentConfig& cfg) {
    TrainOptions o;
    o.episodes = cfg.episodes;
    o.steps_per_episode = cfg.steps_per_episode;
    o.early_stop_patience = cfg.early_stop_patience;
    o.min_episodes = cfg.min_episodes;
    o.converge_window = cfg.converge_window;
    return o;
}

// Trains one agent on one seed cell; handles the per-episode redraw mode.
inline TrainResult run_ddpg_cell(const ExperimentConfig& cfg, const SeedSetup& setup,
                                 PhaseShiftEnv& env, Rng& rng) {
    DdpgAgent agent(cfg.net.num_res, cfg.agent, rng);
    TrainOptions opts = train_options(cfg);
    if (cfg.channel_mode == ChannelMode::PerEpisode) {
        opts.episode_hook = [&cfg, &setup, &env, &rng](std::size_t ep) {
            if (ep == 0) return;  // first episode uses the setup draw
            NetworkInstance fresh = sample_channels(cfg.net, setup.placement, rng);
            env.reset_instance(permute_poor(std::move(fresh), setup.pairing));
        };
    }
    return train(agent, env, opts, rng);
}

// ---- experiments ---------------------------------------------------------

struct ExperimentInfo {
    std::string id;
    std::string description;
};

inline std::vector<ExperimentInfo> list_experiments() {
    return {
        {"fig3", "automaton clustering convergence (mismatches vs iteration) + complexity counts"},
        {"fig4", "DDPG learning curves across phase granularities D"},
        {"fig5", "sum rate vs transmit power: optimal/random/fixed phases across RE counts"},
        {"fig6", "NOMA vs OMA sum rate vs transmit power at per-scheme optimal phases"},
        {"fig7", "DDPG vs random vs fixed phase control at reference parameters"},
        {"fig8", "per-step wall-clock timing of NOMA and OMA rate evaluation"},
    };
}

namespace detail {

inline std::string curve_row(const std::string& experiment, std::uint64_t seed,
                             std::size_t episode, double sum_reward, double sum_rate) {
    return experiment + "," + std::to_string(seed) + "," + std::to_string(episode) + "," +
           csv_num(sum_reward) + "," + csv_num(sum_rate);
}

inline std::string sweep_row(const std::string& experiment, const std::string& scheme,
                             std::size_t num_res, double pt_dbm, const MeanCi& m) {
    return experiment + "," + scheme + "," + std::to_string(num_res) + "," + csv_num(pt_dbm) +
           "," + csv_num(m.mean) + "," + csv_num(m.ci95);
}

constexpr const char* kCurveHeader = "experiment,seed,episode,sum_reward,sum_rate";
constexpr const char* kSweepHeader = "experiment,scheme,num_res,pt_dbm,mean_rate,ci95";

}  // namespace detail

// Clustering convergence: per-query mismatch counts against the exhaustive
// matching, plus automaton-vs-kmeans operation counts.
inline std::vector<std::string> run_fig3(const ExperimentConfig& cfg, const std::string& out) {
    ExperimentConfig c = cfg;
    if (!c.well_separated) c.well_separated = true;  // convergence target must be unambiguous
    std::vector<std::vector<std::string>> mism(c.seeds.size());
    std::vector<std::vector<std::string>> complexity(c.seeds.size());

    parallel_cells(c.seeds.size(), [&](std::size_t i) {
        const std::uint64_t seed = c.seeds[i];
        Rng rng(seed);
        const Placement pl = separated_placement(c.net, rng);
        const NetworkInstance inst = sample_channels(c.net, pl, rng);
        const FeatureSet features = normalize_features(pl.positions, channel_gains(inst));
        const ClusterAssignment oracle = oracle_matching(features, pl.groups);
        std::vector<std::string>& rows = mism[i];
        const auto observer = [&](std::size_t iter, const AutomatonState& st) {
            rows.push_back(std::to_string(seed) + "," + std::to_string(iter) + "," +
                           std::to_string(mismatch_count(st.assignment(), oracle)));
        };
        const MomaResult res = moma_run(features, pl.groups, rng, c.moma, observer);
        const KmeansResult km = kmeans_baseline(features, c.net.num_antennas, rng);
        complexity[i].push_back("moma," + std::to_string(c.net.num_antennas) + "," +
                                std::to_string(seed) + "," + std::to_string(res.queries_used));
        complexity[i].push_back("kmeans," + std::to_string(c.net.num_antennas) + "," +
                                std::to_string(seed) + "," + std::to_string(km.operations));
    });

    std::vector<std::string> rows, crows;
    for (auto& r : mism) rows.insert(rows.end(), r.begin(), r.end());
    for (auto& r : complexity) crows.insert(crows.end(), r.begin(), r.end());
    const std::string p1 = out + "/fig3_clustering.csv";
    const std::string p2 = out + "/fig3_complexity.csv";
    emit_csv(p1, "seed,iteration,mismatches", rows);
    emit_csv(p2, "algorithm,k,seed,operations", crows);
    return {p1, p2};
}

// Learning curves for each phase granularity in d_sweep.
inline std::vector<std::string> run_fig4(const ExperimentConfig& cfg, const std::string& out) {
    struct Cell {
        std::size_t d;
        std::uint64_t seed;
        std::vector<std::string> rows;
    };
    std::vector<Cell> cells;
    for (std::size_t d : cfg.d_sweep)
        for (std::uint64_t s : cfg.seeds) cells.push_back({d, s, {}});

    parallel_cells(cells.size(), [&](std::size_t i) {
        Cell& cell = cells[i];
        ExperimentConfig c = cfg;
        c.net.phase_levels = cell.d;
        Rng rng(cell.seed);
        const SeedSetup setup = make_setup(c, rng);
        PhaseShiftEnv env = make_env(c, setup, c.net.tx_power_dbm);
        const TrainResult tr = run_ddpg_cell(c, setup, env, rng);
        const std::string tag = "fig4-d" + std::to_string(cell.d);
        for (std::size_t ep = 0; ep < tr.episodes_run; ++ep)
            cell.rows.push_back(
                detail::curve_row(tag, cell.seed, ep, tr.sum_reward[ep], tr.final_rate[ep]));
    });

    std::vector<std::string> rows;
    for (auto& c : cells) rows.insert(rows.end(), c.rows.begin(), c.rows.end());
    const std::string p = out + "/fig4_curve.csv";
    emit_csv(p, detail::kCurveHeader, rows);
    return {p};
}

// Power sweep with non-learning phase control at several RE counts.
inline std::vector<std::string> run_fig5(const ExperimentConfig& cfg, const std::string& out) {
    struct Cell {
        std::size_t n;
        std::uint64_t seed;
        std::vector<double> optimal, random_mean, fixed;  // per pt index
        bool have_optimal = false;
    };
    std::vector<Cell> cells;
    for (std::size_t n : cfg.n_sweep)
        for (std::uint64_t s : cfg.seeds) cells.push_back({n, s, {}, {}, {}, false});

    parallel_cells(cells.size(), [&](std::size_t i) {
        Cell& cell = cells[i];
        ExperimentConfig c = cfg;
        c.net.num_res = cell.n;
        Rng rng(cell.seed);
        const SeedSetup setup = make_setup(c, rng);
        std::uint64_t states = 1;
        bool feasible = true;
        for (std::size_t j = 0; j < cell.n && feasible; ++j) {
            states *= c.net.phase_levels - 1;
            feasible = states <= c.enum_guard;
        }
        cell.have_optimal = feasible;
        for (double pt : c.pt_sweep) {
            PhaseShiftEnv env = make_env(c, setup, pt);
            if (feasible) cell.optimal.push_back(exhaustive_search(env, c.enum_guard).rate);
            Rng rng_rand(cell.seed ^ 0x9e3779b9ULL);
            const auto rates = random_phase(env, rng_rand, c.random_slots);
            double m = 0.0;
            for (double r : rates) m += r;
            cell.random_mean.push_back(m / static_cast<double>(rates.size()));
            Rng rng_fixed(cell.seed ^ 0x51ed270bULL);
            cell.fixed.push_back(env.rate_of_state(env.random_state(rng_fixed)));
        }
    });

    std::vector<std::string> rows;
    for (std::size_t ni = 0; ni < cfg.n_sweep.size(); ++ni) {
        const std::size_t n = cfg.n_sweep[ni];
        for (std::size_t pi = 0; pi < cfg.pt_sweep.size(); ++pi) {
            std::vector<double> opt, rnd, fix;
            for (const auto& cell : cells) {
                if (cell.n != n) continue;
                if (cell.have_optimal) opt.push_back(cell.optimal[pi]);
                rnd.push_back(cell.random_mean[pi]);
                fix.push_back(cell.fixed[pi]);
            }
            if (!opt.empty())
                rows.push_back(detail::sweep_row("fig5", "optimal", n, cfg.pt_sweep[pi],
                                                 mean_ci(opt)));
            rows.push_back(detail::sweep_row("fig5", "random", n, cfg.pt_sweep[pi], mean_ci(rnd)));
            rows.push_back(detail::sweep_row("fig5", "fixed", n, cfg.pt_sweep[pi], mean_ci(fix)));
        }
    }
    const std::string p = out + "/fig5_sweep.csv";
    emit_csv(p, detail::kSweepHeader, rows);
    return {p};
}

// NOMA vs OMA, each at its own exhaustively optimal phase configuration.
inline std::vector<std::string> run_fig6(const ExperimentConfig& cfg, const std::string& out) {
    std::vector<std::size_t> ns;
    for (std::size_t n : cfg.n_sweep) {
        std::uint64_t states = 1;
        bool feasible = true;
        for (std::size_t j = 0; j < n && feasible; ++j) {
            states *= cfg.net.phase_levels - 1;
            feasible = states <= cfg.enum_guard;
        }
        if (feasible) ns.push_back(n);
    }
    struct Cell {
        std::size_t n;
        std::uint64_t seed;
        std::vector<double> noma, oma;  // per pt index
    };
    std::vector<Cell> cells;
    for (std::size_t n : ns)
        for (std::uint64_t s : cfg.seeds) cells.push_back({n, s, {}, {}});

    parallel_cells(cells.size(), [&](std::size_t i) {
        Cell& cell = cells[i];
        ExperimentConfig c = cfg;
        c.net.num_res = cell.n;
        Rng rng(cell.seed);
        const SeedSetup setup = make_setup(c, rng);
        for (double pt : c.pt_sweep) {
            PhaseShiftEnv env = make_env(c, setup, pt);
            cell.noma.push_back(exhaustive_search(env, c.enum_guard).rate);
            const auto oma_best = exhaustive_search_over(
                cell.n, c.net.phase_levels,
                [&env](const PhaseConfig& s) { return env.oma_rate_of_state(s); }, c.enum_guard);
            cell.oma.push_back(oma_best.rate);
        }
    });

    std::vector<std::string> rows;
    for (std::size_t n : ns) {
        for (std::size_t pi = 0; pi < cfg.pt_sweep.size(); ++pi) {
            std::vector<double> noma, oma;
            for (const auto& cell : cells) {
                if (cell.n != n) continue;
                noma.push_back(cell.noma[pi]);
                oma.push_back(cell.oma[pi]);
            }
            rows.push_back(detail::sweep_row("fig6", "noma", n, cfg.pt_sweep[pi], mean_ci(noma)));
            rows.push_back(detail::sweep_row("fig6", "oma", n, cfg.pt_sweep[pi], mean_ci(oma)));
        }
    }
    const std::string p = out + "/fig6_sweep.csv";
    emit_csv(p, detail::kSweepHeader, rows);
    return {p};
}

// Learned phase control against the random and frozen baselines.
inline std::vector<std::string> run_fig7(const ExperimentConfig& cfg, const std::string& out) {
    struct Cell {
        std::uint64_t seed;
        std::vector<std::string> curve;
        double ddpg = 0.0, random_mean = 0.0, fixed = 0.0;
    };
    std::vector<Cell> cells;
    for (std::uint64_t s : cfg.seeds) cells.push_back({s, {}, 0.0, 0.0, 0.0});

    parallel_cells(cells.size(), [&](std::size_t i) {
        Cell& cell = cells[i];
        Rng rng(cell.seed);
        const SeedSetup setup = make_setup(cfg, rng);
        PhaseShiftEnv env = make_env(cfg, setup, cfg.net.tx_power_dbm);
        Rng rng_fixed(cell.seed ^ 0x51ed270bULL);
        cell.fixed = env.rate_of_state(env.random_state(rng_fixed));
        Rng rng_rand(cell.seed ^ 0x9e3779b9ULL);
        const auto rates = random_phase(env, rng_rand, cfg.random_slots);
        for (double r : rates) cell.random_mean += r;
        cell.random_mean /= static_cast<double>(rates.size());
        const TrainResult tr = run_ddpg_cell(cfg, setup, env, rng);
        cell.ddpg = tr.converged_rate;
        for (std::size_t ep = 0; ep < tr.episodes_run; ++ep)
            cell.curve.push_back(
                detail::curve_row("fig7", cell.seed, ep, tr.sum_reward[ep], tr.final_rate[ep]));
    });

    std::vector<std::string> curve_rows;
    std::vector<double> ddpg, rnd, fix;
    for (auto& c : cells) {
        curve_rows.insert(curve_rows.end(), c.curve.begin(), c.curve.end());
        ddpg.push_back(c.ddpg);
        rnd.push_back(c.random_mean);
        fix.push_back(c.fixed);
    }
    std::vector<std::string> cmp_rows;
    const std::size_t n = cfg.net.num_res;
    const double pt = cfg.net.tx_power_dbm;
    cmp_rows.push_back(detail::sweep_row("fig7", "ddpg", n, pt, mean_ci(ddpg)));
    cmp_rows.push_back(detail::sweep_row("fig7", "random", n, pt, mean_ci(rnd)));
    cmp_rows.push_back(detail::sweep_row("fig7", "fixed", n, pt, mean_ci(fix)));

    const std::string p1 = out + "/fig7_curve.csv";
    const std::string p2 = out + "/fig7_compare.csv";
    emit_csv(p1, detail::kCurveHeader, curve_rows);
    emit_csv(p2, detail::kSweepHeader, cmp_rows);
    return {p1, p2};
}

// Wall-clock per-step cost of NOMA vs OMA rate evaluation over a random
// phase walk. Timing rows are inherently non-deterministic.
inline std::vector<std::string> run_fig8(const ExperimentConfig& cfg, const std::string& out) {
    Rng rng(cfg.seeds.front());
    const SeedSetup setup = make_setup(cfg, rng);
    PhaseShiftEnv env = make_env(cfg, setup, cfg.net.tx_power_dbm);
    std::vector<std::string> rows;
    for (const char* scheme : {"noma", "oma"}) {
        const bool oma = std::string(scheme) == "oma";
        for (std::size_t steps : cfg.timing_steps) {
            Rng walk_rng(cfg.seeds.front() ^ 0xabcdULL);
            PhaseConfig s = env.random_state(walk_rng);
            volatile double sink = 0.0;
            const auto t0 = std::chrono::steady_clock::now();
            for (std::size_t t = 0; t < steps; ++t) {
                EnvAction a;
                a.re = static_cast<std::size_t>(walk_rng.uniform_int(cfg.net.num_res));
                a.direction = walk_rng.uniform() < 0.5 ? +1 : -1;
                s = PhaseShiftEnv::apply_action(s, a);
                sink = oma ? env.oma_rate_of_state(s) : env.rate_of_state(s);
            }
            const auto t1 = std::chrono::steady_clock::now();
            (void)sink;
            const double secs = std::chrono::duration<double>(t1 - t0).count();
            rows.push_back(std::string(scheme) + "," + std::to_string(steps) + "," +
                           csv_num(secs));
        }
    }
    const std::string p = out + "/fig8_timing.csv";
    emit_csv(p, "scheme,steps,seconds", rows);
    return {p};
}

inline std::vector<std::string> run_experiment(const ExperimentConfig& cfg,
                                               const std::string& experiment,
                                               const std::string& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    if (experiment == "fig3") return run_fig3(cfg, out_dir);
    if (experiment == "fig4") return run_fig4(cfg, out_dir);
    if (experiment == "fig5") return run_fig5(cfg, out_dir);
    if (experiment == "fig6") return run_fig6(cfg, out_dir);
    if (experiment == "fig7") return run_fig7(cfg, out_dir);
    if (experiment == "fig8") return run_fig8(cfg, out_dir);
    throw ConfigError("unknown experiment id: " + experiment);
}

}  // namespace risnoma
