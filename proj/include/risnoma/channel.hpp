#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "risnoma/linalg.hpp"
#include "risnoma/rng.hpp"

namespace risnoma {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Static description of the downlink network. Defaults follow the reference
// parameter set used throughout the experiments.
struct NetworkConfig {
    std::size_t num_antennas = 4;   // K
    std::size_t num_res = 9;        // N, reflecting elements
    std::size_t num_users = 8;      // always 2K
    double bandwidth_hz = 20e6;
    double tx_power_dbm = 20.0;
    double noise_power_dbm = -138.0;
    double side_length_m = 500.0;
    std::size_t phase_levels = 4;   // D; phases idx*pi/D, idx in [1, D-1]

    // log-distance path gain d^-eta, reference distance 1 m
    double eta_ap_user = 3.5;
    double eta_ap_ris = 2.2;
    double eta_ris_user = 2.2;
    double ref_distance_m = 1.0;

    // RIS placement: centroid of the poor-user region unless overridden
    bool ris_auto_place = true;
    double ris_x = 0.0;
    double ris_y = 0.0;

    void validate() const {
        if (num_antennas == 0) throw ConfigError("num_antennas must be positive");
        if (num_users != 2 * num_antennas) throw ConfigError("num_users must equal 2*num_antennas");
        if (phase_levels < 2) throw ConfigError("phase_levels must be >= 2");
        if (num_res == 0) throw ConfigError("num_res must be positive");
        if (!std::isfinite(tx_power_dbm) || !std::isfinite(noise_power_dbm) ||
            !std::isfinite(side_length_m) || side_length_m < 0.0)
            throw ConfigError("powers and side length must be finite");
    }
};

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

struct Point {
    double x = 0.0, y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

enum class UserGroup { Good, Poor };

struct Placement {
    std::vector<Point> positions;      // one per user, user id = index
    std::vector<UserGroup> groups;     // one per user
    std::vector<std::size_t> good_ids; // K user ids, nearest the AP
    std::vector<std::size_t> poor_ids; // K user ids, farthest from the AP
    Point ap;                          // center of the square
    Point ris;                         // resolved RIS coordinate
};

// One set of channel realizations for a fixed placement.
//   h_au: K x K, row k = direct channel of good user k
//   h_ar: N x K, AP -> RIS
//   h_ru: K rows of length N, RIS -> poor user k (poor users have no direct link)
struct NetworkInstance {
    Placement placement;
    CMat h_au;
    CMat h_ar;
    std::vector<std::vector<Cx>> h_ru;
    std::vector<double> noise_var_good;  // per good-user index
    std::vector<double> noise_var_poor;  // per poor-user index
};

inline double path_gain(double d, double eta, double ref = 1.0) {
    const double dd = std::max(d, ref);
    return std::pow(dd, -eta);
}

// Uniform placement in the square, AP at the center; the K users nearest the
// AP form the good group, the K farthest the poor group.
inline Placement place_users(const NetworkConfig& cfg, Rng& rng) {
    cfg.validate();
    Placement p;
    p.ap = {0.0, 0.0};
    const double half = cfg.side_length_m / 2.0;
    p.positions.resize(cfg.num_users);
    for (auto& pos : p.positions) {
        pos.x = rng.uniform(-half, half);
        pos.y = rng.uniform(-half, half);
    }
    std::vector<std::size_t> order(cfg.num_users);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return distance(p.positions[a], p.ap) < distance(p.positions[b], p.ap);
    });
    p.groups.assign(cfg.num_users, UserGroup::Poor);
    for (std::size_t r = 0; r < cfg.num_users; ++r) {
        if (r < cfg.num_antennas) {
            p.groups[order[r]] = UserGroup::Good;
            p.good_ids.push_back(order[r]);
        } else {
            p.poor_ids.push_back(order[r]);
        }
    }
    std::sort(p.good_ids.begin(), p.good_ids.end());
    std::sort(p.poor_ids.begin(), p.poor_ids.end());

    if (cfg.ris_auto_place) {
        Point c{0.0, 0.0};
        for (auto id : p.poor_ids) {
            c.x += p.positions[id].x;
            c.y += p.positions[id].y;
        }
        c.x /= static_cast<double>(p.poor_ids.size());
        c.y /= static_cast<double>(p.poor_ids.size());
        p.ris = c;
    } else {
        p.ris = {cfg.ris_x, cfg.ris_y};
    }
    return p;
}

// Rayleigh small-scale fading scaled by sqrt of the log-distance path gain.
// Draw order is fixed (h_au row-major, then h_ar, then h_ru per poor user)
// so a seed pins every coefficient. An ill-conditioned direct-channel draw
// (cond >= 1e12, measure-zero for Rayleigh) is redrawn.
inline NetworkInstance sample_channels(const NetworkConfig& cfg, const Placement& placement,
                                       Rng& rng) {
    const std::size_t k = cfg.num_antennas;
    const std::size_t n = cfg.num_res;
    NetworkInstance inst;
    inst.placement = placement;

    for (int attempt = 0;; ++attempt) {
        inst.h_au = CMat(k, k);
        for (std::size_t u = 0; u < k; ++u) {
            const double d = distance(placement.positions[placement.good_ids[u]], placement.ap);
            const double g = path_gain(d, cfg.eta_ap_user, cfg.ref_distance_m);
            const double amp = std::sqrt(g);
            for (std::size_t a = 0; a < k; ++a) inst.h_au(u, a) = amp * sample_cn(rng, 1.0);
        }
        try {
            invert(inst.h_au);
            break;
        } catch (const SingularMatrixError&) {
            if (attempt > 64) throw;  // statistically unreachable
        }
    }

    const double d_ar = distance(placement.ap, placement.ris);
    const double amp_ar = std::sqrt(path_gain(d_ar, cfg.eta_ap_ris, cfg.ref_distance_m));
    inst.h_ar = CMat(n, k);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t a = 0; a < k; ++a) inst.h_ar(r, a) = amp_ar * sample_cn(rng, 1.0);

    inst.h_ru.resize(k);
    for (std::size_t u = 0; u < k; ++u) {
        const double d = distance(placement.positions[placement.poor_ids[u]], placement.ris);
        const double amp = std::sqrt(path_gain(d, cfg.eta_ris_user, cfg.ref_distance_m));
        inst.h_ru[u].resize(n);
        for (std::size_t r = 0; r < n; ++r) inst.h_ru[u][r] = amp * sample_cn(rng, 1.0);
    }

    const double nv = dbm_to_watt(cfg.noise_power_dbm);
    inst.noise_var_good.assign(k, nv);
    inst.noise_var_poor.assign(k, nv);
    return inst;
}

// Diagonal RIS reflection coefficients, unit amplitude.
struct PhaseConfig {
    std::vector<std::size_t> idx;  // per RE, in [1, D-1]
    std::size_t levels = 4;        // D

    double theta(std::size_t re) const {
        return static_cast<double>(idx[re]) * M_PI / static_cast<double>(levels);
    }
    Cx coeff(std::size_t re) const { return std::polar(1.0, theta(re)); }

    bool operator==(const PhaseConfig& o) const { return levels == o.levels && idx == o.idx; }
};

// Cascade h_ru . diag(q) . h_ar for one poor user, as a 1 x K row.
inline std::vector<Cx> composite_channel(const NetworkInstance& inst, const PhaseConfig& q,
                                         std::size_t poor_index) {
    if (poor_index >= inst.h_ru.size())
        throw std::out_of_range("composite_channel: poor user index out of range");
    const std::size_t n = inst.h_ar.rows();
    const std::size_t k = inst.h_ar.cols();
    std::vector<Cx> row(k, Cx{});
    for (std::size_t r = 0; r < n; ++r) {
        const Cx w = inst.h_ru[poor_index][r] * q.coeff(r);
        for (std::size_t a = 0; a < k; ++a) row[a] += w * inst.h_ar(r, a);
    }
    return row;
}

// ---- plain-text instance dump (golden-fixture format) ----
//
//   risnoma-instance 1
//   k <K> n <N>
//   ap <x> <y>
//   ris <x> <y>
//   user <x> <y> <good|poor>     (2K lines, user id order)
//   h_au / h_ar / h_ru sections: one row per line, entries as "re im"
//   noise <good...> <poor...>

namespace detail {
inline void put(std::FILE* f, double v) { std::fprintf(f, " %.17g", v); }
}  // namespace detail

inline void dump_instance(const NetworkInstance& inst, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("dump_instance: cannot open " + path);
    const std::size_t k = inst.h_au.rows();
    const std::size_t n = inst.h_ar.rows();
    std::fprintf(f, "risnoma-instance 1\n");
    std::fprintf(f, "k %zu n %zu\n", k, n);
    std::fprintf(f, "ap %.17g %.17g\n", inst.placement.ap.x, inst.placement.ap.y);
    std::fprintf(f, "ris %.17g %.17g\n", inst.placement.ris.x, inst.placement.ris.y);
    for (std::size_t u = 0; u < inst.placement.positions.size(); ++u)
        std::fprintf(f, "user %.17g %.17g %s\n", inst.placement.positions[u].x,
                     inst.placement.positions[u].y,
                     inst.placement.groups[u] == UserGroup::Good ? "good" : "poor");
    std::fprintf(f, "h_au\n");
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            detail::put(f, inst.h_au(i, j).real());
            detail::put(f, inst.h_au(i, j).imag());
        }
        std::fprintf(f, "\n");
    }
    std::fprintf(f, "h_ar\n");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            detail::put(f, inst.h_ar(i, j).real());
            detail::put(f, inst.h_ar(i, j).imag());
        }
        std::fprintf(f, "\n");
    }
    std::fprintf(f, "h_ru\n");
    for (std::size_t u = 0; u < k; ++u) {
        for (std::size_t r = 0; r < n; ++r) {
            detail::put(f, inst.h_ru[u][r].real());
            detail::put(f, inst.h_ru[u][r].imag());
        }
        std::fprintf(f, "\n");
    }
    std::fprintf(f, "noise\n");
    for (double v : inst.noise_var_good) detail::put(f, v);
    std::fprintf(f, "\n");
    for (double v : inst.noise_var_poor) detail::put(f, v);
    std::fprintf(f, "\n");
    std::fclose(f);
}

inline NetworkInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_instance: cannot open " + path);
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "risnoma-instance" || version != 1)
        throw std::runtime_error("load_instance: bad header in " + path);
    NetworkInstance inst;
    std::size_t k = 0, n = 0;
    in >> tag >> k >> tag >> n;
    in >> tag >> inst.placement.ap.x >> inst.placement.ap.y;
    in >> tag >> inst.placement.ris.x >> inst.placement.ris.y;
    for (std::size_t u = 0; u < 2 * k; ++u) {
        Point p;
        std::string grp;
        in >> tag >> p.x >> p.y >> grp;
        inst.placement.positions.push_back(p);
        const bool good = grp == "good";
        inst.placement.groups.push_back(good ? UserGroup::Good : UserGroup::Poor);
        (good ? inst.placement.good_ids : inst.placement.poor_ids).push_back(u);
    }
    auto read_mat = [&](std::size_t rows, std::size_t cols) {
        CMat m(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) {
                double re = 0.0, im = 0.0;
                in >> re >> im;
                m(i, j) = {re, im};
            }
        return m;
    };
    in >> tag;  // h_au
    inst.h_au = read_mat(k, k);
    in >> tag;  // h_ar
    inst.h_ar = read_mat(n, k);
    in >> tag;  // h_ru
    inst.h_ru.resize(k);
    for (std::size_t u = 0; u < k; ++u) {
        inst.h_ru[u].resize(n);
        for (std::size_t r = 0; r < n; ++r) {
            double re = 0.0, im = 0.0;
            in >> re >> im;
            inst.h_ru[u][r] = {re, im};
        }
    }
    in >> tag;  // noise
    inst.noise_var_good.resize(k);
    inst.noise_var_poor.resize(k);
    for (auto& v : inst.noise_var_good) in >> v;
    for (auto& v : inst.noise_var_poor) in >> v;
    if (!in) throw std::runtime_error("load_instance: truncated file " + path);
    return inst;
}

}  // namespace risnoma
