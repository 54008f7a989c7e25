#pragma once

#include <cmath>
#include <vector>

#include "risnoma/channel.hpp"
#include "risnoma/linalg.hpp"

namespace risnoma {

// Per-cluster power split. The poor user gets the larger share.
struct PowerAllocation {
    std::vector<std::pair<double, double>> alpha;  // (good, poor) per cluster

    static PowerAllocation uniform(std::size_t clusters, double good = 0.2, double poor = 0.8) {
        PowerAllocation a;
        a.alpha.assign(clusters, {good, poor});
        return a;
    }
    double good(std::size_t k) const { return alpha[k].first; }
    double poor(std::size_t k) const { return alpha[k].second; }
};

struct Precoder {
    CMat p;  // K x K, column k serves cluster k
};

// Zero-forcing: with H the conjugate-transposed stack of the good users'
// row channels, P = H (H^H H)^-1 inverts the direct channel, so h_au * P = I.
inline Precoder zf_precode(const CMat& h_au) {
    const CMat h = conj_transpose(h_au);
    const CMat gram = matmul(conj_transpose(h), h);
    return Precoder{matmul(h, invert(gram))};
}

inline Cx row_dot(const std::vector<Cx>& row, const CMat& m, std::size_t col) {
    Cx acc{};
    for (std::size_t i = 0; i < row.size(); ++i) acc += row[i] * m(i, col);
    return acc;
}

// SINR of the good user in cluster k: own signal carries alpha_good, the
// residual inter-cluster leakage carries full cluster power.
inline double sinr_good(const NetworkInstance& inst, const Precoder& pre,
                        const PowerAllocation& alloc, double rho, std::size_t k) {
    const std::size_t nk = inst.h_au.rows();
    std::vector<Cx> h(nk);
    for (std::size_t a = 0; a < nk; ++a) h[a] = inst.h_au(k, a);
    double interference = 0.0;
    for (std::size_t i = 0; i < nk; ++i) {
        if (i == k) continue;
        interference += rho * std::norm(row_dot(h, pre.p, i));
    }
    const double own = rho * std::norm(row_dot(h, pre.p, k)) * alloc.good(k);
    return own / (interference + inst.noise_var_good[k]);
}

// SINR of the poor user in cluster k through the RIS cascade; the good
// user's share of the own-cluster signal stays in the denominator (decoded
// last under the fixed order).
inline double sinr_poor(const NetworkInstance& inst, const PhaseConfig& q, const Precoder& pre,
                        const PowerAllocation& alloc, double rho, std::size_t k) {
    const std::vector<Cx> g = composite_channel(inst, q, k);
    const std::size_t nk = inst.h_au.rows();
    const double own_power = rho * std::norm(row_dot(g, pre.p, k));
    double interference = 0.0;
    for (std::size_t i = 0; i < nk; ++i) {
        if (i == k) continue;
        interference += rho * std::norm(row_dot(g, pre.p, i));
    }
    return own_power * alloc.poor(k) /
           (own_power * alloc.good(k) + interference + inst.noise_var_poor[k]);
}

struct RateReport {
    std::vector<double> sinr_good;   // per cluster
    std::vector<double> sinr_poor;   // per cluster
    std::vector<double> rate_good;   // bits/s/Hz
    std::vector<double> rate_poor;
    std::vector<bool> sic_feasible;  // per cluster
    double sum_rate = 0.0;
};

inline double rate_of(double sinr) { return std::log2(1.0 + sinr); }

// Per-cluster SIC feasibility: the good user must decode the poor user's
// message at least as fast as the poor user itself does.
inline bool sic_check(const NetworkInstance& inst, const PhaseConfig& q, const Precoder& pre,
                      const PowerAllocation& alloc, double rho, std::size_t k) {
    const std::size_t nk = inst.h_au.rows();
    std::vector<Cx> h(nk);
    for (std::size_t a = 0; a < nk; ++a) h[a] = inst.h_au(k, a);
    const double own = rho * std::norm(row_dot(h, pre.p, k));
    double interference = 0.0;
    for (std::size_t i = 0; i < nk; ++i) {
        if (i == k) continue;
        interference += rho * std::norm(row_dot(h, pre.p, i));
    }
    const double sinr_poor_at_good =
        own * alloc.poor(k) / (own * alloc.good(k) + interference + inst.noise_var_good[k]);
    const double r_poor_at_good = rate_of(sinr_poor_at_good);
    const double r_poor_at_poor = rate_of(sinr_poor(inst, q, pre, alloc, rho, k));
    return r_poor_at_good >= r_poor_at_poor;
}

// All 2K rates for one time slot. rho is the per-cluster transmit power.
inline RateReport sum_rate(const NetworkInstance& inst, const PhaseConfig& q, const Precoder& pre,
                           const PowerAllocation& alloc, double rho) {
    const std::size_t k = inst.h_au.rows();
    RateReport rep;
    rep.sinr_good.resize(k);
    rep.sinr_poor.resize(k);
    rep.rate_good.resize(k);
    rep.rate_poor.resize(k);
    rep.sic_feasible.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        rep.sinr_good[c] = sinr_good(inst, pre, alloc, rho, c);
        rep.sinr_poor[c] = sinr_poor(inst, q, pre, alloc, rho, c);
        rep.rate_good[c] = rate_of(rep.sinr_good[c]);
        rep.rate_poor[c] = rate_of(rep.sinr_poor[c]);
        rep.sic_feasible[c] = sic_check(inst, q, pre, alloc, rho, c);
        rep.sum_rate += rep.rate_good[c] + rep.rate_poor[c];
    }
    return rep;
}

// Equal-time TDMA baseline: each user gets half the slot with the full
// cluster power and no intra-cluster interference; inter-cluster leakage
// stays.
inline RateReport oma_sum_rate(const NetworkInstance& inst, const PhaseConfig& q,
                               const Precoder& pre, double rho) {
    const std::size_t k = inst.h_au.rows();
    RateReport rep;
    rep.sinr_good.resize(k);
    rep.sinr_poor.resize(k);
    rep.rate_good.resize(k);
    rep.rate_poor.resize(k);
    rep.sic_feasible.assign(k, true);
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<Cx> h(k);
        for (std::size_t a = 0; a < k; ++a) h[a] = inst.h_au(c, a);
        double interf_good = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            if (i != c) interf_good += rho * std::norm(row_dot(h, pre.p, i));
        rep.sinr_good[c] =
            rho * std::norm(row_dot(h, pre.p, c)) / (interf_good + inst.noise_var_good[c]);

        const std::vector<Cx> g = composite_channel(inst, q, c);
        double interf_poor = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            if (i != c) interf_poor += rho * std::norm(row_dot(g, pre.p, i));
        rep.sinr_poor[c] =
            rho * std::norm(row_dot(g, pre.p, c)) / (interf_poor + inst.noise_var_poor[c]);

        rep.rate_good[c] = 0.5 * rate_of(rep.sinr_good[c]);
        rep.rate_poor[c] = 0.5 * rate_of(rep.sinr_poor[c]);
        rep.sum_rate += rep.rate_good[c] + rep.rate_poor[c];
    }
    return rep;
}

}  // namespace risnoma
