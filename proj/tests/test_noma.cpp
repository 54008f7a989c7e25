#include <catch2/catch_amalgamated.hpp>

#include "risnoma/noma.hpp"

using namespace risnoma;

namespace {

double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

NetworkInstance random_instance(Rng& rng, std::size_t k = 4, std::size_t n = 9) {
    NetworkConfig cfg;
    cfg.num_antennas = k;
    cfg.num_users = 2 * k;
    cfg.num_res = n;
    const Placement p = place_users(cfg, rng);
    return sample_channels(cfg, p, rng);
}

PhaseConfig random_phases(Rng& rng, std::size_t n, std::size_t d = 4) {
    PhaseConfig q;
    q.levels = d;
    q.idx.resize(n);
    for (auto& v : q.idx) v = 1 + rng.uniform_int(d - 1);
    return q;
}

// Oracle route: full matrix products instead of per-user dot loops.
double sinr_good_oracle(const NetworkInstance& inst, const Precoder& pre,
                        const PowerAllocation& alloc, double rho, std::size_t k) {
    const CMat eff = matmul(inst.h_au, pre.p);  // row k = user k through every column
    const std::size_t nk = eff.cols();
    double interference = 0.0;
    for (std::size_t i = 0; i < nk; ++i)
        if (i != k) interference += rho * std::norm(eff(k, i));
    return rho * std::norm(eff(k, k)) * alloc.good(k) /
           (interference + inst.noise_var_good[k]);
}

double sinr_poor_oracle(const NetworkInstance& inst, const PhaseConfig& q, const Precoder& pre,
                        const PowerAllocation& alloc, double rho, std::size_t k) {
    const std::size_t n = inst.h_ar.rows();
    CMat hru(1, n);
    for (std::size_t r = 0; r < n; ++r) hru(0, r) = inst.h_ru[k][r];
    CMat qm(n, n);
    for (std::size_t r = 0; r < n; ++r) qm(r, r) = q.coeff(r);
    const CMat eff = matmul(matmul(matmul(hru, qm), inst.h_ar), pre.p);  // 1 x K
    const std::size_t nk = eff.cols();
    const double own = rho * std::norm(eff(0, k));
    double interference = 0.0;
    for (std::size_t i = 0; i < nk; ++i)
        if (i != k) interference += rho * std::norm(eff(0, i));
    return own * alloc.poor(k) / (own * alloc.good(k) + interference + inst.noise_var_poor[k]);
}

// K x K instance with a diagonal cascade: |g_k p_k|^2 = c^2, no cross terms.
NetworkInstance diagonal_instance(std::size_t k, double cascade_amp, double noise) {
    NetworkInstance inst;
    inst.h_au = CMat::identity(k);
    inst.h_ar = CMat::identity(k);  // N = K
    inst.h_ru.resize(k);
    for (std::size_t u = 0; u < k; ++u) {
        inst.h_ru[u].assign(k, Cx{});
        inst.h_ru[u][u] = cascade_amp;
    }
    inst.noise_var_good.assign(k, noise);
    inst.noise_var_poor.assign(k, noise);
    return inst;
}

}  // namespace

TEST_CASE("zero-forcing on identity and scaled identity") {
    const Precoder p1 = zf_precode(CMat::identity(4));
    CHECK(max_abs_diff(p1.p, CMat::identity(4)) < 1e-12);

    CMat two = CMat::identity(4);
    for (auto& v : two.data()) v *= 2.0;
    const Precoder p2 = zf_precode(two);
    CMat half = CMat::identity(4);
    for (auto& v : half.data()) v *= 0.5;
    CHECK(max_abs_diff(p2.p, half) < 1e-12);
}

TEST_CASE("zero-forcing inverts random channels") {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        CMat h(4, 4);
        for (auto& v : h.data()) v = sample_cn(rng, 1.0);
        const Precoder p = zf_precode(h);
        CHECK(max_abs_diff(matmul(h, p.p), CMat::identity(4)) < 1e-9);
    }
}

TEST_CASE("good-user SINR direct formula value") {
    NetworkInstance inst = diagonal_instance(1, 1.0, 0.1);
    const Precoder pre = zf_precode(inst.h_au);
    const PowerAllocation alloc = PowerAllocation::uniform(1, 0.5, 0.5);
    CHECK(sinr_good(inst, pre, alloc, 1.0, 0) == Catch::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("zero power share silences a user") {
    Rng rng(2);
    const NetworkInstance inst = random_instance(rng);
    const Precoder pre = zf_precode(inst.h_au);
    const PhaseConfig q = random_phases(rng, 9);
    const PowerAllocation none_good = PowerAllocation::uniform(4, 0.0, 1.0);
    const PowerAllocation none_poor = PowerAllocation::uniform(4, 1.0, 0.0);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(sinr_good(inst, pre, none_good, 2.0, k) == 0.0);
        CHECK(sinr_poor(inst, q, pre, none_poor, 2.0, k) == 0.0);
    }
}

TEST_CASE("single-cluster poor SINR collapses to the scalar formula") {
    const double c = 0.7, noise = 0.05, rho = 1.3;
    NetworkInstance inst = diagonal_instance(1, c, noise);
    const Precoder pre = zf_precode(inst.h_au);
    const PowerAllocation alloc = PowerAllocation::uniform(1, 0.2, 0.8);
    PhaseConfig q;
    q.levels = 4;
    q.idx = {2};
    const double s = rho * c * c;
    const double expected = s * 0.8 / (s * 0.2 + noise);
    CHECK(rel_diff(sinr_poor(inst, q, pre, alloc, rho, 0), expected) < 1e-12);
}

TEST_CASE("SINR implementations match the matrix-route oracle") {
    Rng rng(3);
    const PowerAllocation alloc = PowerAllocation::uniform(4, 0.2, 0.8);
    for (int trial = 0; trial < 50; ++trial) {
        const NetworkInstance inst = random_instance(rng);
        const Precoder pre = zf_precode(inst.h_au);
        const PhaseConfig q = random_phases(rng, 9);
        const double rho = rng.uniform(0.1, 10.0);
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(rel_diff(sinr_good(inst, pre, alloc, rho, k),
                           sinr_good_oracle(inst, pre, alloc, rho, k)) < 1e-12);
            CHECK(rel_diff(sinr_poor(inst, q, pre, alloc, rho, k),
                           sinr_poor_oracle(inst, q, pre, alloc, rho, k)) < 1e-12);
        }
    }
}

TEST_CASE("engineered instance yields unit SINR everywhere") {
    // direct channel identity, diagonal cascade with power 1/3, alpha 0.2/0.8,
    // noise 0.2: every SINR is exactly 1, every rate 1, sum 2K
    const double c = 1.0 / std::sqrt(3.0);
    NetworkInstance inst = diagonal_instance(4, c, 0.2);
    const Precoder pre = zf_precode(inst.h_au);
    const PowerAllocation alloc = PowerAllocation::uniform(4, 0.2, 0.8);
    PhaseConfig q;
    q.levels = 4;
    q.idx = {1, 2, 3, 2};
    const RateReport rep = sum_rate(inst, q, pre, alloc, 1.0);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(rep.sinr_good[k] == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(rep.sinr_poor[k] == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(rep.rate_good[k] == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(rep.rate_poor[k] == Catch::Approx(1.0).epsilon(1e-12));
    }
    CHECK(rep.sum_rate == Catch::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("sum_rate recomposes from per-user SINRs") {
    Rng rng(4);
    const PowerAllocation alloc = PowerAllocation::uniform(4, 0.2, 0.8);
    const NetworkInstance inst = random_instance(rng);
    const Precoder pre = zf_precode(inst.h_au);
    const PhaseConfig q = random_phases(rng, 9);
    const RateReport rep = sum_rate(inst, q, pre, alloc, 0.7);
    double total = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        total += std::log2(1.0 + sinr_good(inst, pre, alloc, 0.7, k));
        total += std::log2(1.0 + sinr_poor(inst, q, pre, alloc, 0.7, k));
    }
    CHECK(rel_diff(rep.sum_rate, total) < 1e-12);
}

TEST_CASE("SIC feasibility equals the direct rate inequality") {
    Rng rng(5);
    const PowerAllocation alloc = PowerAllocation::uniform(4, 0.2, 0.8);
    for (int trial = 0; trial < 25; ++trial) {
        const NetworkInstance inst = random_instance(rng);
        const Precoder pre = zf_precode(inst.h_au);
        const PhaseConfig q = random_phases(rng, 9);
        const double rho = rng.uniform(0.1, 5.0);
        for (std::size_t k = 0; k < 4; ++k) {
            const CMat eff = matmul(inst.h_au, pre.p);
            double interf = 0.0;
            for (std::size_t i = 0; i < 4; ++i)
                if (i != k) interf += rho * std::norm(eff(k, i));
            const double own = rho * std::norm(eff(k, k));
            const double r_at_good =
                std::log2(1.0 + own * alloc.poor(k) /
                                    (own * alloc.good(k) + interf + inst.noise_var_good[k]));
            const double r_at_poor = std::log2(1.0 + sinr_poor(inst, q, pre, alloc, rho, k));
            CHECK(sic_check(inst, q, pre, alloc, rho, k) == (r_at_good >= r_at_poor));
        }
    }
}

TEST_CASE("SIC trivially feasible with zero poor share") {
    Rng rng(6);
    const NetworkInstance inst = random_instance(rng);
    const Precoder pre = zf_precode(inst.h_au);
    const PhaseConfig q = random_phases(rng, 9);
    const PowerAllocation alloc = PowerAllocation::uniform(4, 1.0, 0.0);
    for (std::size_t k = 0; k < 4; ++k) CHECK(sic_check(inst, q, pre, alloc, 1.0, k));
}

TEST_CASE("OMA halves the slot at full cluster power") {
    // SNR 3 for both users in the cluster -> each rate log2(4)/2 = 1
    NetworkInstance inst = diagonal_instance(1, 1.0, 1.0 / 3.0);
    const Precoder pre = zf_precode(inst.h_au);
    PhaseConfig q;
    q.levels = 4;
    q.idx = {1};
    const RateReport rep = oma_sum_rate(inst, q, pre, 1.0);
    CHECK(rep.rate_good[0] == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(rep.rate_poor[0] == Catch::Approx(1.0).epsilon(1e-12));

    // zero cascade -> zero poor rate
    NetworkInstance blocked = diagonal_instance(1, 0.0, 1.0 / 3.0);
    const RateReport rep2 = oma_sum_rate(blocked, q, zf_precode(blocked.h_au), 1.0);
    CHECK(rep2.rate_poor[0] == 0.0);
}

TEST_CASE("NOMA beats equal-time OMA on the reference geometry") {
    Rng rng(7);
    const PowerAllocation alloc = PowerAllocation::uniform(4, 0.2, 0.8);
    const double rho = dbm_to_watt(20.0) / 4.0;
    int wins = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const NetworkInstance inst = random_instance(rng);
        const Precoder pre = zf_precode(inst.h_au);
        const PhaseConfig q = random_phases(rng, 9);
        if (sum_rate(inst, q, pre, alloc, rho).sum_rate >
            oma_sum_rate(inst, q, pre, rho).sum_rate)
            ++wins;
    }
    CHECK(wins >= 19);
}

TEST_CASE("sum rate grows with transmit power") {
    Rng rng(8);
    const PowerAllocation alloc = PowerAllocation::uniform(4, 0.2, 0.8);
    const NetworkInstance inst = random_instance(rng);
    const Precoder pre = zf_precode(inst.h_au);
    const PhaseConfig q = random_phases(rng, 9);
    double prev = -1.0;
    for (double rho : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        const double r = sum_rate(inst, q, pre, alloc, rho).sum_rate;
        CHECK(r >= prev);
        prev = r;
    }
}

TEST_CASE("common unit-modulus channel rotation leaves SINRs unchanged") {
    Rng rng(9);
    NetworkInstance inst = random_instance(rng);
    const PhaseConfig q = random_phases(rng, 9);
    const PowerAllocation alloc = PowerAllocation::uniform(4, 0.2, 0.8);
    const Precoder pre = zf_precode(inst.h_au);

    const Cx rot = std::polar(1.0, 1.234);
    NetworkInstance rotated = inst;
    for (auto& v : rotated.h_au.data()) v *= rot;
    for (auto& v : rotated.h_ar.data()) v *= rot;
    for (auto& row : rotated.h_ru)
        for (auto& v : row) v *= rot;
    const Precoder pre_rot = zf_precode(rotated.h_au);

    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(rel_diff(sinr_good(inst, pre, alloc, 1.0, k),
                       sinr_good(rotated, pre_rot, alloc, 1.0, k)) < 1e-9);
        CHECK(rel_diff(sinr_poor(inst, q, pre, alloc, 1.0, k),
                       sinr_poor(rotated, q, pre_rot, alloc, 1.0, k)) < 1e-9);
    }
}

TEST_CASE("infinite noise drives every SINR to zero") {
    Rng rng(10);
    NetworkInstance inst = random_instance(rng);
    inst.noise_var_good.assign(4, 1e300);
    inst.noise_var_poor.assign(4, 1e300);
    const Precoder pre = zf_precode(inst.h_au);
    const PhaseConfig q = random_phases(rng, 9);
    const PowerAllocation alloc = PowerAllocation::uniform(4, 0.2, 0.8);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(sinr_good(inst, pre, alloc, 1.0, k) < 1e-250);
        CHECK(sinr_poor(inst, q, pre, alloc, 1.0, k) < 1e-250);
    }
}

TEST_CASE("dBm conversion reference points") {
    CHECK(dbm_to_watt(30.0) == Catch::Approx(1.0));
    CHECK(dbm_to_watt(0.0) == Catch::Approx(1e-3));
    CHECK(dbm_to_watt(20.0) == Catch::Approx(0.1));
}
