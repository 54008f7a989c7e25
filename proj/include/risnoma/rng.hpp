#pragma once

#include <complex>
#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace risnoma {

// Seeded xoshiro256++ generator (seeded through splitmix64), used everywhere
// a random draw is needed. Identical seed => identical stream on every
// platform; none of the distribution code below goes through <random>, whose
// output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            // splitmix64
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, bound), unbiased (Lemire)
    std::uint64_t uniform_int(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("uniform_int: bound must be positive");
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // two independent N(0,1) draws (Box-Muller)
    std::pair<double, double> normal_pair() {
        const double u1 = 1.0 - uniform();  // (0,1], keeps log() finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    double normal() { return normal_pair().first; }
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // in-place Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_int(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4]{};
};

// Circularly-symmetric complex Gaussian CN(0, variance): real and imaginary
// parts are each N(0, variance/2).
inline std::complex<double> sample_cn(Rng& rng, double variance) {
    if (variance < 0.0) throw std::invalid_argument("sample_cn: variance must be >= 0");
    if (variance == 0.0) return {0.0, 0.0};
    const double s = std::sqrt(variance * 0.5);
    auto [a, b] = rng.normal_pair();
    return {s * a, s * b};
}

}  // namespace risnoma
