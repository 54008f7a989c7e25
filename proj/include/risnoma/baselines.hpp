#pragma once

#include <cstdint>
#include <vector>

#include "risnoma/errors.hpp"
#include "risnoma/rlenv.hpp"
#include "risnoma/rng.hpp"

namespace risnoma {

// Fresh uniform phase configuration every slot.
inline std::vector<double> random_phase(const PhaseShiftEnv& env, Rng& rng, std::size_t slots) {
    std::vector<double> rates(slots);
    for (auto& r : rates) r = env.rate_of_state(env.random_state(rng));
    return rates;
}

// Phases frozen at the episode's initial state.
inline std::vector<double> fixed_phase(const PhaseShiftEnv& env, const PhaseConfig& initial,
                                       std::size_t slots) {
    return std::vector<double>(slots, env.rate_of_state(initial));
}

struct ExhaustiveResult {
    PhaseConfig best;
    double rate = 0.0;
    std::uint64_t evaluated = 0;
};

// Global argmax of rate_fn over all (D-1)^N index vectors. States are
// visited in lexicographic order (last element least significant) and only
// strict improvements are kept, so ties resolve to the smallest vector. The
// guard bounds the enumeration size.
template <typename RateFn>
ExhaustiveResult exhaustive_search_over(std::size_t n_res, std::size_t levels, RateFn&& rate_fn,
                                        std::uint64_t guard = 1000000) {
    const std::uint64_t base = levels - 1;
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < n_res; ++i) {
        count *= base;
        if (count > guard)
            throw ComplexityGuardError("exhaustive_search: state space exceeds guard");
    }

    PhaseConfig s;
    s.levels = levels;
    s.idx.assign(n_res, 1);
    ExhaustiveResult res;
    res.best = s;
    res.rate = rate_fn(s);
    res.evaluated = 1;
    while (true) {
        std::size_t advanced = n_res;
        for (std::size_t pos = n_res; pos-- > 0;) {
            if (s.idx[pos] < base) {
                ++s.idx[pos];
                advanced = pos;
                break;
            }
            s.idx[pos] = 1;
        }
        if (advanced == n_res) break;
        const double r = rate_fn(s);
        ++res.evaluated;
        if (r > res.rate) {
            res.rate = r;
            res.best = s;
        }
    }
    return res;
}

inline ExhaustiveResult exhaustive_search(const PhaseShiftEnv& env,
                                          std::uint64_t guard = 1000000) {
    return exhaustive_search_over(
        env.num_res(), env.phase_levels(),
        [&env](const PhaseConfig& s) { return env.rate_of_state(s); }, guard);
}

}  // namespace risnoma
