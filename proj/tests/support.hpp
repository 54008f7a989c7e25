#pragma once

// Shared helpers for the test suites; not part of the library proper.

#include <cmath>
#include <vector>

#include "risnoma/clustering.hpp"
#include "risnoma/rng.hpp"

namespace testsupport {

struct SyntheticClusters {
    risnoma::FeatureSet features;
    std::vector<risnoma::UserGroup> groups;  // user 2j = good, 2j+1 = poor of pair j
};

// K tight good/poor pairs with centers strung on a line at constant spacing,
// so neighbor separation (and with it the query quality) does not depend on
// K. Inter-pair distance is >= 7x the intra-pair spread, so the minimum-
// distance matching is unambiguous.
inline SyntheticClusters separated_features(std::size_t k, risnoma::Rng& rng) {
    SyntheticClusters out;
    const double spacing = 3.0;
    const double jitter = 0.1;  // intra-pair diameter <= ~0.35
    out.features.rows.resize(2 * k);
    out.groups.resize(2 * k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::array<double, 3> center{spacing * static_cast<double>(j),
                                           rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
        for (int m = 0; m < 2; ++m) {
            std::array<double, 3> p = center;
            for (auto& v : p) v += rng.uniform(-jitter, jitter);
            out.features.rows[2 * j + m] = p;
            out.groups[2 * j + m] = m == 0 ? risnoma::UserGroup::Good : risnoma::UserGroup::Poor;
        }
    }
    return out;
}

}  // namespace testsupport
