#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "risnoma/channel.hpp"
#include "risnoma/errors.hpp"
#include "risnoma/rng.hpp"

namespace risnoma {

// Zero-mean normalized (x', y', g') rows, one per user. A dimension whose
// population std is zero carries no information and is dropped from the
// distance (active[d] = false).
struct FeatureSet {
    std::vector<std::array<double, 3>> rows;
    std::array<bool, 3> active{true, true, true};

    std::size_t size() const { return rows.size(); }
    std::size_t dropped_dims() const {
        return std::count(active.begin(), active.end(), false);
    }
};

inline FeatureSet normalize_features(const std::vector<Point>& positions,
                                     const std::vector<double>& gains) {
    const std::size_t n = positions.size();
    FeatureSet fs;
    fs.rows.resize(n);
    std::array<std::vector<double>, 3> dims;
    for (std::size_t i = 0; i < n; ++i) {
        dims[0].push_back(positions[i].x);
        dims[1].push_back(positions[i].y);
        dims[2].push_back(gains[i]);
    }
    for (std::size_t d = 0; d < 3; ++d) {
        const double mean = std::accumulate(dims[d].begin(), dims[d].end(), 0.0) / n;
        double var = 0.0;
        double scale = 0.0;
        for (double v : dims[d]) {
            var += (v - mean) * (v - mean);
            scale = std::max(scale, std::abs(v));
        }
        var /= n;  // population variance
        const double sd = std::sqrt(var);
        // constant up to rounding counts as degenerate
        if (sd <= 1e-9 * std::max(scale, 1e-300)) {
            fs.active[d] = false;
            for (std::size_t i = 0; i < n; ++i) fs.rows[i][d] = 0.0;
        } else {
            for (std::size_t i = 0; i < n; ++i) fs.rows[i][d] = (dims[d][i] - mean) / sd;
        }
    }
    return fs;
}

inline double pair_distance(const std::array<double, 3>& a, const std::array<double, 3>& b,
                            const std::array<bool, 3>& active = {true, true, true}) {
    double s = 0.0;
    for (std::size_t d = 0; d < 3; ++d) {
        if (!active[d]) continue;
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return std::sqrt(s);
}

inline double pair_distance(const FeatureSet& fs, std::size_t i, std::size_t j) {
    return pair_distance(fs.rows[i], fs.rows[j], fs.active);
}

// A clustering query always pairs one good with one poor user; same-group
// pairs are filtered out at generation time.
struct Query {
    std::size_t good;
    std::size_t poor;
};

// Round-robin over good users; the poor partner is drawn with probability
// proportional to exp(-distance), so nearby pairs are queried more often.
class QueryGen {
public:
    QueryGen(const FeatureSet& features, const std::vector<UserGroup>& groups) {
        for (std::size_t u = 0; u < groups.size(); ++u)
            (groups[u] == UserGroup::Good ? good_ : poor_).push_back(u);
        cumw_.resize(good_.size());
        for (std::size_t gi = 0; gi < good_.size(); ++gi) {
            auto& cw = cumw_[gi];
            cw.resize(poor_.size());
            double acc = 0.0;
            for (std::size_t pi = 0; pi < poor_.size(); ++pi) {
                acc += std::exp(-pair_distance(features, good_[gi], poor_[pi]));
                cw[pi] = acc;
            }
        }
    }

    Query next(Rng& rng) {
        const std::size_t gi = rr_++ % good_.size();
        const auto& cw = cumw_[gi];
        const double total = cw.back();
        std::size_t pi;
        if (total > 0.0) {
            const double u = rng.uniform() * total;
            pi = std::lower_bound(cw.begin(), cw.end(), u) - cw.begin();
            if (pi >= cw.size()) pi = cw.size() - 1;
        } else {
            pi = rng.uniform_int(poor_.size());  // all weights underflowed
        }
        return {good_[gi], poor_[pi]};
    }

private:
    std::vector<std::size_t> good_, poor_;
    std::vector<std::vector<double>> cumw_;
    std::size_t rr_ = 0;
};

inline std::vector<Query> generate_queries(const FeatureSet& features,
                                           const std::vector<UserGroup>& groups, Rng& rng,
                                           std::size_t count) {
    QueryGen gen(features, groups);
    std::vector<Query> qs;
    qs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) qs.push_back(gen.next(rng));
    return qs;
}

// User -> cluster map with exactly two users per cluster.
struct ClusterAssignment {
    std::vector<std::size_t> cluster_of;  // per user, 0-based

    std::size_t num_clusters() const {
        return cluster_of.empty()
                   ? 0
                   : 1 + *std::max_element(cluster_of.begin(), cluster_of.end());
    }
    // the other user sharing this user's cluster
    std::size_t mate_of(std::size_t user) const {
        for (std::size_t v = 0; v < cluster_of.size(); ++v)
            if (v != user && cluster_of[v] == cluster_of[user]) return v;
        throw std::logic_error("mate_of: cluster of size 1");
    }
};

// Migration automaton over K clusters x depth W. State indices are 1-based;
// within cluster k they run from the innermost (k-1)W+1 to the boundary kW,
// so delta % W == 1 marks the innermost state and delta % W == 0 the boundary.
struct AutomatonState {
    std::size_t num_clusters = 0;  // K
    std::size_t depth = 10;        // W
    std::vector<std::size_t> delta;

    std::size_t cluster_of(std::size_t user) const { return (delta[user] - 1) / depth; }
    bool at_innermost(std::size_t user) const { return delta[user] % depth == 1; }
    bool at_boundary(std::size_t user) const { return delta[user] % depth == 0; }

    ClusterAssignment assignment() const {
        ClusterAssignment a;
        a.cluster_of.resize(delta.size());
        for (std::size_t u = 0; u < delta.size(); ++u) a.cluster_of[u] = cluster_of(u);
        return a;
    }
    std::vector<std::size_t> cluster_sizes() const {
        std::vector<std::size_t> sz(num_clusters, 0);
        for (std::size_t u = 0; u < delta.size(); ++u) ++sz[cluster_of(u)];
        return sz;
    }
};

// Cold start: a seeded shuffle pairs the users; pair j is parked at cluster
// j's boundary state.
inline AutomatonState init_automaton(std::size_t num_users, std::size_t depth, Rng& rng) {
    AutomatonState st;
    st.num_clusters = num_users / 2;
    st.depth = depth;
    st.delta.resize(num_users);
    std::vector<std::size_t> perm(num_users);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    for (std::size_t j = 0; j < st.num_clusters; ++j) {
        st.delta[perm[2 * j]] = (j + 1) * depth;
        st.delta[perm[2 * j + 1]] = (j + 1) * depth;
    }
    return st;
}

// One automaton transition.
//   same cluster: both users step inward (reward), pinned at the innermost state;
//   different clusters: whoever is not at its boundary steps outward (penalty);
//   both at their boundaries: the queried pair is united in q's cluster and the
//   bystander closest to that cluster's boundary is expelled to p's old state.
inline AutomatonState moma_step(const AutomatonState& state, const Query& q) {
    AutomatonState st = state;
    const std::size_t p = q.good, qq = q.poor;
    if (st.cluster_of(p) == st.cluster_of(qq)) {
        if (!st.at_innermost(p)) --st.delta[p];
        if (!st.at_innermost(qq)) --st.delta[qq];
        return st;
    }
    const bool pb = st.at_boundary(p), qb = st.at_boundary(qq);
    if (!pb && !qb) {
        ++st.delta[p];
        ++st.delta[qq];
    } else if (!pb) {
        ++st.delta[p];
    } else if (!qb) {
        ++st.delta[qq];
    } else {
        // swap: pick the bystander in q's cluster with the largest delta mod W
        // (ties to the lowest user id) and hand it p's old state
        const std::size_t qc = st.cluster_of(qq);
        std::size_t chosen = st.delta.size();
        std::size_t best_mod = 0;
        for (std::size_t u = 0; u < st.delta.size(); ++u) {
            if (u == p || u == qq || st.cluster_of(u) != qc) continue;
            const std::size_t m = st.delta[u] % st.depth;
            if (chosen == st.delta.size() || m > best_mod) {
                chosen = u;
                best_mod = m;
            }
        }
        const std::size_t temp = st.delta[p];
        st.delta[p] = st.delta[qq];
        if (chosen != st.delta.size()) st.delta[chosen] = temp;
    }
    return st;
}

struct MomaOptions {
    std::size_t depth = 10;          // W
    std::size_t window = 50;         // consecutive in-cluster queries to declare convergence
    std::size_t max_queries = 2000;
};

struct MomaResult {
    ClusterAssignment assignment;
    bool converged = false;
    std::size_t queries_used = 0;
};

// Runs the automaton on a distance-weighted query stream until the cluster
// membership has been stable for `window` consecutive queries (queries kept
// falling within the existing clusters without reshuffling anyone), or the
// query budget runs out (best-so-far is returned with converged=false).
inline MomaResult moma_run(
    const FeatureSet& features, const std::vector<UserGroup>& groups, Rng& rng,
    const MomaOptions& opts = {},
    const std::function<void(std::size_t, const AutomatonState&)>& observer = nullptr) {
    QueryGen gen(features, groups);
    AutomatonState st = init_automaton(groups.size(), opts.depth, rng);
    if (observer) observer(0, st);
    std::size_t streak = 0;
    ClusterAssignment prev = st.assignment();
    MomaResult res;
    for (std::size_t t = 1; t <= opts.max_queries; ++t) {
        const Query q = gen.next(rng);
        st = moma_step(st, q);
        if (observer) observer(t, st);
        res.queries_used = t;
        ClusterAssignment cur = st.assignment();
        streak = cur.cluster_of == prev.cluster_of ? streak + 1 : 0;
        prev = std::move(cur);
        if (streak >= opts.window) {
            res.converged = true;
            break;
        }
    }
    res.assignment = st.assignment();
    return res;
}

// Minimum-total-distance perfect matching between good and poor users by
// exhaustive enumeration; the guard keeps K! in check. Among equal-cost
// matchings the lexicographically smallest poor-user permutation wins.
inline ClusterAssignment oracle_matching(const FeatureSet& features,
                                         const std::vector<UserGroup>& groups,
                                         std::size_t max_k = 8) {
    std::vector<std::size_t> good, poor;
    for (std::size_t u = 0; u < groups.size(); ++u)
        (groups[u] == UserGroup::Good ? good : poor).push_back(u);
    const std::size_t k = good.size();
    if (k > max_k)
        throw ComplexityGuardError("oracle_matching: K too large for K! enumeration");

    std::vector<std::size_t> perm(k), best_perm;
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            cost += pair_distance(features, good[i], poor[perm[i]]);
        if (cost < best) {
            best = cost;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    ClusterAssignment a;
    a.cluster_of.resize(groups.size());
    for (std::size_t i = 0; i < k; ++i) {
        a.cluster_of[good[i]] = i;
        a.cluster_of[poor[best_perm[i]]] = i;
    }
    return a;
}

// Number of users whose clustermate differs between the two assignments.
// Mates differ in pairs, so the count is always even.
inline std::size_t mismatch_count(const ClusterAssignment& a, const ClusterAssignment& b) {
    std::size_t n = 0;
    for (std::size_t u = 0; u < a.cluster_of.size(); ++u)
        if (a.mate_of(u) != b.mate_of(u)) ++n;
    return n;
}

struct KmeansResult {
    ClusterAssignment assignment;
    std::size_t iterations = 0;
    std::size_t operations = 0;  // distance evaluations, the complexity metric
};

// Lloyd's algorithm with a greedy equal-size repair pass; the operation
// count feeds the complexity comparison against the automaton.
inline KmeansResult kmeans_baseline(const FeatureSet& features, std::size_t k, Rng& rng,
                                    std::size_t max_iters = 100) {
    const std::size_t n = features.size();
    KmeansResult res;
    res.assignment.cluster_of.assign(n, 0);
    if (k <= 1) return res;

    auto dist2 = [&](const std::array<double, 3>& a, const std::array<double, 3>& b) {
        ++res.operations;
        const double d = pair_distance(a, b, features.active);
        return d * d;
    };

    // k-means++ seeding
    std::vector<std::array<double, 3>> centroids;
    centroids.push_back(features.rows[rng.uniform_int(n)]);
    while (centroids.size() < k) {
        std::vector<double> d2(n);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) best = std::min(best, dist2(features.rows[i], c));
            d2[i] = best;
            total += best;
        }
        double u = rng.uniform() * total;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            u -= d2[i];
            if (u <= 0.0) {
                pick = i;
                break;
            }
        }
        centroids.push_back(features.rows[pick]);
    }

    std::vector<std::size_t>& assign = res.assignment.cluster_of;
    for (std::size_t it = 0; it < max_iters; ++it) {
        ++res.iterations;
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best_c = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = dist2(features.rows[i], centroids[c]);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            if (assign[i] != best_c) {
                assign[i] = best_c;
                changed = true;
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            std::array<double, 3> m{0.0, 0.0, 0.0};
            std::size_t cnt = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (assign[i] != c) continue;
                for (std::size_t d = 0; d < 3; ++d) m[d] += features.rows[i][d];
                ++cnt;
            }
            if (cnt > 0)
                for (std::size_t d = 0; d < 3; ++d) centroids[c][d] = m[d] / cnt;
        }
        if (!changed) break;
    }

    // greedy repair to exactly n/k members per cluster
    const std::size_t target = n / k;
    std::vector<std::size_t> sizes(k, 0);
    for (auto c : assign) ++sizes[c];
    while (true) {
        std::size_t over = k;
        for (std::size_t c = 0; c < k; ++c)
            if (sizes[c] > target) over = c;
        if (over == k) break;
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_u = n, best_c = k;
        for (std::size_t u = 0; u < n; ++u) {
            if (assign[u] != over) continue;
            for (std::size_t c = 0; c < k; ++c) {
                if (sizes[c] >= target) continue;
                const double d = dist2(features.rows[u], centroids[c]);
                if (d < best) {
                    best = d;
                    best_u = u;
                    best_c = c;
                }
            }
        }
        assign[best_u] = best_c;
        --sizes[over];
        ++sizes[best_c];
    }
    return res;
}

}  // namespace risnoma
