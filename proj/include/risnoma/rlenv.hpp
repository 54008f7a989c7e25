#pragma once

#include <vector>

#include "risnoma/channel.hpp"
#include "risnoma/noma.hpp"
#include "risnoma/rng.hpp"

namespace risnoma {

// One reflecting element nudged per step, or a no-op.
struct EnvAction {
    std::size_t re = 0;  // element index, ignored when direction == 0
    int direction = 0;   // +1, -1 or 0

    static EnvAction no_op() { return {0, 0}; }
};

struct StepResult {
    PhaseConfig next_state;
    double reward = 0.0;  // positive rate improvements only
    double rate = 0.0;    // sum rate at next_state, bits/s/Hz
};

inline std::vector<double> encode_state(const PhaseConfig& s) {
    std::vector<double> v(s.idx.size());
    const double denom = static_cast<double>(s.levels - 1);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(s.idx[i]) / denom;
    return v;
}

// Markov environment over the discrete phase lattice for one frozen network
// draw. Rewards are rate deltas clipped at zero, so the return only counts
// improvements.
class PhaseShiftEnv {
public:
    PhaseShiftEnv(NetworkInstance instance, PowerAllocation alloc, double rho_per_cluster,
                  std::size_t phase_levels)
        : inst_(std::move(instance)),
          alloc_(std::move(alloc)),
          rho_(rho_per_cluster),
          levels_(phase_levels) {
        pre_ = zf_precode(inst_.h_au);
    }

    std::size_t num_res() const { return inst_.h_ar.rows(); }
    std::size_t phase_levels() const { return levels_; }
    const NetworkInstance& instance() const { return inst_; }
    const Precoder& precoder() const { return pre_; }

    // swap in a fresh channel draw mid-run (per-episode coherence mode)
    void reset_instance(NetworkInstance instance) {
        inst_ = std::move(instance);
        pre_ = zf_precode(inst_.h_au);
    }

    double rate_of_state(const PhaseConfig& s) const {
        return sum_rate(inst_, s, pre_, alloc_, rho_).sum_rate;
    }
    RateReport report_of_state(const PhaseConfig& s) const {
        return sum_rate(inst_, s, pre_, alloc_, rho_);
    }
    double oma_rate_of_state(const PhaseConfig& s) const {
        return oma_sum_rate(inst_, s, pre_, rho_).sum_rate;
    }

    PhaseConfig random_state(Rng& rng) const {
        PhaseConfig s;
        s.levels = levels_;
        s.idx.resize(num_res());
        for (auto& v : s.idx) v = 1 + rng.uniform_int(levels_ - 1);
        return s;
    }

    // target index moves one notch, clamped to [1, D-1]
    static PhaseConfig apply_action(const PhaseConfig& s, const EnvAction& a) {
        if (a.direction == 0) return s;
        PhaseConfig next = s;
        std::size_t& v = next.idx[a.re];
        if (a.direction > 0) {
            if (v < s.levels - 1) ++v;
        } else {
            if (v > 1) --v;
        }
        return next;
    }

    static PhaseConfig apply_multi(const PhaseConfig& s, const std::vector<int>& directions) {
        PhaseConfig next = s;
        for (std::size_t i = 0; i < directions.size(); ++i) {
            if (directions[i] > 0 && next.idx[i] < s.levels - 1) ++next.idx[i];
            if (directions[i] < 0 && next.idx[i] > 1) --next.idx[i];
        }
        return next;
    }

    // stateless transition, recomputes both rates
    StepResult step_from(const PhaseConfig& s, const EnvAction& a) const {
        StepResult r;
        r.next_state = apply_action(s, a);
        const double before = rate_of_state(s);
        r.rate = rate_of_state(r.next_state);
        r.reward = r.rate > before ? r.rate - before : 0.0;
        return r;
    }

    // ---- episodic interface (caches the current rate) ----
    const PhaseConfig& reset(Rng& rng) {
        cur_ = random_state(rng);
        cur_rate_ = rate_of_state(cur_);
        return cur_;
    }
    const PhaseConfig& reset_to(PhaseConfig s) {
        cur_ = std::move(s);
        cur_rate_ = rate_of_state(cur_);
        return cur_;
    }
    const PhaseConfig& state() const { return cur_; }
    double current_rate() const { return cur_rate_; }

    StepResult step(const EnvAction& a) {
        StepResult r;
        r.next_state = apply_action(cur_, a);
        r.rate = rate_of_state(r.next_state);
        r.reward = r.rate > cur_rate_ ? r.rate - cur_rate_ : 0.0;
        cur_ = r.next_state;
        cur_rate_ = r.rate;
        return r;
    }

    StepResult step_multi(const std::vector<int>& directions) {
        StepResult r;
        r.next_state = apply_multi(cur_, directions);
        r.rate = rate_of_state(r.next_state);
        r.reward = r.rate > cur_rate_ ? r.rate - cur_rate_ : 0.0;
        cur_ = r.next_state;
        cur_rate_ = r.rate;
        return r;
    }

private:
    NetworkInstance inst_;
    PowerAllocation alloc_;
    double rho_;
    std::size_t levels_;
    Precoder pre_;
    PhaseConfig cur_;
    double cur_rate_ = 0.0;
};

}  // namespace risnoma
