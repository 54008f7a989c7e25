#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "risnoma/mlp.hpp"
#include "risnoma/rlenv.hpp"
#include "risnoma/rng.hpp"

namespace risnoma {

struct Transition {
    std::vector<double> s;   // encoded state
    std::vector<double> a;   // raw action vector in [-1,1]^N
    double r = 0.0;
    std::vector<double> s2;  // encoded next state
};

// Fixed-capacity FIFO ring; oldest transitions are evicted first.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity) : cap_(capacity), buf_(capacity) {}

    std::size_t capacity() const { return cap_; }
    std::size_t size() const { return count_; }

    void push(Transition t) {
        if (count_ < cap_) {
            buf_[(start_ + count_) % cap_] = std::move(t);
            ++count_;
        } else {
            buf_[start_] = std::move(t);
            start_ = (start_ + 1) % cap_;
        }
    }

    // i = 0 is the oldest stored transition
    const Transition& at(std::size_t i) const { return buf_[(start_ + i) % cap_]; }

    const Transition& sample(Rng& rng) const {
        if (count_ == 0) throw std::logic_error("ReplayMemory::sample: empty");
        return at(rng.uniform_int(count_));
    }

private:
    std::size_t cap_;
    std::vector<Transition> buf_;
    std::size_t start_ = 0;
    std::size_t count_ = 0;
};

enum class Strategy { Noise, EpsGreedy, Softmax, Exp3 };
enum class LrKind { Constant, Iteration, Step, Exponential };

inline Strategy strategy_from_string(const std::string& s) {
    if (s == "noise") return Strategy::Noise;
    if (s == "eps-greedy") return Strategy::EpsGreedy;
    if (s == "softmax") return Strategy::Softmax;
    if (s == "exp3") return Strategy::Exp3;
    throw std::invalid_argument("unknown exploration strategy: " + s);
}

inline LrKind lr_kind_from_string(const std::string& s) {
    if (s == "constant") return LrKind::Constant;
    if (s == "iteration") return LrKind::Iteration;
    if (s == "step") return LrKind::Step;
    if (s == "exponential") return LrKind::Exponential;
    throw std::invalid_argument("unknown lr schedule: " + s);
}

struct LrHyper {
    double k = 0.1;               // iteration / exponential decay rate
    double drop = 0.5;            // step decay factor
    std::size_t step_drop = 1000; // steps per drop (staircase)
};

inline double lr_schedule(LrKind kind, double lr0, const LrHyper& h, std::size_t t) {
    switch (kind) {
        case LrKind::Constant:
            return lr0;
        case LrKind::Iteration:
            return lr0 / (1.0 + h.k * static_cast<double>(t));
        case LrKind::Step:
            return lr0 * std::pow(h.drop, static_cast<double>(t / h.step_drop));
        case LrKind::Exponential:
            return lr0 * std::exp(-h.k * static_cast<double>(t));
    }
    return lr0;
}

// ---- discrete action bookkeeping (2N+1 actions: no-op, +1 per RE, -1 per RE) ----

inline std::size_t num_discrete_actions(std::size_t n_res) { return 2 * n_res + 1; }

inline EnvAction discrete_to_action(std::size_t j, std::size_t n_res) {
    if (j == 0) return EnvAction::no_op();
    if (j <= n_res) return {j - 1, +1};
    return {j - n_res - 1, -1};
}

inline std::vector<double> discrete_action_vector(std::size_t j, std::size_t n_res) {
    std::vector<double> v(n_res, 0.0);
    if (j == 0) return v;
    if (j <= n_res)
        v[j - 1] = 1.0;
    else
        v[j - n_res - 1] = -1.0;
    return v;
}

// Raw policy vector -> single-RE action: strongest component wins, small
// magnitudes fall into the no-op dead zone.
inline EnvAction discretize_action(const std::vector<double>& raw, double deadzone) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < raw.size(); ++i)
        if (std::abs(raw[i]) > std::abs(raw[best])) best = i;
    if (std::abs(raw[best]) < deadzone) return EnvAction::no_op();
    return {best, raw[best] > 0.0 ? +1 : -1};
}

inline std::vector<int> discretize_multi(const std::vector<double>& raw, double deadzone) {
    std::vector<int> dirs(raw.size(), 0);
    for (std::size_t i = 0; i < raw.size(); ++i)
        dirs[i] = raw[i] >= deadzone ? +1 : (raw[i] <= -deadzone ? -1 : 0);
    return dirs;
}

struct ExplorationParams {
    double epsilon = 0.1;       // eps-greedy
    double softmax_temp = 1.0;  // softmax temperature
    double exp3_alpha = 0.1;    // uniform mixing mass
    double exp3_beta = 1.0;     // softmax sharpness inside exp3
};

// Selection distribution over a discrete Q table for the three value-based
// strategies. Probabilities are non-negative and sum to one.
inline std::vector<double> action_probabilities(Strategy strategy,
                                                const std::vector<double>& q,
                                                const ExplorationParams& p) {
    const std::size_t a = q.size();
    std::vector<double> probs(a, 0.0);
    switch (strategy) {
        case Strategy::EpsGreedy: {
            const std::size_t best = std::max_element(q.begin(), q.end()) - q.begin();
            for (auto& v : probs) v = p.epsilon / static_cast<double>(a);
            probs[best] += 1.0 - p.epsilon;
            return probs;
        }
        case Strategy::Softmax: {
            const double qmax = *std::max_element(q.begin(), q.end());
            double total = 0.0;
            for (std::size_t i = 0; i < a; ++i) {
                probs[i] = std::exp((q[i] - qmax) / p.softmax_temp);
                total += probs[i];
            }
            for (auto& v : probs) v /= total;
            return probs;
        }
        case Strategy::Exp3: {
            const double qmax = *std::max_element(q.begin(), q.end());
            double total = 0.0;
            std::vector<double> soft(a);
            for (std::size_t i = 0; i < a; ++i) {
                soft[i] = std::exp(p.exp3_beta * (q[i] - qmax));
                total += soft[i];
            }
            for (std::size_t i = 0; i < a; ++i)
                probs[i] = (1.0 - p.exp3_alpha) * soft[i] / total +
                           p.exp3_alpha / static_cast<double>(a);
            return probs;
        }
        case Strategy::Noise:
            break;
    }
    throw std::invalid_argument("action_probabilities: strategy has no discrete distribution");
}

inline std::size_t sample_categorical(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return probs.size() - 1;
}

// discounted return of a reward sequence
inline double episode_return(const std::vector<double>& rewards, double gamma) {
    double g = 1.0, total = 0.0;
    for (double r : rewards) {
        total += g * r;
        g *= gamma;
    }
    return total;
}

inline double advantage(double q_value, double v_value) { return q_value - v_value; }

struct DdpgConfig {
    double gamma = 0.99;
    double tau = 0.005;
    double lr0 = 0.01;
    LrKind lr_kind = LrKind::Constant;
    LrHyper lr_hyper{};
    std::size_t batch_size = 256;       // H
    std::size_t replay_capacity = 1000; // U
    std::size_t hidden_size = 48;       // O
    Strategy strategy = Strategy::Noise;
    ExplorationParams exploration{};
    double noise_sigma0 = 0.5;  // exploration noise, linear decay over training
    double noise_sigma1 = 0.05;
    double deadzone = 0.33;
    bool multi_re = false;
};

// Four-network deterministic policy gradient learner. The critic scores
// (encoded state, raw action vector) pairs; target copies track the online
// networks through soft updates.
class DdpgAgent {
public:
    DdpgAgent(std::size_t n_res, const DdpgConfig& cfg, Rng& rng)
        : cfg_(cfg),
          n_(n_res),
          q_(Mlp::random_init(2 * n_res, cfg.hidden_size, 1, false, rng)),
          mu_(Mlp::random_init(n_res, cfg.hidden_size, n_res, true, rng)),
          q_target_(q_),
          mu_target_(mu_) {
        replay_ = std::make_unique<ReplayMemory>(cfg.replay_capacity);
    }

    const DdpgConfig& config() const { return cfg_; }
    std::size_t n_res() const { return n_; }
    ReplayMemory& replay() { return *replay_; }
    const Mlp& critic() const { return q_; }
    const Mlp& policy() const { return mu_; }
    const Mlp& target_critic() const { return q_target_; }
    const Mlp& target_policy() const { return mu_target_; }
    Mlp& critic_mut() { return q_; }
    Mlp& policy_mut() { return mu_; }

    double q_value(const std::vector<double>& s, const std::vector<double>& a) const {
        std::vector<double> x(s);
        x.insert(x.end(), a.begin(), a.end());
        return q_.forward(x)[0];
    }

    // exploration noise std at a given training progress in [0,1]
    double noise_sigma(double progress) const {
        const double p = std::clamp(progress, 0.0, 1.0);
        return cfg_.noise_sigma0 + (cfg_.noise_sigma1 - cfg_.noise_sigma0) * p;
    }

    struct ActionChoice {
        EnvAction action;
        std::vector<int> directions;  // populated in multi-RE mode
        std::vector<double> raw;      // what gets stored in the replay memory
    };

    ActionChoice select_action(const std::vector<double>& s_enc, Rng& rng,
                               double progress) {
        ActionChoice c;
        if (cfg_.strategy == Strategy::Noise) {
            c.raw = mu_.forward(s_enc);
            const double sigma = noise_sigma(progress);
            for (auto& v : c.raw) v = std::clamp(v + sigma * rng.normal(), -1.0, 1.0);
        } else {
            std::vector<double> qvals(num_discrete_actions(n_));
            for (std::size_t j = 0; j < qvals.size(); ++j)
                qvals[j] = q_value(s_enc, discrete_action_vector(j, n_));
            const auto probs = action_probabilities(cfg_.strategy, qvals, cfg_.exploration);
            const std::size_t j = sample_categorical(probs, rng);
            c.raw = discrete_action_vector(j, n_);
        }
        if (cfg_.multi_re)
            c.directions = discretize_multi(c.raw, cfg_.deadzone);
        else
            c.action = discretize_action(c.raw, cfg_.deadzone);
        return c;
    }

    // y_t = r_t + gamma * Q'(s', mu'(s')) using target networks only
    std::vector<double> q_target(const std::vector<const Transition*>& batch) const {
        std::vector<double> y(batch.size());
        Mlp::Cache mu_cache, q_cache;
        std::vector<double> x(2 * n_);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const Transition& t = *batch[i];
            mu_target_.forward(t.s2.data(), mu_cache);
            std::copy(t.s2.begin(), t.s2.end(), x.begin());
            std::copy(mu_cache.y.begin(), mu_cache.y.end(), x.begin() + n_);
            q_target_.forward(x.data(), q_cache);
            y[i] = t.r + cfg_.gamma * q_cache.y[0];
        }
        return y;
    }

    // gradient of the mean squared Bellman error; returns the pre-update loss
    double critic_gradient(const std::vector<const Transition*>& batch,
                           const std::vector<double>& targets, Mlp::Grads& g) const {
        g.resize_like(q_);
        Mlp::Cache cache;
        std::vector<double> x(2 * n_);
        double loss = 0.0;
        const double inv_h = 1.0 / static_cast<double>(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const Transition& t = *batch[i];
            std::copy(t.s.begin(), t.s.end(), x.begin());
            std::copy(t.a.begin(), t.a.end(), x.begin() + n_);
            q_.forward(x.data(), cache);
            const double err = targets[i] - cache.y[0];
            loss += err * err * inv_h;
            const double dy = -2.0 * err * inv_h;  // dL/dQ
            q_.backward(cache, &dy, g);
        }
        return loss;
    }

    double critic_update(const std::vector<const Transition*>& batch,
                         const std::vector<double>& targets, double lr) {
        Mlp::Grads g;
        const double loss = critic_gradient(batch, targets, g);
        q_.apply_grads(g, -lr);
        return loss;
    }

    // gradient of mean_i Q(s_i, mu(s_i)) w.r.t. the policy parameters
    double actor_gradient(const std::vector<const Transition*>& batch, Mlp::Grads& g) const {
        g.resize_like(mu_);
        Mlp::Grads scratch;  // critic grads, discarded
        scratch.resize_like(q_);
        Mlp::Cache mu_cache, q_cache;
        std::vector<double> x(2 * n_);
        std::vector<double> dx(2 * n_);
        std::vector<double> da(n_);
        double mean_q = 0.0;
        const double inv_h = 1.0 / static_cast<double>(batch.size());
        for (const Transition* tp : batch) {
            mu_.forward(tp->s.data(), mu_cache);
            std::copy(tp->s.begin(), tp->s.end(), x.begin());
            std::copy(mu_cache.y.begin(), mu_cache.y.end(), x.begin() + n_);
            q_.forward(x.data(), q_cache);
            mean_q += q_cache.y[0] * inv_h;
            const double dy = inv_h;  // d(mean Q)/dQ_i
            scratch.zero();
            q_.backward(q_cache, &dy, scratch, dx.data());
            std::copy(dx.begin() + n_, dx.end(), da.begin());
            mu_.backward(mu_cache, da.data(), g);
        }
        return mean_q;
    }

    double actor_update(const std::vector<const Transition*>& batch, double lr) {
        Mlp::Grads g;
        const double mean_q = actor_gradient(batch, g);
        mu_.apply_grads(g, +lr);  // ascent
        return mean_q;
    }

    void soft_update(double tau) {
        q_target_.blend_from(q_, tau);
        mu_target_.blend_from(mu_, tau);
    }
    void soft_update() { soft_update(cfg_.tau); }

    // one full learning step on a sampled minibatch; returns pre-update loss
    double learn(Rng& rng, double lr) {
        const std::size_t h = std::min(cfg_.batch_size, replay_->size());
        batch_.resize(h);
        for (auto& t : batch_) t = &replay_->sample(rng);
        const auto y = q_target(batch_);
        const double loss = critic_update(batch_, y, lr);
        last_mean_q_ = actor_update(batch_, lr);
        soft_update();
        return loss;
    }

    double last_mean_q() const { return last_mean_q_; }

    void save_checkpoint(const std::string& path) const {
        std::FILE* f = std::fopen(path.c_str(), "w");
        if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
        std::fprintf(f, "ddpg-checkpoint 1\n");
        std::fprintf(f, "n_res %zu gamma %.17g tau %.17g\n", n_, cfg_.gamma, cfg_.tau);
        q_.save(f);
        mu_.save(f);
        q_target_.save(f);
        mu_target_.save(f);
        std::fclose(f);
    }

    void load_checkpoint(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
        std::string tag;
        int version = 0;
        in >> tag >> version;
        if (tag != "ddpg-checkpoint" || version != 1)
            throw std::runtime_error("load_checkpoint: bad header in " + path);
        std::size_t n = 0;
        in >> tag >> n >> tag >> cfg_.gamma >> tag >> cfg_.tau;
        if (n != n_) throw std::runtime_error("load_checkpoint: environment size mismatch");
        q_ = Mlp::load(in);
        mu_ = Mlp::load(in);
        q_target_ = Mlp::load(in);
        mu_target_ = Mlp::load(in);
    }

private:
    DdpgConfig cfg_;
    std::size_t n_;
    Mlp q_, mu_, q_target_, mu_target_;
    std::unique_ptr<ReplayMemory> replay_;
    std::vector<const Transition*> batch_;
    double last_mean_q_ = 0.0;
};

struct TrainOptions {
    std::size_t episodes = 300;
    std::size_t steps_per_episode = 200;  // T
    std::size_t early_stop_patience = 40; // 0 disables
    std::size_t min_episodes = 30;
    std::size_t converge_window = 20;
    // invoked before each episode; may redraw the environment's channels
    std::function<void(std::size_t episode)> episode_hook;
};

struct TrainResult {
    std::vector<double> sum_reward;   // per episode
    std::vector<double> final_rate;   // rate at the episode's last state
    std::vector<double> best_rate;    // best rate seen within the episode
    std::vector<double> mean_q;       // critic's mean Q at episode end
    std::size_t episodes_run = 0;
    double converged_rate = 0.0;      // mean final_rate over the last window
    double converged_reward = 0.0;    // mean sum_reward over the last window
};

// Full training loop: act, store, minibatch critic + actor updates, soft
// target updates, once the replay memory can fill a batch. Optionally stops
// early when the windowed final-rate plateaus.
inline TrainResult train(DdpgAgent& agent, PhaseShiftEnv& env, const TrainOptions& opts,
                         Rng& rng) {
    TrainResult res;
    const double total_steps =
        static_cast<double>(opts.episodes) * static_cast<double>(opts.steps_per_episode);
    std::size_t global_step = 0;
    std::size_t update_step = 0;
    double best_window_mean = -std::numeric_limits<double>::infinity();
    std::size_t stale = 0;

    for (std::size_t ep = 0; ep < opts.episodes; ++ep) {
        if (opts.episode_hook) opts.episode_hook(ep);
        env.reset(rng);
        double sum_r = 0.0;
        double best_r = env.current_rate();
        double final_r = env.current_rate();
        for (std::size_t t = 0; t < opts.steps_per_episode; ++t) {
            const auto s_enc = encode_state(env.state());
            const double progress = static_cast<double>(global_step) / total_steps;
            auto choice = agent.select_action(s_enc, rng, progress);
            const StepResult sr = agent.config().multi_re ? env.step_multi(choice.directions)
                                                          : env.step(choice.action);
            agent.replay().push(
                {s_enc, std::move(choice.raw), sr.reward, encode_state(sr.next_state)});
            sum_r += sr.reward;
            final_r = sr.rate;
            best_r = std::max(best_r, sr.rate);
            ++global_step;
            if (agent.replay().size() >= agent.config().batch_size) {
                const double lr = lr_schedule(agent.config().lr_kind, agent.config().lr0,
                                              agent.config().lr_hyper, update_step);
                agent.learn(rng, lr);
                ++update_step;
            }
        }
        res.sum_reward.push_back(sum_r);
        res.final_rate.push_back(final_r);
        res.best_rate.push_back(best_r);
        res.mean_q.push_back(agent.last_mean_q());
        ++res.episodes_run;

        if (opts.early_stop_patience > 0 && res.episodes_run >= opts.min_episodes) {
            const std::size_t w = std::min<std::size_t>(10, res.final_rate.size());
            double m = 0.0;
            for (std::size_t i = res.final_rate.size() - w; i < res.final_rate.size(); ++i)
                m += res.final_rate[i];
            m /= static_cast<double>(w);
            if (m > best_window_mean + 1e-9) {
                best_window_mean = m;
                stale = 0;
            } else if (++stale >= opts.early_stop_patience) {
                break;
            }
        }
    }

    const std::size_t w = std::min<std::size_t>(opts.converge_window, res.episodes_run);
    if (w > 0) {
        for (std::size_t i = res.episodes_run - w; i < res.episodes_run; ++i) {
            res.converged_rate += res.final_rate[i];
            res.converged_reward += res.sum_reward[i];
        }
        res.converged_rate /= static_cast<double>(w);
        res.converged_reward /= static_cast<double>(w);
    }
    return res;
}

}  // namespace risnoma
