#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "risnoma/rng.hpp"

namespace risnoma {

// Single-hidden-layer perceptron: tanh hidden units, output either linear
// (critic) or tanh-squashed to [-1,1] (policy). Parameters are plain
// contiguous vectors so updates and soft blends are cheap loops.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::size_t in, std::size_t hidden, std::size_t out, bool tanh_output)
        : in_(in), hidden_(hidden), out_(out), tanh_output_(tanh_output),
          w1_(hidden * in), b1_(hidden), w2_(out * hidden), b2_(out) {}

    // uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer
    static Mlp random_init(std::size_t in, std::size_t hidden, std::size_t out,
                           bool tanh_output, Rng& rng) {
        Mlp m(in, hidden, out, tanh_output);
        const double l1 = 1.0 / std::sqrt(static_cast<double>(in));
        for (auto& w : m.w1_) w = rng.uniform(-l1, l1);
        for (auto& b : m.b1_) b = rng.uniform(-l1, l1);
        const double l2 = 1.0 / std::sqrt(static_cast<double>(hidden));
        for (auto& w : m.w2_) w = rng.uniform(-l2, l2);
        for (auto& b : m.b2_) b = rng.uniform(-l2, l2);
        return m;
    }

    std::size_t input_size() const { return in_; }
    std::size_t hidden_size() const { return hidden_; }
    std::size_t output_size() const { return out_; }
    bool tanh_output() const { return tanh_output_; }

    struct Cache {
        std::vector<double> x;   // input copy
        std::vector<double> a1;  // hidden activations
        std::vector<double> y;   // output
    };

    struct Grads {
        std::vector<double> w1, b1, w2, b2;

        void resize_like(const Mlp& m) {
            w1.assign(m.w1_.size(), 0.0);
            b1.assign(m.b1_.size(), 0.0);
            w2.assign(m.w2_.size(), 0.0);
            b2.assign(m.b2_.size(), 0.0);
        }
        void zero() {
            std::fill(w1.begin(), w1.end(), 0.0);
            std::fill(b1.begin(), b1.end(), 0.0);
            std::fill(w2.begin(), w2.end(), 0.0);
            std::fill(b2.begin(), b2.end(), 0.0);
        }
    };

    void forward(const double* x, Cache& c) const {
        c.x.assign(x, x + in_);
        c.a1.resize(hidden_);
        c.y.resize(out_);
        for (std::size_t h = 0; h < hidden_; ++h) {
            const double* row = &w1_[h * in_];
            double acc = b1_[h];
            for (std::size_t i = 0; i < in_; ++i) acc += row[i] * x[i];
            c.a1[h] = std::tanh(acc);
        }
        for (std::size_t o = 0; o < out_; ++o) {
            const double* row = &w2_[o * hidden_];
            double acc = b2_[o];
            for (std::size_t h = 0; h < hidden_; ++h) acc += row[h] * c.a1[h];
            c.y[o] = tanh_output_ ? std::tanh(acc) : acc;
        }
    }

    std::vector<double> forward(const std::vector<double>& x) const {
        if (x.size() != in_) throw std::invalid_argument("Mlp::forward: input size mismatch");
        Cache c;
        forward(x.data(), c);
        return c.y;
    }

    // Accumulates exact parameter gradients of <dy, y> into g; optionally
    // also the gradient w.r.t. the input (needed to push critic gradients
    // into the policy).
    void backward(const Cache& c, const double* dy, Grads& g, double* dx = nullptr) const {
        std::vector<double> dz2(out_);
        for (std::size_t o = 0; o < out_; ++o)
            dz2[o] = tanh_output_ ? dy[o] * (1.0 - c.y[o] * c.y[o]) : dy[o];

        std::vector<double> da1(hidden_, 0.0);
        for (std::size_t o = 0; o < out_; ++o) {
            const double d = dz2[o];
            if (d == 0.0) continue;
            double* grow = &g.w2[o * hidden_];
            const double* wrow = &w2_[o * hidden_];
            for (std::size_t h = 0; h < hidden_; ++h) {
                grow[h] += d * c.a1[h];
                da1[h] += d * wrow[h];
            }
            g.b2[o] += d;
        }

        if (dx)
            for (std::size_t i = 0; i < in_; ++i) dx[i] = 0.0;
        for (std::size_t h = 0; h < hidden_; ++h) {
            const double dz1 = da1[h] * (1.0 - c.a1[h] * c.a1[h]);
            if (dz1 == 0.0) continue;
            double* grow = &g.w1[h * in_];
            const double* wrow = &w1_[h * in_];
            for (std::size_t i = 0; i < in_; ++i) {
                grow[i] += dz1 * c.x[i];
                if (dx) dx[i] += dz1 * wrow[i];
            }
            g.b1[h] += dz1;
        }
    }

    // p += scale * g
    void apply_grads(const Grads& g, double scale) {
        for (std::size_t i = 0; i < w1_.size(); ++i) w1_[i] += scale * g.w1[i];
        for (std::size_t i = 0; i < b1_.size(); ++i) b1_[i] += scale * g.b1[i];
        for (std::size_t i = 0; i < w2_.size(); ++i) w2_[i] += scale * g.w2[i];
        for (std::size_t i = 0; i < b2_.size(); ++i) b2_[i] += scale * g.b2[i];
    }

    // flat parameter access (tests, finite differences, checkpoints)
    std::vector<double> params() const {
        std::vector<double> p;
        p.reserve(w1_.size() + b1_.size() + w2_.size() + b2_.size());
        p.insert(p.end(), w1_.begin(), w1_.end());
        p.insert(p.end(), b1_.begin(), b1_.end());
        p.insert(p.end(), w2_.begin(), w2_.end());
        p.insert(p.end(), b2_.begin(), b2_.end());
        return p;
    }
    void set_params(const std::vector<double>& p) {
        if (p.size() != w1_.size() + b1_.size() + w2_.size() + b2_.size())
            throw std::invalid_argument("Mlp::set_params: size mismatch");
        std::size_t off = 0;
        for (auto& v : w1_) v = p[off++];
        for (auto& v : b1_) v = p[off++];
        for (auto& v : w2_) v = p[off++];
        for (auto& v : b2_) v = p[off++];
    }
    static std::vector<double> flat_grads(const Grads& g) {
        std::vector<double> p;
        p.insert(p.end(), g.w1.begin(), g.w1.end());
        p.insert(p.end(), g.b1.begin(), g.b1.end());
        p.insert(p.end(), g.w2.begin(), g.w2.end());
        p.insert(p.end(), g.b2.begin(), g.b2.end());
        return p;
    }

    // target <- tau * online + (1 - tau) * target
    void blend_from(const Mlp& online, double tau) {
        const double keep = 1.0 - tau;
        for (std::size_t i = 0; i < w1_.size(); ++i) w1_[i] = tau * online.w1_[i] + keep * w1_[i];
        for (std::size_t i = 0; i < b1_.size(); ++i) b1_[i] = tau * online.b1_[i] + keep * b1_[i];
        for (std::size_t i = 0; i < w2_.size(); ++i) w2_[i] = tau * online.w2_[i] + keep * w2_[i];
        for (std::size_t i = 0; i < b2_.size(); ++i) b2_[i] = tau * online.b2_[i] + keep * b2_[i];
    }

    void save(std::FILE* f) const {
        std::fprintf(f, "mlp %zu %zu %zu %s\n", in_, hidden_, out_,
                     tanh_output_ ? "tanh" : "linear");
        auto dump = [f](const char* name, const std::vector<double>& v) {
            std::fprintf(f, "%s", name);
            for (double x : v) std::fprintf(f, " %.17g", x);
            std::fprintf(f, "\n");
        };
        dump("w1", w1_);
        dump("b1", b1_);
        dump("w2", w2_);
        dump("b2", b2_);
    }

    static Mlp load(std::istream& in) {
        std::string tag, act;
        std::size_t i = 0, h = 0, o = 0;
        in >> tag >> i >> h >> o >> act;
        if (tag != "mlp" || (act != "tanh" && act != "linear"))
            throw std::runtime_error("Mlp::load: bad header");
        Mlp m(i, h, o, act == "tanh");
        auto slurp = [&in](const char* name, std::vector<double>& v) {
            std::string t;
            in >> t;
            if (t != name) throw std::runtime_error("Mlp::load: expected section " + std::string(name));
            for (auto& x : v) in >> x;
        };
        slurp("w1", m.w1_);
        slurp("b1", m.b1_);
        slurp("w2", m.w2_);
        slurp("b2", m.b2_);
        if (!in) throw std::runtime_error("Mlp::load: truncated input");
        return m;
    }

private:
    std::size_t in_ = 0, hidden_ = 0, out_ = 0;
    bool tanh_output_ = false;
    std::vector<double> w1_, b1_, w2_, b2_;
};

}  // namespace risnoma
