#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "risnoma/mlp.hpp"

using namespace risnoma;

namespace {

// scalar objective J = <c, net(x)>; returns exact analytic parameter grads
std::pair<double, std::vector<double>> value_and_grads(const Mlp& net,
                                                       const std::vector<double>& x,
                                                       const std::vector<double>& c) {
    Mlp::Cache cache;
    net.forward(x.data(), cache);
    double j = 0.0;
    for (std::size_t o = 0; o < c.size(); ++o) j += c[o] * cache.y[o];
    Mlp::Grads g;
    g.resize_like(net);
    net.backward(cache, c.data(), g);
    return {j, Mlp::flat_grads(g)};
}

double fd_gradient(Mlp net, const std::vector<double>& x, const std::vector<double>& c,
                   std::size_t param_index, double h = 1e-5) {
    std::vector<double> p = net.params();
    auto eval = [&](double v) {
        p[param_index] = v;
        net.set_params(p);
        Mlp::Cache cache;
        net.forward(x.data(), cache);
        double j = 0.0;
        for (std::size_t o = 0; o < c.size(); ++o) j += c[o] * cache.y[o];
        return j;
    };
    const double orig = p[param_index];
    const double plus = eval(orig + h);
    const double minus = eval(orig - h);
    return (plus - minus) / (2.0 * h);
}

}  // namespace

TEST_CASE("zero parameters produce zero output") {
    Mlp net(3, 5, 2, false);
    CHECK(net.forward({1.0, -2.0, 0.5}) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("epsilon-scaled sandwich approximates the identity") {
    // W1 = eps*I, W2 = I/eps squeezes tanh into its linear regime
    const std::size_t n = 3;
    const double eps = 1e-6;
    Mlp net(n, n, n, false);
    std::vector<double> p(n * n + n + n * n + n, 0.0);
    for (std::size_t i = 0; i < n; ++i) p[i * n + i] = eps;                     // w1
    for (std::size_t i = 0; i < n; ++i) p[n * n + n + i * n + i] = 1.0 / eps;   // w2
    net.set_params(p);
    const std::vector<double> x{0.3, -0.8, 1.0};
    const auto y = net.forward(x);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == Catch::Approx(x[i]).margin(1e-9));
}

TEST_CASE("random nets stay finite") {
    Rng rng(1);
    const Mlp net = Mlp::random_init(9, 48, 9, true, rng);
    std::vector<double> x(9);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    for (double v : net.forward(x)) {
        CHECK(std::isfinite(v));
        CHECK(std::abs(v) <= 1.0);  // tanh squash
    }
}

TEST_CASE("backward matches central finite differences") {
    Rng rng(2);
    for (const bool tanh_out : {false, true}) {
        const Mlp net = Mlp::random_init(4, 6, 3, tanh_out, rng);
        std::vector<double> x{0.2, -0.4, 0.9, -1.0};
        std::vector<double> c{0.7, -1.1, 0.3};
        const auto [j, grads] = value_and_grads(net, x, c);
        (void)j;
        for (std::size_t i = 0; i < grads.size(); ++i) {
            const double fd = fd_gradient(net, x, c, i);
            const double denom = std::max({std::abs(fd), std::abs(grads[i]), 1e-8});
            CHECK(std::abs(grads[i] - fd) / denom < 1e-4);
        }
    }
}

TEST_CASE("zero output gradient yields zero parameter gradients") {
    Rng rng(3);
    const Mlp net = Mlp::random_init(5, 7, 2, false, rng);
    Mlp::Cache cache;
    std::vector<double> x{1, 2, 3, 4, 5};
    net.forward(x.data(), cache);
    Mlp::Grads g;
    g.resize_like(net);
    const std::vector<double> dy{0.0, 0.0};
    net.backward(cache, dy.data(), g);
    for (double v : Mlp::flat_grads(g)) CHECK(v == 0.0);
}

TEST_CASE("output-layer weight gradient equals the hidden activation") {
    Rng rng(4);
    const Mlp net = Mlp::random_init(3, 4, 1, false, rng);
    Mlp::Cache cache;
    std::vector<double> x{0.5, -0.5, 0.25};
    net.forward(x.data(), cache);
    Mlp::Grads g;
    g.resize_like(net);
    const double dy = 1.0;
    net.backward(cache, &dy, g);
    for (std::size_t h = 0; h < 4; ++h) CHECK(g.w2[h] == cache.a1[h]);
    CHECK(g.b2[0] == 1.0);
}

TEST_CASE("input gradient flows through both layers") {
    Rng rng(5);
    const Mlp net = Mlp::random_init(4, 6, 2, false, rng);
    std::vector<double> x{0.1, 0.2, -0.3, 0.4};
    std::vector<double> c{1.0, -0.5};
    Mlp::Cache cache;
    net.forward(x.data(), cache);
    Mlp::Grads g;
    g.resize_like(net);
    std::vector<double> dx(4);
    net.backward(cache, c.data(), g, dx.data());
    // finite differences on the input
    for (std::size_t i = 0; i < 4; ++i) {
        const double h = 1e-6;
        auto eval = [&](double v) {
            std::vector<double> xx = x;
            xx[i] = v;
            const auto y = net.forward(xx);
            return c[0] * y[0] + c[1] * y[1];
        };
        const double fd = (eval(x[i] + h) - eval(x[i] - h)) / (2.0 * h);
        CHECK(dx[i] == Catch::Approx(fd).margin(1e-6));
    }
}

TEST_CASE("soft blend endpoints and midpoint") {
    Rng rng(6);
    const Mlp online = Mlp::random_init(2, 3, 1, false, rng);
    Mlp target = Mlp::random_init(2, 3, 1, false, rng);

    Mlp t1 = target;
    t1.blend_from(online, 1.0);
    CHECK(t1.params() == online.params());

    Mlp t0 = target;
    t0.blend_from(online, 0.0);
    CHECK(t0.params() == target.params());

    Mlp t5 = target;
    t5.blend_from(online, 0.5);
    const auto po = online.params(), pt = target.params(), pm = t5.params();
    for (std::size_t i = 0; i < pm.size(); ++i)
        CHECK(pm[i] == Catch::Approx(0.5 * po[i] + 0.5 * pt[i]).margin(1e-15));
}

TEST_CASE("repeated soft blends contract geometrically") {
    Rng rng(7);
    const Mlp online = Mlp::random_init(3, 4, 2, false, rng);
    Mlp target = Mlp::random_init(3, 4, 2, false, rng);
    const double tau = 0.25;
    const auto po = online.params();
    auto dist = [&](const Mlp& m) {
        double best = 0.0;
        const auto p = m.params();
        for (std::size_t i = 0; i < p.size(); ++i) best = std::max(best, std::abs(p[i] - po[i]));
        return best;
    };
    const double d0 = dist(target);
    for (int n = 1; n <= 20; ++n) {
        target.blend_from(online, tau);
        CHECK(dist(target) == Catch::Approx(std::pow(1.0 - tau, n) * d0).epsilon(1e-10));
    }
}

TEST_CASE("parameter dump round-trips exactly") {
    Rng rng(8);
    const Mlp net = Mlp::random_init(5, 9, 4, true, rng);
    const std::string path = "test_mlp_dump.txt";
    std::FILE* f = std::fopen(path.c_str(), "w");
    REQUIRE(f != nullptr);
    net.save(f);
    std::fclose(f);
    std::ifstream in(path);
    const Mlp back = Mlp::load(in);
    std::remove(path.c_str());
    CHECK(back.params() == net.params());
    CHECK(back.tanh_output() == net.tanh_output());
    CHECK(back.input_size() == 5);
    CHECK(back.hidden_size() == 9);
    CHECK(back.output_size() == 4);
}

TEST_CASE("forward rejects wrong input sizes") {
    Mlp net(3, 4, 2, false);
    CHECK_THROWS_AS(net.forward({1.0, 2.0}), std::invalid_argument);
}
