#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "risnoma/baselines.hpp"
#include "risnoma/harness.hpp"

namespace {

int run_selftest() {
    using namespace risnoma;
    // quick smoke of the main invariants; the full suites live in the tests
    Rng rng(7);
    for (int i = 0; i < 10; ++i) {
        CMat h(4, 4);
        for (auto& v : h.data()) v = sample_cn(rng, 1.0);
        const Precoder p = zf_precode(h);
        if (max_abs_diff(matmul(h, p.p), CMat::identity(4)) > 1e-9) {
            std::fprintf(stderr, "selftest: zero-forcing residual too large\n");
            return 1;
        }
    }
    std::printf("zero-forcing inversion ... ok\n");

    ExperimentConfig cfg;
    cfg.net.num_res = 4;
    Rng srng(11);
    const SeedSetup setup = make_setup(cfg, srng);
    PhaseShiftEnv env = make_env(cfg, setup, cfg.net.tx_power_dbm);
    env.reset(srng);
    for (int i = 0; i < 1000; ++i) {
        EnvAction a;
        a.re = static_cast<std::size_t>(srng.uniform_int(cfg.net.num_res));
        a.direction = static_cast<int>(srng.uniform_int(3)) - 1;
        if (env.step(a).reward < 0.0) {
            std::fprintf(stderr, "selftest: negative reward\n");
            return 1;
        }
    }
    std::printf("reward non-negativity ... ok\n");

    for (const Strategy st : {Strategy::EpsGreedy, Strategy::Softmax, Strategy::Exp3}) {
        const std::vector<double> q{0.3, -1.2, 0.9, 0.0, 2.5};
        const auto probs = action_probabilities(st, q, ExplorationParams{});
        double sum = 0.0;
        for (double p : probs) {
            if (p < 0.0) {
                std::fprintf(stderr, "selftest: negative probability\n");
                return 1;
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            std::fprintf(stderr, "selftest: probabilities do not sum to 1\n");
            return 1;
        }
    }
    std::printf("exploration distributions ... ok\n");
    std::printf("selftest passed\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS-aided NOMA downlink simulator and learning framework"};
    app.require_subcommand(1);

    std::string experiment;
    std::string config_path;
    std::string out_dir = "out";
    std::string seeds_override;
    std::vector<std::string> sets;

    auto* run = app.add_subcommand("run", "run an experiment and emit its CSV files");
    run->add_option("experiment", experiment, "experiment id (see `list`)")->required();
    run->add_option("--config", config_path, "key=value config file");
    run->add_option("--set", sets, "override a config key, e.g. --set tx_power_dbm=30");
    run->add_option("--out", out_dir, "output directory (default: out)");
    run->add_option("--seeds", seeds_override, "comma-separated seed list");

    auto* list = app.add_subcommand("list", "list available experiments");
    auto* selftest = app.add_subcommand("selftest", "run built-in smoke checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& e : risnoma::list_experiments())
                std::printf("%-6s %s\n", e.id.c_str(), e.description.c_str());
            return 0;
        }
        if (selftest->parsed()) return run_selftest();

        risnoma::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = risnoma::load_config(config_path);
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw risnoma::ConfigError("--set expects key=value, got '" + kv + "'");
            risnoma::config_set(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!seeds_override.empty()) risnoma::config_set(cfg, "seeds", seeds_override);

        const auto files = risnoma::run_experiment(cfg, experiment, out_dir);
        for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
