// cbp: command-line front end for the competing-particle toolkit.
//
//   cbp <scenario> --config cfg.json [--seed N] [--replicas K] [--out DIR]
//
// Scenarios: simulate, lpp, gue, verify, kstar, approx, tailbounds, psi.
// `cbp gue` also accepts direct flags (--m/--t/--samples) without a config.
// Exit code is 0 only if every assertion of the scenario passed.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cbp/config.hpp"
#include "cbp/harness.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t replicas = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required) {
    auto* c = cmd->add_option("--config", opts.config_path, "JSON config file");
    if (config_required) c->required();
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "base seed (overrides config)")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--replicas", opts.replicas, "replica count (overrides config)");
}

int run(cbp::Scenario scenario, const cbp::ExperimentConfig& cfg) {
    cbp::RunResult res = cbp::run_experiment(cfg);
    for (const auto& a : res.assertions)
        std::printf("[%s] %s%s%s\n", a.pass ? "pass" : "FAIL", a.name.c_str(),
                    a.detail.empty() ? "" : ": ", a.detail.c_str());
    for (const auto& f : res.failures)
        std::printf("[FAIL] replica %zu (seed %llu): %s\n", f.replica,
                    static_cast<unsigned long long>(f.seed), f.reason.c_str());
    std::printf("%s: %s, outputs in %s\n", cbp::scenario_name(scenario),
                res.ok ? "ok" : "FAILED", cfg.out_dir.c_str());
    return res.ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"competing Brownian particles: simulation and verification toolkit"};
    app.require_subcommand(1);

    struct Sub {
        cbp::Scenario scenario;
        CLI::App* cmd;
        CommonOpts opts;
    };
    std::vector<Sub> subs;
    subs.reserve(8); // option callbacks capture into the vector; no reallocation
    auto add = [&](const char* name, const char* help, cbp::Scenario sc, bool cfg_required) {
        subs.push_back({sc, app.add_subcommand(name, help), {}});
        add_common(subs.back().cmd, subs.back().opts, cfg_required);
        return subs.back().cmd;
    };

    add("simulate", "solve a finite system and write trajectories + residuals",
        cbp::Scenario::Simulate, true);
    add("lpp", "batch-evaluate chain functionals against one bundle", cbp::Scenario::Lpp, true);
    auto* gue_cmd = add("gue", "sample GUE largest eigenvalues", cbp::Scenario::Gue, false);
    add("verify", "solve and re-check residuals only", cbp::Scenario::Verify, true);
    add("kstar", "collision-chain statistics over replicas", cbp::Scenario::Kstar, true);
    add("approx", "finite-size approximation ladder + condition profiles",
        cbp::Scenario::Approx, true);
    add("tailbounds", "empirical tail decay of the chain statistics",
        cbp::Scenario::Tailbounds, true);
    add("psi", "greedy-partition moments of the weighted increments", cbp::Scenario::Psi, true);

    std::size_t gue_m = 1, gue_samples = 100;
    double gue_t = 1.0;
    gue_cmd->add_option("--m", gue_m, "matrix size");
    gue_cmd->add_option("--t", gue_t, "entry variance T");
    gue_cmd->add_option("--samples", gue_samples, "number of samples");

    CLI11_PARSE(app, argc, argv);

    try {
        for (auto& sub : subs) {
            if (!sub.cmd->parsed()) continue;
            cbp::ExperimentConfig cfg;
            if (!sub.opts.config_path.empty()) {
                cfg = cbp::load_config(sub.opts.config_path, sub.scenario);
            } else if (sub.scenario == cbp::Scenario::Gue) {
                nlohmann::json j{{"m", gue_m}, {"t", gue_t}, {"samples", gue_samples}};
                cfg = cbp::parse_config(j, cbp::Scenario::Gue);
            } else {
                std::fprintf(stderr, "error: --config is required\n");
                return 2;
            }
            if (sub.scenario == cbp::Scenario::Gue && sub.opts.config_path.empty()) {
                cfg.gue_m = gue_m;
                cfg.gue_t = gue_t;
                cfg.gue_samples = gue_samples;
            }
            if (sub.opts.seed_set) cfg.base_seed = sub.opts.seed;
            if (sub.opts.replicas > 0) cfg.replicas = sub.opts.replicas;
            if (!sub.opts.out_dir.empty()) cfg.out_dir = sub.opts.out_dir;
            return run(sub.scenario, cfg);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
