// Experiment configuration: strict JSON parsing with per-scenario key
// whitelists.  Unknown keys are rejected so a config never silently
// drifts out of sync with the code that consumes it.

#ifndef CBP_CONFIG_HPP
#define CBP_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "chains.hpp"
#include "gue.hpp"
#include "params.hpp"
#include "solver.hpp"

namespace cbp {

enum class Scenario { Simulate, Lpp, Gue, Verify, Kstar, Approx, Tailbounds, Psi };

inline Scenario scenario_from_string(const std::string& s) {
    if (s == "simulate") return Scenario::Simulate;
    if (s == "lpp") return Scenario::Lpp;
    if (s == "gue") return Scenario::Gue;
    if (s == "verify") return Scenario::Verify;
    if (s == "kstar") return Scenario::Kstar;
    if (s == "approx") return Scenario::Approx;
    if (s == "tailbounds") return Scenario::Tailbounds;
    if (s == "psi") return Scenario::Psi;
    throw std::invalid_argument("unknown scenario: " + s);
}

inline const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Simulate: return "simulate";
        case Scenario::Lpp: return "lpp";
        case Scenario::Gue: return "gue";
        case Scenario::Verify: return "verify";
        case Scenario::Kstar: return "kstar";
        case Scenario::Approx: return "approx";
        case Scenario::Tailbounds: return "tailbounds";
        case Scenario::Psi: return "psi";
    }
    return "?";
}

struct LppRequest {
    std::string kind; // vminus | vplus | w | u | rstar | j
    std::size_t i = 1;
    std::size_t m = 1;
    std::size_t j_blocks = 0; // u only
    double u = 0.0;
    double v = 0.0;
};

struct ExperimentConfig {
    Scenario scenario = Scenario::Simulate;
    SystemParams params = SystemParams::make(0.5);
    InitialConfig x0 = InitialConfig::constant(0.0);
    double horizon = 1.0;
    std::size_t n_steps = 512;
    std::size_t replicas = 1;
    std::uint64_t base_seed = 1;
    std::vector<std::uint64_t> seeds; // optional explicit per-replica seeds
    std::string out_dir = "out";
    double failure_cap = 0.0; // tolerated fraction of failed replicas
    std::size_t threads = 0;  // 0 = hardware default
    SolverTolerances tolerances;

    // simulate / verify / kstar
    std::size_t n_particles = 2;
    bool write_bundle = false;

    // lpp
    std::vector<LppRequest> requests;
    double lpp_r = 0.0;
    std::size_t lpp_rows = 0; // 0 = derive from requests

    // gue
    std::size_t gue_m = 1;
    double gue_t = 1.0;
    std::size_t gue_samples = 100;
    GueVarianceConvention gue_convention = GueVarianceConvention::HalfT;

    // kstar
    std::size_t chain_i = 1;
    double window_u = 0.0;
    double window_v = 1.0;
    CollisionRule rule = CollisionRule::LocalTimeInc;
    double gap_eps = 1e-7;

    // approx
    std::vector<std::size_t> sizes;
    std::size_t j_max = 3;
    double tol_approx = 1e-6;

    // tailbounds
    std::vector<std::size_t> m_schedule{4, 8, 16, 32};
    double alpha = 0.5;   // deviation threshold for the ascending-chain family
    double delta = 0.2;   // threshold for the weighted-infimum family (p < q)
    std::vector<double> rstar_alphas{2, 3, 4, 5, 6};
    std::size_t rstar_m = 4;
    std::size_t rstar_i = 1;
    double rstar_horizon = 2.0; // longer window fattens the tail into view

    // psi
    std::size_t psi_m = 6;
    double psi_r = 0.5;
    std::size_t psi_samples = 10000;

    nlohmann::json raw; // config echo for the manifest

    std::size_t replica_count() const { return seeds.empty() ? replicas : seeds.size(); }
    std::uint64_t seed_for(std::size_t r) const {
        return seeds.empty() ? replica_seed(base_seed, r) : seeds[r];
    }
};

namespace config_detail {

inline void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
}

inline InitialConfig parse_x0(const nlohmann::json& j) {
    require_keys(j, {"kind", "a", "chi", "b", "prefix"}, "x0_rule");
    std::vector<double> prefix;
    if (j.contains("prefix")) prefix = j["prefix"].get<std::vector<double>>();
    const std::string kind = j.value("kind", "constant");
    if (kind == "constant") return InitialConfig::constant(j.value("b", 0.0), std::move(prefix));
    if (kind == "power")
        return InitialConfig::power(j.value("a", 1.0), j.value("chi", 1.0), j.value("b", 0.0),
                                    std::move(prefix));
    throw std::invalid_argument("config: x0_rule.kind must be 'constant' or 'power'");
}

inline SystemParams parse_params(const nlohmann::json& root) {
    const double p = root.value("p", 0.5);
    std::vector<double> prefix;
    double tail = 0.0;
    if (root.contains("drifts")) {
        const auto& d = root["drifts"];
        require_keys(d, {"prefix", "tail"}, "drifts");
        if (d.contains("prefix")) prefix = d["prefix"].get<std::vector<double>>();
        tail = d.value("tail", 0.0);
    }
    return SystemParams::make(p, std::move(prefix), tail);
}

} // namespace config_detail

inline ExperimentConfig parse_config(const nlohmann::json& root, Scenario scenario) {
    using config_detail::require_keys;
    ExperimentConfig cfg;
    cfg.scenario = scenario;
    cfg.raw = root;

    std::set<std::string> allowed = {"scenario", "p",         "drifts",   "x0_rule",
                                     "T",        "n_steps",   "replicas", "base_seed",
                                     "seeds",    "out_dir",   "failure_cap", "threads",
                                     "tolerances"};
    switch (scenario) {
        case Scenario::Simulate:
        case Scenario::Verify:
            allowed.insert({"n_particles", "write_bundle"});
            break;
        case Scenario::Lpp:
            allowed.insert({"requests", "r", "n_rows"});
            break;
        case Scenario::Gue:
            allowed.insert({"m", "t", "samples", "convention"});
            break;
        case Scenario::Kstar:
            allowed.insert({"n_particles", "i", "window", "rule", "eps"});
            break;
        case Scenario::Approx:
            allowed.insert({"sizes", "j_max", "tol_approx"});
            break;
        case Scenario::Tailbounds:
            allowed.insert(
                {"m_schedule", "alpha", "delta", "rstar_alphas", "rstar_m", "rstar_i", "rstar_T"});
            break;
        case Scenario::Psi:
            allowed.insert({"m", "r", "samples"});
            break;
    }
    require_keys(root, allowed, "config");

    if (root.contains("scenario") &&
        scenario_from_string(root["scenario"].get<std::string>()) != scenario)
        throw std::invalid_argument("config: scenario key disagrees with the requested scenario");

    cfg.params = config_detail::parse_params(root);
    if (root.contains("x0_rule")) cfg.x0 = config_detail::parse_x0(root["x0_rule"]);
    cfg.horizon = root.value("T", 1.0);
    cfg.n_steps = root.value("n_steps", std::size_t{512});
    cfg.replicas = root.value("replicas", std::size_t{1});
    cfg.base_seed = root.value("base_seed", std::uint64_t{1});
    if (root.contains("seeds")) cfg.seeds = root["seeds"].get<std::vector<std::uint64_t>>();
    cfg.out_dir = root.value("out_dir", std::string("out"));
    cfg.failure_cap = root.value("failure_cap", 0.0);
    cfg.threads = root.value("threads", std::size_t{0});
    if (root.contains("tolerances")) {
        const auto& t = root["tolerances"];
        require_keys(t, {"tol_picard", "max_iter", "tol_order", "tol_id", "tol_comp"},
                     "tolerances");
        cfg.tolerances.tol_picard = t.value("tol_picard", cfg.tolerances.tol_picard);
        cfg.tolerances.max_iter = t.value("max_iter", cfg.tolerances.max_iter);
        cfg.tolerances.tol_order = t.value("tol_order", cfg.tolerances.tol_order);
        cfg.tolerances.tol_id = t.value("tol_id", cfg.tolerances.tol_id);
        cfg.tolerances.tol_comp = t.value("tol_comp", cfg.tolerances.tol_comp);
    }
    if (cfg.replica_count() == 0) throw std::invalid_argument("config: need replicas >= 1");
    if (!(cfg.horizon > 0.0)) throw std::invalid_argument("config: T must be > 0");
    if (cfg.n_steps == 0) throw std::invalid_argument("config: n_steps must be >= 1");

    switch (scenario) {
        case Scenario::Simulate:
        case Scenario::Verify:
            cfg.n_particles = root.value("n_particles", std::size_t{2});
            cfg.write_bundle = root.value("write_bundle", false);
            break;
        case Scenario::Lpp: {
            if (!root.contains("requests"))
                throw std::invalid_argument("config: lpp needs a requests array");
            cfg.lpp_r = root.value("r", 0.0);
            cfg.lpp_rows = root.value("n_rows", std::size_t{0});
            for (const auto& rq : root["requests"]) {
                require_keys(rq, {"kind", "i", "m", "j_blocks", "u", "v"}, "lpp request");
                LppRequest req;
                req.kind = rq.at("kind").get<std::string>();
                req.i = rq.value("i", std::size_t{1});
                req.m = rq.value("m", std::size_t{1});
                req.j_blocks = rq.value("j_blocks", std::size_t{0});
                req.u = rq.value("u", 0.0);
                req.v = rq.value("v", cfg.horizon);
                cfg.requests.push_back(req);
            }
            break;
        }
        case Scenario::Gue:
            cfg.gue_m = root.value("m", std::size_t{1});
            cfg.gue_t = root.value("t", 1.0);
            cfg.gue_samples = root.value("samples", std::size_t{100});
            if (root.value("convention", std::string("half_t")) == "full_t")
                cfg.gue_convention = GueVarianceConvention::FullT;
            break;
        case Scenario::Kstar:
            cfg.n_particles = root.value("n_particles", std::size_t{2});
            cfg.chain_i = root.value("i", std::size_t{1});
            if (root.contains("window")) {
                const auto& w = root["window"];
                if (!w.is_array() || w.size() != 2)
                    throw std::invalid_argument("config: window must be [u, v]");
                cfg.window_u = w[0].get<double>();
                cfg.window_v = w[1].get<double>();
            } else {
                cfg.window_u = 0.0;
                cfg.window_v = cfg.horizon;
            }
            if (root.value("rule", std::string("local_time_inc")) == "gap_eps")
                cfg.rule = CollisionRule::GapEps;
            cfg.gap_eps = root.value("eps", 1e-7);
            break;
        case Scenario::Approx:
            if (!root.contains("sizes"))
                throw std::invalid_argument("config: approx needs sizes[]");
            cfg.sizes = root["sizes"].get<std::vector<std::size_t>>();
            cfg.j_max = root.value("j_max", std::size_t{3});
            cfg.tol_approx = root.value("tol_approx", 1e-6);
            break;
        case Scenario::Tailbounds:
            if (root.contains("m_schedule"))
                cfg.m_schedule = root["m_schedule"].get<std::vector<std::size_t>>();
            cfg.alpha = root.value("alpha", 0.5);
            cfg.delta = root.value("delta", 0.2);
            if (root.contains("rstar_alphas"))
                cfg.rstar_alphas = root["rstar_alphas"].get<std::vector<double>>();
            cfg.rstar_m = root.value("rstar_m", std::size_t{4});
            cfg.rstar_i = root.value("rstar_i", std::size_t{1});
            cfg.rstar_horizon = root.value("rstar_T", 2.0);
            break;
        case Scenario::Psi:
            cfg.psi_m = root.value("m", std::size_t{6});
            cfg.psi_r = root.value("r", 0.5);
            cfg.psi_samples = root.value("samples", std::size_t{10000});
            break;
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path, Scenario scenario) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json root;
    in >> root;
    return parse_config(root, scenario);
}

} // namespace cbp

#endif // CBP_CONFIG_HPP
