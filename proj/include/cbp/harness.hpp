// Monte Carlo orchestration: replica scheduling, per-scenario runners,
// output files and the run manifest.
//
// Replicas are pure functions of (config, seed), scheduled work-stealing
// style across threads; outputs are assembled in replica order so the
// bytes written never depend on the execution schedule.

#ifndef CBP_HARNESS_HPP
#define CBP_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "approx.hpp"
#include "chains.hpp"
#include "config.hpp"
#include "gue.hpp"
#include "io.hpp"
#include "lpp.hpp"
#include "stats.hpp"

namespace cbp {

inline void parallel_for(std::size_t n, std::size_t threads,
                         const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<std::size_t>(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

struct Assertion {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ReplicaFailure {
    std::size_t replica = 0;
    std::uint64_t seed = 0;
    std::string reason;
};

struct RunResult {
    bool ok = false;
    std::vector<Assertion> assertions;
    std::vector<ReplicaFailure> failures;
    std::vector<std::pair<std::string, std::string>> outputs; // name -> bytes
    std::string manifest;
};

namespace harness_detail {

// Runs the replica body over all replicas, recording failures; results are
// collected by index so output order is deterministic.
template <typename T>
std::vector<std::optional<T>> run_replicas(const ExperimentConfig& cfg,
                                           const std::function<T(std::size_t, std::uint64_t)>& body,
                                           std::vector<ReplicaFailure>& failures) {
    const std::size_t n = cfg.replica_count();
    std::vector<std::optional<T>> results(n);
    std::mutex mu;
    parallel_for(n, cfg.threads, [&](std::size_t r) {
        const std::uint64_t seed = cfg.seed_for(r);
        try {
            results[r] = body(r, seed);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(mu);
            failures.push_back({r, seed, e.what()});
        }
    });
    std::sort(failures.begin(), failures.end(),
              [](const ReplicaFailure& a, const ReplicaFailure& b) { return a.replica < b.replica; });
    return results;
}

inline PathBundle driven_bundle(const ExperimentConfig& cfg, std::uint64_t seed,
                                std::size_t rows) {
    const TimeGrid grid = TimeGrid::uniform(cfg.horizon, cfg.n_steps);
    PathBundle b = sample_brownian(grid, rows, seed);
    if (cfg.params.drift_sup_norm() > 0.0) b = drift_apply(b, cfg.params);
    return b;
}

// --- scenario bodies --------------------------------------------------------

inline void run_simulate(const ExperimentConfig& cfg, RunResult& out, bool verify_only) {
    struct Item {
        std::string solution_csv, residual_json, bundle_csv, bundle_bin;
        bool residual_ok = false;
    };
    std::function<Item(std::size_t, std::uint64_t)> body = [&](std::size_t, std::uint64_t seed) {
        PathBundle b = driven_bundle(cfg, seed, cfg.n_particles);
        ParticleSolution sol = solve_finite(b, cfg.x0, cfg.params, cfg.n_particles, cfg.tolerances);
        ResidualReport rep = verify_solution(sol, cfg.tolerances);
        Item item;
        item.residual_ok = rep.within(cfg.tolerances, sol.max_local_time());
        item.solution_csv = solution_to_csv(sol);
        item.residual_json = residual_to_json(rep);
        if (cfg.write_bundle) {
            item.bundle_csv = bundle_to_csv(b);
            item.bundle_bin = bundle_to_binary(b);
        }
        return item;
    };
    auto items = run_replicas(cfg, body, out.failures);
    bool all_ok = true;
    for (std::size_t r = 0; r < items.size(); ++r) {
        if (!items[r]) continue;
        all_ok = all_ok && items[r]->residual_ok;
        const std::string tag = "_r" + std::to_string(r);
        if (!verify_only) {
            out.outputs.emplace_back("solution" + tag + ".csv", items[r]->solution_csv);
            if (cfg.write_bundle) {
                out.outputs.emplace_back("bundle" + tag + ".csv", items[r]->bundle_csv);
                out.outputs.emplace_back("bundle" + tag + ".bin", items[r]->bundle_bin);
            }
        }
        out.outputs.emplace_back("residuals" + tag + ".json", items[r]->residual_json);
    }
    out.assertions.push_back({"residuals-within-tolerance", all_ok, ""});
}

inline void run_lpp(const ExperimentConfig& cfg, RunResult& out) {
    std::size_t rows = cfg.lpp_rows;
    for (const auto& rq : cfg.requests) {
        std::size_t need = rq.i + rq.m;
        if (rq.kind == "u") need = rq.i + rq.m + rq.j_blocks;
        rows = std::max(rows, need);
    }
    std::function<std::string(std::size_t, std::uint64_t)> body = [&](std::size_t,
                                                                      std::uint64_t seed) {
        PathBundle b = driven_bundle(cfg, seed, rows);
        std::optional<GeomWeightedPaths> g;
        auto weighted = [&]() -> const GeomWeightedPaths& {
            if (!g) g = w_paths(b, cfg.lpp_r, rows);
            return *g;
        };
        std::ostringstream os;
        os << "kind,i,M,u,v,value\n";
        for (const auto& rq : cfg.requests) {
            LppValue val;
            if (rq.kind == "vminus") val = v_minus(b, rq.i, rq.m, rq.u, rq.v);
            else if (rq.kind == "vplus") val = v_plus(b, rq.i, rq.m, rq.u, rq.v);
            else if (rq.kind == "w") val = w_functional(weighted(), rq.i, rq.m, rq.u, rq.v);
            else if (rq.kind == "j") val = j_statistic(b, weighted(), rq.i, rq.u, rq.v);
            else if (rq.kind == "rstar") val = r_star(weighted(), b, rq.i, rq.m, rq.v);
            else if (rq.kind == "u") val = u_functional(b, rq.i, rq.j_blocks, rq.m, rq.v);
            else throw std::invalid_argument("lpp: unknown request kind " + rq.kind);
            os << rq.kind << ',' << rq.i << ',' << rq.m << ',' << fmt_double(rq.u) << ','
               << fmt_double(rq.v) << ',' << fmt_double(val.value) << "\n";
        }
        return os.str();
    };
    auto items = run_replicas(cfg, body, out.failures);
    for (std::size_t r = 0; r < items.size(); ++r)
        if (items[r]) out.outputs.emplace_back("lpp_r" + std::to_string(r) + ".csv", *items[r]);
    out.assertions.push_back({"lpp-evaluated", out.failures.empty(), ""});
}

inline void run_gue(const ExperimentConfig& cfg, RunResult& out) {
    struct Row {
        std::uint64_t seed;
        double lambda;
        double residual;
    };
    ExperimentConfig sub = cfg;
    sub.replicas = cfg.gue_samples;
    sub.seeds.clear();
    std::function<Row(std::size_t, std::uint64_t)> body = [&](std::size_t, std::uint64_t seed) {
        GueSample s = sample_gue_lambda_max(cfg.gue_m, cfg.gue_t, seed, cfg.gue_convention);
        return Row{seed, s.lambda_max, s.residual};
    };
    auto items = run_replicas(sub, body, out.failures);
    std::ostringstream os;
    os << "seed,lambda_max\n";
    double max_res = 0.0;
    for (auto& it : items) {
        if (!it) continue;
        os << it->seed << ',' << fmt_double(it->lambda) << "\n";
        max_res = std::max(max_res, it->residual);
    }
    out.outputs.emplace_back("gue.csv", os.str());
    out.assertions.push_back({"eigen-residuals-below-1e-10", max_res <= 1e-10,
                              "max residual " + fmt_double(max_res)});
}

inline void run_kstar(const ExperimentConfig& cfg, RunResult& out) {
    struct Row {
        std::uint64_t seed;
        CollisionChainReport rep;
    };
    std::function<Row(std::size_t, std::uint64_t)> body = [&](std::size_t, std::uint64_t seed) {
        PathBundle b = driven_bundle(cfg, seed, cfg.n_particles);
        ParticleSolution sol = solve_finite(b, cfg.x0, cfg.params, cfg.n_particles, cfg.tolerances);
        return Row{seed, k_star(sol, cfg.chain_i, cfg.window_u, cfg.window_v, cfg.rule, cfg.gap_eps)};
    };
    auto items = run_replicas(cfg, body, out.failures);
    std::ostringstream os;
    os << "seed,i,u,v,k_star,censored\n";
    for (auto& it : items) {
        if (!it) continue;
        os << it->seed << ',' << it->rep.i << ',' << fmt_double(it->rep.window_u) << ','
           << fmt_double(it->rep.window_v) << ',' << it->rep.k_star << ','
           << (it->rep.censored ? 1 : 0) << "\n";
    }
    out.outputs.emplace_back("kstar.csv", os.str());
    out.assertions.push_back({"kstar-evaluated", out.failures.empty(), ""});
}

inline void run_approx(const ExperimentConfig& cfg, RunResult& out) {
    struct Item {
        ApproxVersion av;
        ConditionReport cond;
    };
    std::function<Item(std::size_t, std::uint64_t)> body = [&](std::size_t, std::uint64_t seed) {
        PathBundle b = driven_bundle(cfg, seed, cfg.sizes.back());
        Item item{build_approx(b, cfg.x0, cfg.params, cfg.sizes, cfg.j_max, cfg.tol_approx,
                               cfg.tolerances),
                  {}};
        item.cond = check_conditions(item.av, cfg.params, cfg.x0);
        return item;
    };
    auto items = run_replicas(cfg, body, out.failures);

    std::ostringstream conv, prof;
    conv << "seed,j,M,sup_gap\n";
    prof << "seed,M,c2a,c2b,growth\n";
    bool gaps_monotone = true, c2b_trend = true;
    for (std::size_t r = 0; r < items.size(); ++r) {
        if (!items[r]) continue;
        const auto& av = items[r]->av;
        const auto& cond = items[r]->cond;
        const std::uint64_t seed = cfg.seed_for(r);
        for (std::size_t j = 1; j <= av.j_max; ++j)
            for (std::size_t l = 0; l + 1 < av.sizes.size(); ++l) {
                conv << seed << ',' << j << ',' << av.sizes[l] << ','
                     << fmt_double(av.sup_gaps[j - 1][l]) << "\n";
                if (l > 0 && av.sup_gaps[j - 1][l] > av.sup_gaps[j - 1][l - 1] + 1e-12)
                    gaps_monotone = false;
            }
        for (std::size_t l = 0; l < cond.levels.size(); ++l) {
            prof << seed << ',' << cond.levels[l] << ',' << fmt_double(cond.c2a_profile[l]) << ','
                 << (cond.c2b_profile ? fmt_double((*cond.c2b_profile)[l]) : std::string("nan"))
                 << ',' << fmt_double(cond.growth_liminf[l]) << "\n";
        }
        if (cond.c2b_profile) c2b_trend = c2b_trend && cond.c2b_trend;
    }
    out.outputs.emplace_back("convergence.csv", conv.str());
    out.outputs.emplace_back("condition_profiles.csv", prof.str());
    out.assertions.push_back({"sup-gaps-non-increasing", gaps_monotone, ""});
    if (cfg.params.p > 0.0)
        out.assertions.push_back({"c2b-profile-trend", c2b_trend, ""});
}

inline void run_psi(const ExperimentConfig& cfg, RunResult& out) {
    const std::size_t m = cfg.psi_m;
    const double horizon = static_cast<double>(m);
    const std::size_t steps = 8 * m;
    struct Item {
        std::vector<double> psi;
        double l_pi_star, identity_gap, w_inf;
    };
    ExperimentConfig sub = cfg;
    sub.replicas = cfg.psi_samples;
    sub.seeds.clear();
    std::function<Item(std::size_t, std::uint64_t)> body = [&](std::size_t, std::uint64_t seed) {
        const TimeGrid grid = TimeGrid::uniform(horizon, steps);
        PathBundle b = sample_brownian(grid, m, seed);
        PiStarResult res = pi_star_partition(b, cfg.psi_r, m);
        const auto g = w_paths(b, cfg.psi_r, m);
        const double w_inf = w_functional(g, 1, m, 0.0, horizon).value;
        return Item{res.psi, res.l_pi_star, std::fabs(res.l_pi_star - res.identity_rhs), w_inf};
    };
    auto items = run_replicas(sub, body, out.failures);

    std::vector<std::vector<double>> psi(m - 1);
    std::vector<double> lps, winf;
    double max_gap = 0.0;
    for (auto& it : items) {
        if (!it) continue;
        for (std::size_t j = 0; j + 1 < m; ++j) psi[j].push_back(it->psi[j]);
        lps.push_back(it->l_pi_star);
        winf.push_back(it->w_inf);
        max_gap = std::max(max_gap, it->identity_gap);
    }

    // exact moments from the first sample's metadata (they are data-free)
    TimeGrid grid = TimeGrid::uniform(horizon, steps);
    PiStarResult meta = pi_star_partition(sample_brownian(grid, m, 1), cfg.psi_r, m);

    std::ostringstream os;
    os << "j,mean_psi,std_err,theory_mean,var_g1,var_g2,cov\n";
    bool within = true;
    for (std::size_t j = 0; j + 1 < m; ++j) {
        SummaryStats s = summarize(psi[j]);
        os << (j + 1) << ',' << fmt_double(s.mean) << ',' << fmt_double(s.std_err) << ','
           << fmt_double(meta.mean_psi[j]) << ',' << fmt_double(meta.var_g1[j]) << ','
           << fmt_double(meta.var_g2[j]) << ',' << fmt_double(meta.cov_g[j]) << "\n";
        within = within && std::fabs(s.mean - meta.mean_psi[j]) <= 3.0 * s.std_err;
    }
    out.outputs.emplace_back("psi.csv", os.str());
    out.assertions.push_back(
        {"identity-l-pi-star", max_gap <= 1e-9, "max gap " + fmt_double(max_gap)});
    out.assertions.push_back({"psi-means-within-3se", within, ""});
    out.assertions.push_back({"partition-dominates-infimum",
                              summarize(winf).mean <= summarize(lps).mean, ""});
}

// Empirical tail decay of the chain statistics; qualitative trends only,
// the unspecified constants of the underlying bounds are never asserted.
inline void run_tailbounds(const ExperimentConfig& cfg, RunResult& out) {
    if (!(cfg.params.p < cfg.params.q))
        throw std::invalid_argument("tailbounds: the weighted-infimum family requires p < q");
    std::ostringstream os;
    os << "family,M,param,p_hat,wilson_lo,wilson_hi\n";

    // ascending-chain deviation family: P(|V+_M/sqrt(MT) - 2| >= alpha)
    std::vector<double> vplus_phat;
    for (std::size_t m : cfg.m_schedule) {
        std::atomic<std::size_t> hits{0};
        ExperimentConfig sub = cfg;
        std::function<int(std::size_t, std::uint64_t)> body = [&](std::size_t,
                                                                  std::uint64_t seed) {
            PathBundle b = driven_bundle(cfg, seed, m);
            const double v = v_plus(b, 1, m, 0.0, cfg.horizon).value;
            const double dev =
                std::fabs(v / std::sqrt(static_cast<double>(m) * cfg.horizon) - 2.0);
            if (dev >= cfg.alpha) hits.fetch_add(1);
            return 0;
        };
        run_replicas(sub, body, out.failures);
        const auto w = wilson95(hits.load(), cfg.replica_count());
        vplus_phat.push_back(w.p_hat);
        os << "vplus," << m << ',' << fmt_double(cfg.alpha) << ',' << fmt_double(w.p_hat) << ','
           << fmt_double(w.lo) << ',' << fmt_double(w.hi) << "\n";
    }
    bool vplus_decreasing = true;
    for (std::size_t l = 0; l + 1 < vplus_phat.size(); ++l)
        vplus_decreasing = vplus_decreasing && vplus_phat[l + 1] < vplus_phat[l];
    out.assertions.push_back({"vplus-tail-decreasing", vplus_decreasing, ""});

    // weighted-infimum family, p < q only: P(W_M(1,t)/sqrt(Mt) >= -delta)
    {
        const double r = cfg.params.r();
        std::vector<WilsonInterval> ws;
        for (std::size_t m : cfg.m_schedule) {
            std::atomic<std::size_t> hits{0};
            ExperimentConfig sub = cfg;
            std::function<int(std::size_t, std::uint64_t)> body = [&](std::size_t,
                                                                      std::uint64_t seed) {
                PathBundle b = driven_bundle(cfg, seed, m);
                const auto g = w_paths(b, r, m);
                const double v = w_functional(g, 1, m, 0.0, cfg.horizon).value;
                if (v / std::sqrt(static_cast<double>(m) * cfg.horizon) >= -cfg.delta)
                    hits.fetch_add(1);
                return 0;
            };
            run_replicas(sub, body, out.failures);
            ws.push_back(wilson95(hits.load(), cfg.replica_count()));
            os << "wstar," << m << ',' << fmt_double(cfg.delta) << ',' << fmt_double(ws.back().p_hat)
               << ',' << fmt_double(ws.back().lo) << ',' << fmt_double(ws.back().hi) << "\n";
        }
        bool decreasing = true;
        for (std::size_t l = 0; l + 1 < ws.size(); ++l)
            decreasing = decreasing && ws[l + 1].p_hat <= ws[l].p_hat;
        const bool separated = ws.back().hi < ws.front().lo;
        out.assertions.push_back({"wstar-tail-decreasing", decreasing, ""});
        out.assertions.push_back({"wstar-first-last-separated", separated, ""});
    }

    // exponential tail of the running weighted supremum statistic
    {
        const double r = cfg.params.r();
        const std::size_t rows = cfg.rstar_i + cfg.rstar_m;
        ExperimentConfig sub = cfg;
        sub.horizon = cfg.rstar_horizon;
        std::function<double(std::size_t, std::uint64_t)> body = [&](std::size_t,
                                                                     std::uint64_t seed) {
            PathBundle b = driven_bundle(sub, seed, rows);
            const auto g = w_paths(b, r, rows);
            return r_star(g, b, cfg.rstar_i, cfg.rstar_m, sub.horizon).value;
        };
        auto items = run_replicas(sub, body, out.failures);
        std::vector<double> vals;
        for (auto& it : items)
            if (it) vals.push_back(*it);
        std::vector<double> logp, as;
        for (double a : cfg.rstar_alphas) {
            std::size_t hits = 0;
            for (double v : vals)
                if (v >= a) ++hits;
            const auto w = wilson95(hits, vals.size());
            os << "rstar," << cfg.rstar_m << ',' << fmt_double(a) << ',' << fmt_double(w.p_hat)
               << ',' << fmt_double(w.lo) << ',' << fmt_double(w.hi) << "\n";
            if (hits > 0) {
                as.push_back(a);
                logp.push_back(std::log(w.p_hat));
            }
        }
        // least-squares slope of log p-hat against alpha
        bool slope_ok = false;
        double slope = 0.0;
        if (as.size() >= 3) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t k = 0; k < as.size(); ++k) {
                sx += as[k];
                sy += logp[k];
                sxx += as[k] * as[k];
                sxy += as[k] * logp[k];
            }
            const double n = static_cast<double>(as.size());
            slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            slope_ok = slope <= -0.5;
        }
        out.assertions.push_back(
            {"rstar-log-slope", slope_ok, "slope " + fmt_double(slope)});
    }

    out.outputs.emplace_back("tailbounds.csv", os.str());
}

} // namespace harness_detail

// Executes a scenario over its replicas, writes the outputs plus a JSON
// manifest into cfg.out_dir, and reports per-assertion pass/fail.
// Idempotent: identical configs produce byte-identical CSV outputs.
inline RunResult run_experiment(const ExperimentConfig& cfg) {
    using namespace harness_detail;
    const auto t0 = std::chrono::steady_clock::now();
    RunResult out;
    switch (cfg.scenario) {
        case Scenario::Simulate: run_simulate(cfg, out, false); break;
        case Scenario::Verify: run_simulate(cfg, out, true); break;
        case Scenario::Lpp: run_lpp(cfg, out); break;
        case Scenario::Gue: run_gue(cfg, out); break;
        case Scenario::Kstar: run_kstar(cfg, out); break;
        case Scenario::Approx: run_approx(cfg, out); break;
        case Scenario::Tailbounds: run_tailbounds(cfg, out); break;
        case Scenario::Psi: run_psi(cfg, out); break;
    }
    const auto t1 = std::chrono::steady_clock::now();

    const double total = static_cast<double>(
        cfg.scenario == Scenario::Gue ? cfg.gue_samples
        : cfg.scenario == Scenario::Psi ? cfg.psi_samples
                                        : cfg.replica_count());
    const double frac = total > 0 ? static_cast<double>(out.failures.size()) / total : 0.0;
    bool assertions_ok = true;
    for (const auto& a : out.assertions) assertions_ok = assertions_ok && a.pass;
    out.ok = assertions_ok && frac <= cfg.failure_cap;

    nlohmann::json manifest;
    manifest["schema_version"] = 1;
    manifest["scenario"] = scenario_name(cfg.scenario);
    manifest["config"] = cfg.raw;
    manifest["ok"] = out.ok;
    manifest["wall_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    {
        nlohmann::json files = nlohmann::json::array();
        for (const auto& [name, bytes] : out.outputs) {
            char hex[20];
            std::snprintf(hex, sizeof(hex), "%016llx",
                          static_cast<unsigned long long>(fnv1a64(bytes)));
            files.push_back({{"file", name}, {"bytes", bytes.size()}, {"fnv1a64", hex}});
        }
        manifest["outputs"] = files;
    }
    {
        nlohmann::json fails = nlohmann::json::array();
        for (const auto& f : out.failures)
            fails.push_back({{"replica", f.replica}, {"seed", f.seed}, {"reason", f.reason}});
        manifest["failed_replicas"] = fails;
    }
    {
        nlohmann::json as = nlohmann::json::array();
        for (const auto& a : out.assertions)
            as.push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
        manifest["assertions"] = as;
    }
    out.manifest = manifest.dump(2) + "\n";

    std::filesystem::create_directories(cfg.out_dir);
    for (const auto& [name, bytes] : out.outputs)
        write_file(cfg.out_dir + "/" + name, bytes);
    write_file(cfg.out_dir + "/manifest.json", out.manifest);
    return out;
}

} // namespace cbp

#endif // CBP_HARNESS_HPP
