#include <catch2/catch_amalgamated.hpp>

#include <functional>

#include "cbp/chains.hpp"
#include "support/oracles.hpp"

using namespace cbp;

namespace {

// exhaustive maximal chain length from the per-pair collision sets
std::size_t k_star_by_enumeration(const ParticleSolution& sol, std::size_t i, std::size_t iu,
                                  std::size_t iv, CollisionRule rule, double eps) {
    const std::size_t max_k = sol.count > i ? sol.count - i : 0;
    std::vector<std::vector<std::size_t>> coll(max_k);
    for (std::size_t k = 0; k < max_k; ++k) {
        const auto& lo = sol.position(i + k);
        const auto& hi = sol.position(i + k + 1);
        const auto& l = sol.local_time(i + k);
        for (std::size_t t = 0; t < sol.grid.n_points(); ++t) {
            const bool hit = rule == CollisionRule::GapEps
                                 ? (hi[t] - lo[t] <= eps)
                                 : ((t > 0 && l[t] > l[t - 1]) || hi[t] - lo[t] <= 1e-12);
            if (hit) coll[k].push_back(t);
        }
    }
    // a chain of length k walks pairs k-1 down to 0 through non-decreasing
    // collision times; try every combination
    std::function<bool(std::size_t, std::size_t)> feasible =
        [&](std::size_t pair, std::size_t from) -> bool {
        for (std::size_t t : coll[pair]) {
            if (t < from || t > iv) continue;
            if (pair == 0 || feasible(pair - 1, t)) return true;
        }
        return false;
    };
    std::size_t best = 0;
    for (std::size_t k = 1; k <= max_k; ++k)
        if (feasible(k - 1, iu)) best = k;
    return best;
}

} // namespace

TEST_CASE("no collisions means an empty chain") {
    auto grid = TimeGrid::uniform(1.0, 8);
    auto b = deterministic_bundle(grid,
                                  std::vector<std::vector<double>>(3, std::vector<double>(9, 0.0)));
    auto sol = solve_finite(b, InitialConfig::constant(10.0, {0.0, 5.0, 10.0}),
                            SystemParams::make(0.5), 3);
    auto rep = k_star(sol, 1, 0.0, 1.0);
    REQUIRE(rep.k_star == 0);
    REQUIRE(rep.chain_times.empty());
    REQUIRE_FALSE(rep.censored);
}

TEST_CASE("two-step cascade is detected with its exact meeting times") {
    auto sc = oracles::two_step_chain_scenario();
    auto sol = solve_finite(sc.bundle, sc.x0, sc.params, 5);
    for (auto rule : {CollisionRule::LocalTimeInc, CollisionRule::GapEps}) {
        auto rep = k_star(sol, 1, 0.0, 1.0, rule);
        REQUIRE(rep.k_star == 2);
        REQUIRE_FALSE(rep.censored);
        REQUIRE(rep.chain_times.size() == 2);
        REQUIRE(rep.chain_times[0] == Catch::Approx(0.3).margin(1e-12));
        REQUIRE(rep.chain_times[1] == Catch::Approx(0.5).margin(1e-12));

        auto cut = k_star(sol, 1, 0.0, 0.4, rule);
        REQUIRE(cut.k_star == 0); // the lower pair has not met inside the window
    }
}

TEST_CASE("packed starts census every pair as touching, hence censored") {
    auto grid = TimeGrid::uniform(0.25, 8);
    auto b = sample_brownian(grid, 4, 3);
    auto sol = solve_packed(b, SystemParams::make(0.5), 4);
    auto rep = k_star(sol, 1, 0.0, 0.25);
    REQUIRE(rep.k_star == 3); // all pairs touch at t = 0
    REQUIRE(rep.censored);
}

TEST_CASE("gap rule rejects non-positive tolerances") {
    auto sc = oracles::two_step_chain_scenario();
    auto sol = solve_finite(sc.bundle, sc.x0, sc.params, 5);
    REQUIRE_THROWS_AS(k_star(sol, 1, 0.0, 1.0, CollisionRule::GapEps, 0.0),
                      std::invalid_argument);
}

TEST_CASE("greedy chain equals exhaustive search", "[oracle]") {
    auto grid = TimeGrid::uniform(1.0, 16);
    for (int s = 0; s < 40; ++s) {
        auto b = sample_brownian(grid, 5, replica_seed(7000, s));
        auto sol = solve_finite(b, InitialConfig::power(0.15, 1.0, 0.0),
                                SystemParams::make(0.5), 5);
        for (std::size_t i : {1u, 2u}) {
            for (auto rule : {CollisionRule::LocalTimeInc, CollisionRule::GapEps}) {
                auto rep = k_star(sol, i, 0.0, 1.0, rule);
                REQUIRE(rep.k_star == k_star_by_enumeration(sol, i, 0, 16, rule, 1e-7));
            }
        }
    }
}

TEST_CASE("window widening never shrinks the chain") {
    auto grid = TimeGrid::uniform(1.0, 16);
    for (int s = 0; s < 10; ++s) {
        auto b = sample_brownian(grid, 5, replica_seed(7100, s));
        auto sol = solve_finite(b, InitialConfig::power(0.2, 1.0, 0.0),
                                SystemParams::make(0.5), 5);
        std::size_t prev = 0;
        for (std::size_t k = 4; k <= 16; k += 4) {
            auto rep = k_star(sol, 1, 0.0, grid.time(k));
            REQUIRE(rep.k_star >= prev);
            prev = rep.k_star;
        }
    }
}

TEST_CASE("decoupling: spread particles over a short horizon never interact") {
    auto grid = TimeGrid::uniform(0.25, 64);
    for (int s = 0; s < 10; ++s) {
        auto b = sample_brownian(grid, 6, replica_seed(7200, s));
        auto x0 = InitialConfig::power(5.0, 1.0, 0.0); // x_k = 5k
        auto sol = solve_finite(b, x0, SystemParams::make(0.5), 6);
        auto rep = verify_decoupling(sol, 2, 0.25, b, x0);
        REQUIRE(rep.conclusive);
        REQUIRE(rep.chain.k_star == 0);
        REQUIRE(rep.max_deviation <= 1e-9);
        REQUIRE(rep.pass);
    }
}

TEST_CASE("decoupling: the cascade scenario matches its three-particle truncation") {
    auto sc = oracles::two_step_chain_scenario();
    auto sol = solve_finite(sc.bundle, sc.x0, sc.params, 5);
    auto rep = verify_decoupling(sol, 1, 1.0, sc.bundle, sc.x0);
    REQUIRE(rep.conclusive);
    REQUIRE(rep.chain.k_star == 2);
    REQUIRE(rep.max_deviation <= 1e-9);
}

TEST_CASE("decoupling: censored chains yield no verdict") {
    auto grid = TimeGrid::uniform(0.25, 16);
    auto b = sample_brownian(grid, 3, 5);
    auto sol = solve_packed(b, SystemParams::make(0.5), 3);
    auto rep = verify_decoupling(sol, 1, 0.25, b, InitialConfig::constant(0.0));
    REQUIRE_FALSE(rep.conclusive);
}
