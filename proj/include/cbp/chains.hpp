// Collision chains.
//
// K*(i,[u,v]) is the largest k for which adjacent-pair meetings propagate
// influence down to particle i inside the window: there must exist times
// u <= s_{i+k-1} <= ... <= s_i <= v with pair (j,j+1) in contact at s_j.
// The greedy chain that takes each s_j as early as possible minimises
// every chain time simultaneously, so it decides feasibility of each k
// exactly.  When the chain would need pairs beyond the solved system the
// report is censored: the returned value is only a lower bound for any
// larger system.

#ifndef CBP_CHAINS_HPP
#define CBP_CHAINS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "solver.hpp"

namespace cbp {

enum class CollisionRule {
    LocalTimeInc, // pair meets at t_{k+1} when L gains over [t_k, t_{k+1}]; also at
                  // grid points where the gap is (numerically) zero
    GapEps        // pair meets at any grid point with gap <= eps
};

struct CollisionChainReport {
    std::size_t i = 0;
    double window_u = 0.0, window_v = 0.0;
    std::size_t k_star = 0;
    std::vector<double> chain_times; // s_{i+k-1} <= ... <= s_i
    bool censored = false;           // ran out of pairs; value is a lower bound
    CollisionRule rule = CollisionRule::LocalTimeInc;
};

namespace chains_detail {

// Sorted grid indices at which pair (j, j+1) is considered in contact.
inline std::vector<std::size_t> collision_indices(const ParticleSolution& sol, std::size_t j,
                                                  CollisionRule rule, double eps) {
    const auto& lo = sol.position(j);
    const auto& hi = sol.position(j + 1);
    const std::size_t pts = sol.grid.n_points();
    std::vector<std::size_t> out;
    if (rule == CollisionRule::GapEps) {
        for (std::size_t k = 0; k < pts; ++k)
            if (hi[k] - lo[k] <= eps) out.push_back(k);
    } else {
        const auto& l = sol.local_time(j);
        const double touch = 1e-12 * std::max(1.0, std::fabs(hi[0]) + std::fabs(lo[0]));
        for (std::size_t k = 0; k < pts; ++k) {
            const bool grew = k > 0 && l[k] > l[k - 1];
            const bool touching = hi[k] - lo[k] <= touch;
            if (grew || touching) out.push_back(k);
        }
    }
    return out;
}

// First collision index >= from, or nothing.
inline std::optional<std::size_t> first_at_or_after(const std::vector<std::size_t>& coll,
                                                    std::size_t from) {
    auto it = std::lower_bound(coll.begin(), coll.end(), from);
    if (it == coll.end()) return std::nullopt;
    return *it;
}

} // namespace chains_detail

inline CollisionChainReport k_star(const ParticleSolution& sol, std::size_t i, double u, double v,
                                   CollisionRule rule = CollisionRule::LocalTimeInc,
                                   double eps = 1e-7) {
    if (i == 0) throw std::invalid_argument("k_star: i is 1-based");
    if (rule == CollisionRule::GapEps && !(eps > 0.0))
        throw std::invalid_argument("k_star: gap rule needs eps > 0");
    const std::size_t iu = sol.grid.index_of(u);
    const std::size_t iv = sol.grid.index_of(v);
    if (iu > iv) throw std::invalid_argument("k_star: window requires u <= v");

    CollisionChainReport rep;
    rep.i = i;
    rep.window_u = u;
    rep.window_v = v;
    rep.rule = rule;

    const std::size_t max_k = sol.count > i ? sol.count - i : 0;

    // collision index sets for pairs (j, j+1), cached per pair
    std::vector<std::vector<std::size_t>> coll(max_k);
    for (std::size_t k = 0; k < max_k; ++k)
        coll[k] = chains_detail::collision_indices(sol, i + k, rule, eps);

    std::vector<double> best_chain;
    std::size_t feasible_k = 0;
    for (std::size_t k = 1; k <= max_k; ++k) {
        // greedy: earliest chain for length k, scanning pairs from the top
        std::size_t at = iu;
        std::vector<double> chain(k);
        bool ok = true;
        for (std::size_t step = 0; step < k; ++step) {
            const std::size_t pair = i + k - 1 - step; // pair (pair, pair+1)
            auto hit = chains_detail::first_at_or_after(coll[pair - i], at);
            if (!hit || *hit > iv) {
                ok = false;
                break;
            }
            at = *hit;
            chain[step] = sol.grid.time(at);
        }
        if (!ok) break;
        feasible_k = k;
        best_chain = std::move(chain);
    }

    rep.k_star = feasible_k;
    rep.chain_times = std::move(best_chain);
    // every available pair was consumed by a feasible chain, so a larger
    // system could extend it: only a lower bound is known
    rep.censored = (feasible_k == max_k);
    return rep;
}

struct DecouplingReport {
    CollisionChainReport chain;
    bool conclusive = false;   // false when the chain was censored
    double max_deviation = 0.0; // max over rows 1..i, grid times <= T
    bool pass = false;
};

// If influence from above particle i propagates through at most K* pair
// meetings on [0, T], then the first i rows coincide with the
// (i + K*)-particle truncation solved on the same drivers.  Re-solves the
// truncation and measures the deviation.
inline DecouplingReport verify_decoupling(const ParticleSolution& big, std::size_t i,
                                          double horizon, const PathBundle& driving,
                                          const InitialConfig& x0,
                                          CollisionRule rule = CollisionRule::LocalTimeInc,
                                          double eps = 1e-7, double tol = 1e-9,
                                          const SolverTolerances& stol = {}) {
    DecouplingReport rep;
    rep.chain = k_star(big, i, 0.0, horizon, rule, eps);
    if (rep.chain.censored) {
        rep.conclusive = false;
        return rep;
    }
    rep.conclusive = true;
    const std::size_t m = i + rep.chain.k_star;
    ParticleSolution trunc = solve_finite(driving, x0, big.params, m, stol);
    const std::size_t kt = big.grid.index_of(horizon);
    for (std::size_t j = 1; j <= i; ++j) {
        const auto& a = big.position(j);
        const auto& b = trunc.position(j);
        for (std::size_t k = 0; k <= kt; ++k)
            rep.max_deviation = std::max(rep.max_deviation, std::fabs(a[k] - b[k]));
    }
    rep.pass = rep.max_deviation <= tol;
    return rep;
}

} // namespace cbp

#endif // CBP_CHAINS_HPP
