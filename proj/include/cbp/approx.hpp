// Approximative versions of the infinite system and growth-condition
// diagnostics.
//
// Finite truncations of increasing size, solved on one shared driving
// bundle, sit pathwise above one another (a larger system pushes every
// watched particle down or leaves it in place).  The truncations converge
// uniformly on compacts to the infinite solution; build_approx records the
// monotone decrease and the Cauchy gaps between consecutive levels.  All
// asymptotic conditions are reported as finite-M profiles with trend
// flags, never as boolean truths about limits.

#ifndef CBP_APPROX_HPP
#define CBP_APPROX_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lpp.hpp"
#include "solver.hpp"

namespace cbp {

struct ApproxVersion {
    std::vector<std::size_t> sizes;          // M_1 < M_2 < ...
    std::vector<ParticleSolution> truncations;
    std::size_t j_max = 0;
    double tol_approx = 0.0;
    // sup_gaps[j-1][l] = sup_t |X_j^{M_{l+1}}(t) - X_j^{M_l}(t)|
    std::vector<std::vector<double>> sup_gaps;
    // converged_at[j-1] = smallest level size whose gap to the next level
    // already fell below tol_approx (0 when never)
    std::vector<std::size_t> converged_at;
    double max_monotonicity_violation = 0.0; // of X_j^{M'} <= X_j^{M}, M' >= M

    const ParticleSolution& largest() const { return truncations.back(); }
};

inline ApproxVersion build_approx(const PathBundle& driving, const InitialConfig& x0,
                                  const SystemParams& params, std::vector<std::size_t> sizes,
                                  std::size_t j_max, double tol_approx,
                                  const SolverTolerances& stol = {}) {
    if (sizes.size() < 2) throw std::invalid_argument("build_approx: need at least two sizes");
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
        if (!(sizes[l] < sizes[l + 1]))
            throw std::invalid_argument("build_approx: sizes must increase");
    if (j_max == 0 || j_max > sizes.front())
        throw std::invalid_argument("build_approx: j_max must be in [1, min size]");

    ApproxVersion av;
    av.sizes = std::move(sizes);
    av.j_max = j_max;
    av.tol_approx = tol_approx;
    av.truncations.reserve(av.sizes.size());
    for (std::size_t m : av.sizes)
        av.truncations.push_back(solve_finite(driving, x0, params, m, stol));

    const std::size_t levels = av.sizes.size();
    const std::size_t pts = driving.grid.n_points();
    av.sup_gaps.assign(j_max, std::vector<double>(levels - 1, 0.0));
    av.converged_at.assign(j_max, 0);
    for (std::size_t j = 1; j <= j_max; ++j) {
        for (std::size_t l = 0; l + 1 < levels; ++l) {
            const auto& small = av.truncations[l].position(j);
            const auto& large = av.truncations[l + 1].position(j);
            double gap = 0.0, viol = 0.0;
            for (std::size_t k = 0; k < pts; ++k) {
                gap = std::max(gap, std::fabs(small[k] - large[k]));
                viol = std::max(viol, large[k] - small[k]); // larger system must sit below
            }
            av.sup_gaps[j - 1][l] = gap;
            av.max_monotonicity_violation = std::max(av.max_monotonicity_violation, viol);
        }
        for (std::size_t l = 0; l + 1 < levels; ++l) {
            if (av.sup_gaps[j - 1][l] <= tol_approx) {
                av.converged_at[j - 1] = av.sizes[l];
                break;
            }
        }
    }
    if (av.max_monotonicity_violation > 1e-9)
        throw SolverError("build_approx: truncation monotonicity violated",
                          av.largest().diagnostics);
    return av;
}

// Variational solution of the fully asymmetric (p = 0) infinite system:
//   X_n(t) = inf_{n <= k <= k_max} ( x_k + Y_{n,k}(t) ),
// where Y_{n,k} is the descending-chain infimum over rows n..k.  Exact on
// the grid and equal, for k_max = M, to the M-particle p = 0 solution.
struct P0InfiniteResult {
    TimeGrid grid;
    std::size_t k_max = 0;
    std::vector<std::vector<double>> X;        // watched rows 1..n_watch
    std::vector<std::vector<std::size_t>> arg_k; // minimising k per (row, time)
    bool saturated = false; // some argmin hit k_max: infimum may not be localised
};

inline P0InfiniteResult solve_p0_infinite(const PathBundle& driving, const InitialConfig& x0,
                                          std::size_t n_watch, std::size_t k_max) {
    if (n_watch == 0 || k_max < n_watch)
        throw std::invalid_argument("solve_p0_infinite: need 1 <= n_watch <= k_max");
    if (!x0.admissible_tail())
        throw std::invalid_argument(
            "solve_p0_infinite: tail rule must grow like a*k^chi with a > 0, chi > 1/2");
    detail::check_driving(driving, k_max);

    P0InfiniteResult res;
    res.grid = driving.grid;
    res.k_max = k_max;
    const std::size_t pts = res.grid.n_points();
    res.X.assign(n_watch, std::vector<double>(pts, 0.0));
    res.arg_k.assign(n_watch, std::vector<std::size_t>(pts, 0));

    for (std::size_t n = 1; n <= n_watch; ++n) {
        auto& xn = res.X[n - 1];
        auto& ak = res.arg_k[n - 1];
        // k = n term: x_n + V_n(t)
        {
            const auto& v = driving.row(n);
            for (std::size_t t = 0; t < pts; ++t) {
                xn[t] = x0.x(n) + v[t];
                ak[t] = n;
            }
        }
        // deeper terms: running DP profile of the chain infimum in t
        lpp_detail::Rows rows;
        std::vector<double> d;
        for (std::size_t k = n + 1; k <= k_max; ++k) {
            // extend the chain by row k at the earliest interval: rows are
            // ordered top row first, so prepend by recomputing the profile
            rows.clear();
            for (std::size_t rr = k; rr >= n; --rr) rows.push_back(&driving.row(rr));
            d = lpp_detail::chain_min_profile(rows, 0, pts - 1);
            const double xk = x0.x(k);
            for (std::size_t t = 0; t < pts; ++t) {
                const double cand = xk + d[t];
                if (cand < xn[t]) {
                    xn[t] = cand;
                    ak[t] = k;
                }
            }
        }
        for (std::size_t t = 0; t < pts; ++t)
            if (ak[t] == k_max) res.saturated = true;
    }
    return res;
}

struct ConditionThresholds {
    double c2a_margin = 1e-9;  // profile entries <= margin count toward the flag
    double c2b_tol = 1e-12;    // absolute slack for the trend comparison
    double growth_ref = 1.0;   // x_M/sqrt(M) compared against this level
};

struct ConditionReport {
    double c1a_value = 0.0; // sup_j |g_j|
    bool c1a_pass = false;
    double c1b_value = 0.0; // sum_j g_j^2 (infinite unless the tail vanishes)
    bool c1b_pass = false;
    std::vector<std::size_t> levels; // M values the profiles are sampled at
    std::vector<double> c2a_profile; // sup_s (q L_{(M,M+1)} - p L_{(M-1,M)})/(1 v X_M(0))
    bool c2a_trend = false;          // final entries within margin of <= 0
    std::optional<std::vector<double>> c2b_profile; // (q/p)^M L_{(M,M+1)}(T); absent at p = 0
    bool c2b_trend = false;          // non-increasing over the last three levels
    std::vector<double> growth_liminf; // x_M / sqrt(M) per level
    std::vector<double> growth_limsup; // same samples, kept separately per contract
    bool growth_liminf_trend = false;  // profile non-decreasing and above growth_ref
    bool growth_limsup_trend = false;  // profile unbounded-looking: last entry is the max
};

// Finite-M diagnostics of the asymptotic growth conditions, computed from
// the largest truncation's local times at the schedule indices.
inline ConditionReport check_conditions(const ApproxVersion& av, const SystemParams& params,
                                        const InitialConfig& x0,
                                        const ConditionThresholds& thr = {}) {
    if (av.sizes.size() < 3)
        throw std::invalid_argument("check_conditions: need at least three truncation levels");
    ConditionReport rep;
    rep.c1a_value = params.drift_sup_norm();
    rep.c1a_pass = std::isfinite(rep.c1a_value);
    rep.c1b_value = params.drift_sq_sum();
    rep.c1b_pass = std::isfinite(rep.c1b_value);

    const ParticleSolution& big = av.largest();
    const std::size_t pts = big.grid.n_points();
    for (std::size_t m : av.sizes)
        if (m + 1 <= big.count) rep.levels.push_back(m);

    for (std::size_t m : rep.levels) {
        const auto& l_up = big.local_time(m);         // pair (M, M+1)
        const std::vector<double>* l_down = m >= 2 ? &big.local_time(m - 1) : nullptr;
        const double denom = std::max(1.0, big.x0[m - 1]);
        double c2a = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < pts; ++k) {
            const double num =
                params.q * l_up[k] - params.p * (l_down ? (*l_down)[k] : 0.0);
            c2a = std::max(c2a, num / denom);
        }
        rep.c2a_profile.push_back(c2a);
        rep.growth_liminf.push_back(x0.x(m) / std::sqrt(static_cast<double>(m)));
    }
    rep.growth_limsup = rep.growth_liminf;

    rep.c2a_trend = !rep.c2a_profile.empty() && rep.c2a_profile.back() <= thr.c2a_margin;

    if (params.p > 0.0) {
        const double sigma = params.sigma();
        std::vector<double> prof;
        for (std::size_t m : rep.levels)
            prof.push_back(std::pow(sigma, static_cast<double>(m)) * big.local_time(m).back());
        // trend over the last (up to) three sampled levels: entries must be
        // non-increasing once the first pair with realised collisions is
        // reached -- a pair that never collided contributes a structural
        // zero and says nothing about the geometric decay
        const std::size_t lo = prof.size() >= 3 ? prof.size() - 3 : 0;
        std::size_t first = lo;
        while (first < prof.size() && prof[first] <= thr.c2b_tol) ++first;
        bool ok = prof.size() >= 2;
        for (std::size_t l = first; ok && l + 1 < prof.size(); ++l)
            ok = prof[l + 1] <= prof[l] + thr.c2b_tol;
        rep.c2b_trend = ok;
        rep.c2b_profile = std::move(prof);
    }

    bool incr = true;
    for (std::size_t l = 0; l + 1 < rep.growth_liminf.size(); ++l)
        incr = incr && rep.growth_liminf[l + 1] >= rep.growth_liminf[l] - 1e-12;
    rep.growth_liminf_trend =
        incr && !rep.growth_liminf.empty() && rep.growth_liminf.back() >= thr.growth_ref;
    rep.growth_limsup_trend =
        !rep.growth_limsup.empty() &&
        rep.growth_limsup.back() >=
            *std::max_element(rep.growth_limsup.begin(), rep.growth_limsup.end()) - 1e-12;
    return rep;
}

} // namespace cbp

#endif // CBP_APPROX_HPP
