// Grid solver for finite systems of competing Brownian particles.
//
// Given driving rows V_j with V_j(0) = 0 and a non-decreasing start x, the
// solution satisfies at every grid time
//
//     X_j(t) = x_j + V_j(t) + p L_{(j-1,j)}(t) - q L_{(j,j+1)}(t),
//
// with X_1 <= ... <= X_N, each L_{(j,j+1)} non-decreasing from 0 and able
// to grow only while the pair sits together.  The gap Z_j = X_{j+1} - X_j
// is the Skorokhod reflection of
//
//     D_j(t) = (x_{j+1}-x_j) + V_{j+1}(t) - V_j(t) - q L_{(j+1,j+2)}(t) - p L_{(j-1,j)}(t),
//
// i.e. L_{(j,j+1)}(t) = sup_{s<=t} [-D_j(s)]^+ with the sup over grid
// points (exact for piecewise-linear inputs evaluated at their vertices).
// solve_finite iterates this map jointly over all pairs (Picard, starting
// from L = 0) until the sup-norm update drops below tol_picard.  At p = 0
// and p = 1 the coupling is one-directional and the iteration terminates
// exactly after N sweeps; solve_p0 provides the independent closed-form
// recursion used to cross-check that case.

#ifndef CBP_SOLVER_HPP
#define CBP_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "params.hpp"
#include "path.hpp"

namespace cbp {

struct SolverTolerances {
    double tol_picard = 1e-12; // sup-norm change between sweeps
    std::size_t max_iter = 10000;
    double tol_order = 1e-9;
    double tol_id = 1e-9;
    double tol_comp = 1e-9; // scaled by max(1, max local time)
};

struct ResidualReport {
    double max_order_violation = 0.0;
    double max_identity_residual = 0.0;
    double max_complementarity = 0.0;
    std::size_t picard_iters = 0;
    bool converged = false;

    bool within(const SolverTolerances& tol, double local_time_scale) const {
        return max_order_violation <= tol.tol_order &&
               max_identity_residual <= tol.tol_id &&
               max_complementarity <= tol.tol_comp * std::max(1.0, local_time_scale);
    }
};

struct ParticleSolution {
    TimeGrid grid;
    std::size_t count = 0;                   // number of particles N
    SystemParams params;
    std::vector<double> x0;                  // starts, size N
    std::vector<std::vector<double>> X;      // X[j-1][k], j = 1..N
    std::vector<std::vector<double>> L;      // L[j-1][k], pair (j,j+1), j = 1..N-1
    std::shared_ptr<const PathBundle> driving; // rows used, kept for residual checks
    ResidualReport diagnostics;

    const std::vector<double>& position(std::size_t j) const { return X.at(j - 1); }
    const std::vector<double>& local_time(std::size_t j) const { return L.at(j - 1); }

    double max_local_time() const {
        double m = 0.0;
        for (const auto& row : L) m = std::max(m, row.back());
        return m;
    }
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, ResidualReport report)
        : std::runtime_error(what), report(report) {}
    ResidualReport report;
};

namespace detail {

inline void check_driving(const PathBundle& driving, std::size_t n) {
    if (driving.count() < n) throw std::invalid_argument("solver: driving bundle has too few rows");
    for (std::size_t j = 1; j <= n; ++j)
        if (driving.at(j, 0) != 0.0)
            throw std::invalid_argument("solver: driving rows must start at 0");
}

inline std::vector<double> check_starts(const InitialConfig& x0, std::size_t n) {
    auto x = x0.first(n);
    for (std::size_t j = 0; j + 1 < n; ++j)
        if (x[j] > x[j + 1]) throw std::invalid_argument("solver: starts must be non-decreasing");
    return x;
}

// Positions from the P1 identity; fills sol.X from sol.L and the drivers.
inline void positions_from_local_times(ParticleSolution& sol) {
    const std::size_t n = sol.count;
    const std::size_t pts = sol.grid.n_points();
    sol.X.assign(n, std::vector<double>(pts, 0.0));
    for (std::size_t j = 1; j <= n; ++j) {
        const auto& v = sol.driving->row(j);
        auto& xj = sol.X[j - 1];
        for (std::size_t k = 0; k < pts; ++k) {
            double val = sol.x0[j - 1] + v[k];
            if (j >= 2) val += sol.params.p * sol.L[j - 2][k];
            if (j <= n - 1) val -= sol.params.q * sol.L[j - 1][k];
            xj[k] = val;
        }
    }
}

} // namespace detail

// Pure re-check of the three defining residual families from raw arrays.
inline ResidualReport verify_solution(const ParticleSolution& sol,
                                      const SolverTolerances& tol = {}) {
    ResidualReport rep;
    rep.picard_iters = sol.diagnostics.picard_iters;
    const std::size_t n = sol.count;
    const std::size_t pts = sol.grid.n_points();

    for (std::size_t j = 1; j + 1 <= n; ++j)
        for (std::size_t k = 0; k < pts; ++k)
            rep.max_order_violation =
                std::max(rep.max_order_violation, sol.X[j - 1][k] - sol.X[j][k]);

    for (std::size_t j = 1; j <= n; ++j) {
        const auto& v = sol.driving->row(j);
        for (std::size_t k = 0; k < pts; ++k) {
            double rhs = sol.x0[j - 1] + v[k];
            if (j >= 2) rhs += sol.params.p * sol.L[j - 2][k];
            if (j <= n - 1) rhs -= sol.params.q * sol.L[j - 1][k];
            rep.max_identity_residual =
                std::max(rep.max_identity_residual, std::fabs(sol.X[j - 1][k] - rhs));
        }
    }

    // Discrete complementarity: a pair's local time may only grow across a
    // step whose right endpoint has the pair in contact, so we accumulate
    // gap(t_{k+1}) * (L increment over [t_k, t_{k+1}]) per pair.
    for (std::size_t j = 1; j + 1 <= n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < pts; ++k) {
            const double dl = sol.L[j - 1][k + 1] - sol.L[j - 1][k];
            if (dl < 0.0)
                rep.max_complementarity = std::max(rep.max_complementarity, -dl);
            const double gap = sol.X[j][k + 1] - sol.X[j - 1][k + 1];
            acc += std::max(gap, 0.0) * std::max(dl, 0.0);
        }
        rep.max_complementarity = std::max(rep.max_complementarity, acc);
        if (sol.L[j - 1][0] != 0.0)
            rep.max_complementarity = std::max(rep.max_complementarity, std::fabs(sol.L[j - 1][0]));
    }

    rep.converged = rep.within(tol, sol.max_local_time());
    return rep;
}

// N-particle solve by Picard iteration of the coupled pair reflections.
inline ParticleSolution solve_finite(const PathBundle& driving, const InitialConfig& x0,
                                     const SystemParams& params, std::size_t n,
                                     const SolverTolerances& tol = {}) {
    if (n == 0) throw std::invalid_argument("solve_finite: need N >= 1");
    detail::check_driving(driving, n);

    ParticleSolution sol;
    sol.grid = driving.grid;
    sol.count = n;
    sol.params = params;
    sol.x0 = detail::check_starts(x0, n);
    sol.driving = std::make_shared<PathBundle>(driving);

    const std::size_t pts = sol.grid.n_points();
    const std::size_t pairs = n - 1;
    sol.L.assign(pairs, std::vector<double>(pts, 0.0));

    std::size_t iters = 0;
    double change = 0.0;
    if (pairs > 0) {
        std::vector<std::vector<double>> next(pairs, std::vector<double>(pts, 0.0));
        for (iters = 1; iters <= tol.max_iter; ++iters) {
            change = 0.0;
            for (std::size_t j = 1; j <= pairs; ++j) {
                const auto& vup = driving.row(j + 1);
                const auto& vlo = driving.row(j);
                const double z0 = sol.x0[j] - sol.x0[j - 1];
                const std::vector<double>* lup = (j + 1 <= pairs) ? &sol.L[j] : nullptr;
                const std::vector<double>* llo = (j >= 2) ? &sol.L[j - 2] : nullptr;
                auto& out = next[j - 1];
                double running = 0.0; // max over s<=t of (-D_j(s)), floored at 0
                for (std::size_t k = 0; k < pts; ++k) {
                    double d = z0 + vup[k] - vlo[k];
                    if (lup) d -= sol.params.q * (*lup)[k];
                    if (llo) d -= sol.params.p * (*llo)[k];
                    running = std::max(running, -d);
                    out[k] = running;
                    change = std::max(change, std::fabs(out[k] - sol.L[j - 1][k]));
                }
            }
            std::swap(sol.L, next);
            if (change <= tol.tol_picard) break;
        }
    }

    detail::positions_from_local_times(sol);
    sol.diagnostics = verify_solution(sol, tol);
    sol.diagnostics.picard_iters = std::min(iters, tol.max_iter);
    sol.diagnostics.converged =
        (pairs == 0 || change <= tol.tol_picard) &&
        sol.diagnostics.within(tol, sol.max_local_time());
    if (!sol.diagnostics.converged)
        throw SolverError("solve_finite: no convergence within max_iter", sol.diagnostics);
    return sol;
}

// Fully asymmetric case p = 0 in closed form: the top particle is free and
// each lower one is the Skorokhod reflection below its neighbour,
//   X_N = x_N + V_N,
//   X_j(t) = x_j + V_j(t) + min(0, inf_{s<=t}(X_{j+1}(s) - x_j - V_j(s))).
// Exact on the grid; serves as the oracle for solve_finite at p = 0.
inline ParticleSolution solve_p0(const PathBundle& driving, const InitialConfig& x0,
                                 std::size_t n, const SolverTolerances& tol = {}) {
    if (n == 0) throw std::invalid_argument("solve_p0: need N >= 1");
    detail::check_driving(driving, n);

    ParticleSolution sol;
    sol.grid = driving.grid;
    sol.count = n;
    sol.params = SystemParams::make(0.0);
    sol.x0 = detail::check_starts(x0, n);
    sol.driving = std::make_shared<PathBundle>(driving);

    const std::size_t pts = sol.grid.n_points();
    sol.L.assign(n > 0 ? n - 1 : 0, std::vector<double>(pts, 0.0));
    sol.X.assign(n, std::vector<double>(pts, 0.0));

    {
        const auto& v = driving.row(n);
        for (std::size_t k = 0; k < pts; ++k) sol.X[n - 1][k] = sol.x0[n - 1] + v[k];
    }
    for (std::size_t j = n - 1; j >= 1; --j) {
        const auto& v = driving.row(j);
        const auto& above = sol.X[j];
        double running = 0.0; // sup of -(X_{j+1}(s) - x_j - V_j(s)), floored at 0
        for (std::size_t k = 0; k < pts; ++k) {
            const double d = above[k] - sol.x0[j - 1] - v[k];
            running = std::max(running, -d);
            sol.L[j - 1][k] = running; // q = 1: the full push lands on X_j
            sol.X[j - 1][k] = sol.x0[j - 1] + v[k] - running;
        }
    }

    sol.diagnostics = verify_solution(sol, tol);
    sol.diagnostics.picard_iters = 0;
    sol.diagnostics.converged = sol.diagnostics.within(tol, sol.max_local_time());
    return sol;
}

// Packed start: all M particles at the origin.
inline ParticleSolution solve_packed(const PathBundle& driving, const SystemParams& params,
                                     std::size_t m, const SolverTolerances& tol = {}) {
    return solve_finite(driving, InitialConfig::constant(0.0), params, m, tol);
}

} // namespace cbp

#endif // CBP_SOLVER_HPP
