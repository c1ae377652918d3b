// Last-passage functionals on grid paths.
//
// Everything here is an extremum of sums of row increments over ordered
// time chains.  For piecewise-linear rows the objective is piecewise
// linear in each chain time, so optima are attained at grid points and the
// dynamic programs below are exact, not approximations.  The shared kernel
// optimises
//
//     sum_m  R_m(e_{m+1}) - R_m(e_m)   over  u = e_0 <= e_1 <= ... <= e_M = v
//
// by a prefix-extremum sweep per row, O(M n) total.  Ties are broken
// toward the earliest time at every stage, which makes optimiser chains
// deterministic.

#ifndef CBP_LPP_HPP
#define CBP_LPP_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "path.hpp"
#include "solver.hpp"

namespace cbp {

enum class LppKind { Vminus, Vplus, W, Wstar, U, Rstar, Istar, J };

struct LppValue {
    LppKind kind = LppKind::Vminus;
    double value = 0.0;
    std::vector<double> argchain; // one optimising time per free chain variable
};

namespace lpp_detail {

using Rows = std::vector<const std::vector<double>*>;

struct ChainResult {
    double value = 0.0;
    std::vector<std::size_t> interior; // grid indices of e_1..e_{M-1}
};

// Extremum of the chain objective with both endpoints pinned.
inline ChainResult chain_extremum(const Rows& rows, std::size_t ia, std::size_t iv,
                                  bool maximize) {
    const std::size_t m_rows = rows.size();
    const std::size_t na = iv - ia + 1;
    const double sign = maximize ? -1.0 : 1.0; // minimise sign*objective

    std::vector<double> d(na);
    for (std::size_t a = 0; a < na; ++a)
        d[a] = sign * ((*rows[0])[ia + a] - (*rows[0])[ia]);

    std::vector<std::vector<std::uint32_t>> back(
        m_rows >= 2 ? m_rows - 1 : 0, std::vector<std::uint32_t>(na, 0));
    for (std::size_t m = 1; m < m_rows; ++m) {
        const auto& r = *rows[m];
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_at = 0;
        for (std::size_t a = 0; a < na; ++a) {
            const double cand = d[a] - sign * r[ia + a];
            if (cand < best) {
                best = cand;
                best_at = static_cast<std::uint32_t>(a);
            }
            d[a] = best + sign * r[ia + a];
            back[m - 1][a] = best_at;
        }
    }

    ChainResult res;
    res.value = sign * d[na - 1];
    if (m_rows >= 2) {
        res.interior.resize(m_rows - 1);
        std::size_t a = na - 1;
        for (std::size_t m = m_rows - 1; m >= 1; --m) {
            a = back[m - 1][a];
            res.interior[m - 1] = ia + a;
        }
    }
    return res;
}

// d[a] = value of the minimising chain on the window [u, t_{ia+a}];
// one entry per grid point of [u, v].
inline std::vector<double> chain_min_profile(const Rows& rows, std::size_t ia, std::size_t iv) {
    const std::size_t na = iv - ia + 1;
    std::vector<double> d(na);
    for (std::size_t a = 0; a < na; ++a) d[a] = (*rows[0])[ia + a] - (*rows[0])[ia];
    for (std::size_t m = 1; m < rows.size(); ++m) {
        const auto& r = *rows[m];
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < na; ++a) {
            best = std::min(best, d[a] - r[ia + a]);
            d[a] = best + r[ia + a];
        }
    }
    return d;
}

// t[a] = value of the minimising chain on the window [t_{ia+a}, v].
inline std::vector<double> chain_min_suffix_profile(const Rows& rows, std::size_t ia,
                                                    std::size_t iv) {
    const std::size_t na = iv - ia + 1;
    const std::size_t m_rows = rows.size();
    std::vector<double> t(na);
    {
        const auto& r = *rows[m_rows - 1];
        for (std::size_t a = 0; a < na; ++a) t[a] = r[iv] - r[ia + a];
    }
    for (std::size_t m = m_rows - 1; m >= 1; --m) {
        const auto& r = *rows[m - 1];
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = na; a >= 1; --a) {
            best = std::min(best, t[a - 1] + r[ia + a - 1]);
            t[a - 1] = best - r[ia + a - 1];
        }
    }
    return t;
}

// Rows of a descending chain optimum of length M anchored at particle i:
// the summands run over rows i+M-1 (earliest times) down to i (latest).
inline Rows descending_rows(const PathBundle& b, std::size_t i, std::size_t m) {
    if (i == 0 || m == 0) throw std::invalid_argument("lpp: indices are 1-based, M >= 1");
    if (i + m - 1 > b.count()) throw std::invalid_argument("lpp: bundle has too few rows");
    Rows rows(m);
    for (std::size_t s = 0; s < m; ++s) rows[s] = &b.row(i + m - 1 - s);
    return rows;
}

inline void check_window(const TimeGrid& grid, double u, double v, std::size_t& ia,
                         std::size_t& iv) {
    ia = grid.index_of(u);
    iv = grid.index_of(v);
    if (ia >= iv) throw std::invalid_argument("lpp: window requires u < v");
}

} // namespace lpp_detail

// Descending-chain infimum over rows i..i+M-1 on the window [u, v]:
//   inf { sum_{j=i}^{i+M-1} V_j(s_{j-1}) - V_j(s_j) :
//         u <= s_{i+M-2} <= ... <= s_i <= v },  s_{i+M-1} = u, s_{i-1} = v.
// argchain holds (s_i, ..., s_{i+M-2}): non-increasing times.
inline LppValue v_minus(const PathBundle& b, std::size_t i, std::size_t m, double u, double v) {
    std::size_t ia, iv;
    lpp_detail::check_window(b.grid, u, v, ia, iv);
    auto rows = lpp_detail::descending_rows(b, i, m);
    auto res = lpp_detail::chain_extremum(rows, ia, iv, false);
    LppValue out;
    out.kind = LppKind::Vminus;
    out.value = res.value;
    out.argchain.resize(res.interior.size());
    for (std::size_t s = 0; s < res.interior.size(); ++s) // by particle index j = i, i+1, ...
        out.argchain[s] = b.grid.time(res.interior[res.interior.size() - 1 - s]);
    return out;
}

// Ascending-chain supremum, the mirror of v_minus:
//   sup { sum_{j=i}^{i+M-1} V_j(t_j) - V_j(t_{j-1}) :
//         u <= t_i <= ... <= t_{i+M-2} <= v },  t_{i-1} = u, t_{i+M-1} = v.
// With zero drift this is Brownian last passage percolation across M rows.
inline LppValue v_plus(const PathBundle& b, std::size_t i, std::size_t m, double u, double v) {
    std::size_t ia, iv;
    lpp_detail::check_window(b.grid, u, v, ia, iv);
    if (i == 0 || m == 0) throw std::invalid_argument("lpp: indices are 1-based, M >= 1");
    if (i + m - 1 > b.count()) throw std::invalid_argument("lpp: bundle has too few rows");
    lpp_detail::Rows rows(m);
    for (std::size_t s = 0; s < m; ++s) rows[s] = &b.row(i + s);
    auto res = lpp_detail::chain_extremum(rows, ia, iv, true);
    LppValue out;
    out.kind = LppKind::Vplus;
    out.value = res.value;
    out.argchain.resize(res.interior.size());
    for (std::size_t s = 0; s < res.interior.size(); ++s) // t_i <= ... <= t_{i+M-2}
        out.argchain[s] = b.grid.time(res.interior[s]);
    return out;
}

// v_plus(i, [0, t_a]) for every grid point t_a of [0, T]; used by the
// geometric local-time bound which needs the whole running profile.
inline std::vector<double> v_plus_profile(const PathBundle& b, std::size_t i, std::size_t m,
                                          double horizon) {
    const std::size_t iv = b.grid.index_of(horizon);
    if (i == 0 || m == 0) throw std::invalid_argument("lpp: indices are 1-based, M >= 1");
    if (i + m - 1 > b.count()) throw std::invalid_argument("lpp: bundle has too few rows");
    // sup chain = -(min chain on negated rows), same row-to-interval order
    std::vector<std::vector<double>> neg(m);
    lpp_detail::Rows rows(m);
    for (std::size_t s = 0; s < m; ++s) {
        const auto& src = b.row(i + s);
        neg[s].assign(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(iv + 1));
        for (double& x : neg[s]) x = -x;
        rows[s] = &neg[s];
    }
    auto prof = lpp_detail::chain_min_profile(rows, 0, iv);
    for (double& x : prof) x = -x;
    return prof;
}

// Geometrically weighted paths W_k(t) = sum_{j<=k} r^{k-j} V_j(t), built by
// the exact recurrence W_k = r W_{k-1} + V_k.
struct GeomWeightedPaths {
    TimeGrid grid;
    double r = 0.0;
    std::vector<std::vector<double>> w; // w[k-1] = W_k

    const std::vector<double>& row(std::size_t k) const { // 1-based
        if (k == 0 || k > w.size()) throw std::out_of_range("GeomWeightedPaths: row index");
        return w[k - 1];
    }
};

inline GeomWeightedPaths w_paths(const PathBundle& b, double r, std::size_t k_max) {
    if (r < 0.0) throw std::invalid_argument("w_paths: r must be >= 0");
    if (k_max == 0 || k_max > b.count()) throw std::invalid_argument("w_paths: bad k_max");
    GeomWeightedPaths g;
    g.grid = b.grid;
    g.r = r;
    g.w.assign(k_max, std::vector<double>(b.grid.n_points(), 0.0));
    for (std::size_t k = 1; k <= k_max; ++k) {
        const auto& v = b.row(k);
        auto& wk = g.w[k - 1];
        if (k == 1) {
            wk = v;
        } else {
            const auto& prev = g.w[k - 2];
            for (std::size_t t = 0; t < wk.size(); ++t) wk[t] = r * prev[t] + v[t];
        }
    }
    return g;
}

// Same descending-chain infimum as v_minus, on the weighted rows W_k.
inline LppValue w_functional(const GeomWeightedPaths& g, std::size_t i, std::size_t m, double u,
                             double v) {
    std::size_t ia, iv;
    lpp_detail::check_window(g.grid, u, v, ia, iv);
    if (i == 0 || m == 0 || i + m - 1 > g.w.size())
        throw std::invalid_argument("w_functional: bad row range");
    lpp_detail::Rows rows(m);
    for (std::size_t s = 0; s < m; ++s) rows[s] = &g.row(i + m - 1 - s);
    auto res = lpp_detail::chain_extremum(rows, ia, iv, false);
    LppValue out;
    out.kind = LppKind::W;
    out.value = res.value;
    out.argchain.resize(res.interior.size());
    for (std::size_t s = 0; s < res.interior.size(); ++s)
        out.argchain[s] = g.grid.time(res.interior[res.interior.size() - 1 - s]);
    return out;
}

// Geometric partial sum 1 + r + ... + r^{k-1}, with the r = 1 limit k.
inline double alpha_k(double r, std::size_t k) {
    if (r < 0.0) throw std::invalid_argument("alpha_k: r must be >= 0");
    if (r == 1.0) return static_cast<double>(k);
    return (1.0 - std::pow(r, static_cast<double>(k))) / (1.0 - r);
}

// Scaled running supremum combining a weighted path with chain infima:
//   J(i,[u,v]) = (v-u)^{-1/2} sup_{u<=s<=v} ( -Vm_i(1,[u,s]) + W_i(s) - W_i(u)
//                  - sum_{j<i} r^{i-j} Vm_{i-j+1}(j,[u,s]) ),
// where Vm is the descending-chain infimum on the unweighted rows.
inline LppValue j_statistic(const PathBundle& b, const GeomWeightedPaths& g, std::size_t i,
                            double u, double v) {
    std::size_t ia, iv;
    lpp_detail::check_window(b.grid, u, v, ia, iv);
    if (i == 0 || i > g.w.size()) throw std::invalid_argument("j_statistic: bad i");
    const std::size_t na = iv - ia + 1;
    const auto& wi = g.row(i);

    std::vector<double> s_profile(na, 0.0);
    for (std::size_t a = 0; a < na; ++a) s_profile[a] = wi[ia + a] - wi[ia];
    {
        auto rows = lpp_detail::descending_rows(b, 1, i); // chain of length i from row 1
        auto prof = lpp_detail::chain_min_profile(rows, ia, iv);
        for (std::size_t a = 0; a < na; ++a) s_profile[a] -= prof[a];
    }
    for (std::size_t j = 1; j + 1 <= i; ++j) {
        auto rows = lpp_detail::descending_rows(b, j, i - j + 1);
        auto prof = lpp_detail::chain_min_profile(rows, ia, iv);
        const double wgt = std::pow(g.r, static_cast<double>(i - j));
        for (std::size_t a = 0; a < na; ++a) s_profile[a] -= wgt * prof[a];
    }

    std::size_t best_a = 0;
    for (std::size_t a = 1; a < na; ++a)
        if (s_profile[a] > s_profile[best_a]) best_a = a;
    LppValue out;
    out.kind = LppKind::J;
    out.value = s_profile[best_a] / std::sqrt(v - u);
    out.argchain = {b.grid.time(ia + best_a)};
    return out;
}

// Running supremum of the weighted-path terminal increment against the
// suffix-window chain infima:
//   R*_M(i,T) = sup_{0<=s<=T} { W_{i+M}(T) - W_{i+M}(s)
//                 - sum_{j=1}^{i+M-1} r^{i+M-j} Vm_{i+M-j+1}(j,[s,T]) }.
// Non-negative: the s = T term vanishes identically.
inline LppValue r_star(const GeomWeightedPaths& g, const PathBundle& b, std::size_t i,
                       std::size_t m, double horizon) {
    const std::size_t iv = b.grid.index_of(horizon);
    if (iv == 0) throw std::invalid_argument("r_star: horizon must be > 0");
    const std::size_t top = i + m;
    if (i == 0 || m == 0 || top > b.count() || top > g.w.size())
        throw std::invalid_argument("r_star: bad row range");
    const std::size_t na = iv + 1;
    const auto& wtop = g.row(top);

    std::vector<double> val(na);
    for (std::size_t a = 0; a < na; ++a) val[a] = wtop[iv] - wtop[a];
    for (std::size_t j = 1; j <= top - 1; ++j) {
        auto rows = lpp_detail::descending_rows(b, j, top - j + 1);
        auto prof = lpp_detail::chain_min_suffix_profile(rows, 0, iv);
        const double wgt = std::pow(g.r, static_cast<double>(top - j));
        for (std::size_t a = 0; a < na; ++a) val[a] -= wgt * prof[a];
    }

    std::size_t best_a = 0;
    for (std::size_t a = 1; a < na; ++a)
        if (val[a] > val[best_a]) best_a = a;
    LppValue out;
    out.kind = LppKind::Rstar;
    out.value = val[best_a];
    out.argchain = {b.grid.time(best_a)};
    return out;
}

// Supremum over interleaved blocks of ascending chains: (M+1) particle
// blocks, each visiting rows k..k+j, laid head-to-tail into one totally
// ordered chain of (j+1)(M+1) times pinned to 0 and T at the ends.  Each
// summand takes the row value at the previous chain time minus the value
// at its own time, so the whole objective is the negated minimising chain
// over the flattened row order.
inline LppValue u_functional(const PathBundle& b, std::size_t i, std::size_t j, std::size_t m,
                             double horizon) {
    const std::size_t iv = b.grid.index_of(horizon);
    if (i == 0) throw std::invalid_argument("u_functional: i is 1-based");
    if (j + m == 0) throw std::invalid_argument("u_functional: need j + M >= 1");
    if (i + m + j > b.count()) throw std::invalid_argument("u_functional: bundle too small");
    const std::size_t positions = (j + 1) * (m + 1);
    lpp_detail::Rows rows;
    rows.reserve(positions - 1);
    for (std::size_t pos = 1; pos < positions; ++pos) {
        const std::size_t block = pos / (j + 1);   // blocks run top particle first
        const std::size_t offset = pos % (j + 1);
        rows.push_back(&b.row(i + m - block + offset));
    }
    auto res = lpp_detail::chain_extremum(rows, 0, iv, false);
    LppValue out;
    out.kind = LppKind::U;
    out.value = -res.value;
    out.argchain.resize(res.interior.size());
    for (std::size_t s = 0; s < res.interior.size(); ++s)
        out.argchain[s] = b.grid.time(res.interior[s]);
    return out;
}

// Running minimum of the solved trajectory of particle i+M on [0, T].
inline double i_star(const ParticleSolution& sol, std::size_t i, std::size_t m, double horizon) {
    const std::size_t top = i + m;
    if (i == 0 || top > sol.count) throw std::out_of_range("i_star: particle index");
    const std::size_t iv = sol.grid.index_of(horizon);
    const auto& row = sol.position(top);
    double best = row[0];
    for (std::size_t k = 1; k <= iv; ++k) best = std::min(best, row[k]);
    return best;
}

// Greedy two-point partition of [0, M] built from the weighted increments
// over unit intervals, together with the realized minima Psi_j and their
// exact Gaussian moments.  Requires a zero-drift bundle whose grid contains
// the integers 0..M; r must lie in [0, 1).
struct PiStarResult {
    std::vector<double> partition;  // s*_0 = M >= s*_1 >= ... >= s*_M = 0
    std::vector<double> g1, g2;     // realized weighted increments, j = 1..M-1
    std::vector<double> psi;        // min(G1_j, G2_j)
    double l_pi_star = 0.0;         // objective of the greedy partition
    double identity_rhs = 0.0;      // W_M(1) + sum_j psi_j, equals l_pi_star
    std::vector<double> var_g1, var_g2, cov_g, mean_psi; // exact moments
};

inline PiStarResult pi_star_partition(const PathBundle& b, double r, std::size_t m) {
    if (!(r >= 0.0 && r < 1.0))
        throw std::invalid_argument("pi_star_partition: requires 0 <= r < 1");
    if (b.kind == PathKind::Driven)
        throw std::invalid_argument("pi_star_partition: needs a zero-drift bundle");
    if (m == 0 || m > b.count()) throw std::invalid_argument("pi_star_partition: bad M");
    if (b.grid.horizon() < static_cast<double>(m))
        throw std::invalid_argument("pi_star_partition: horizon must be >= M");

    std::vector<std::size_t> at(m + 1); // grid index of integer time j
    for (std::size_t t = 0; t <= m; ++t) at[t] = b.grid.index_of(static_cast<double>(t));

    const auto g = w_paths(b, r, m);
    PiStarResult res;
    res.partition.assign(m + 1, 0.0);
    res.partition[0] = static_cast<double>(m);
    res.partition[m] = 0.0;

    const double inv_r2 = 1.0 / (1.0 - r * r);
    for (std::size_t j = 1; j <= m - 1; ++j) {
        const auto& w_hi = g.row(m - j + 1);
        const auto& w_lo = g.row(m - j);
        const double g1 = w_hi[at[j + 1]] - w_hi[at[j]];
        const double g2 = w_lo[at[j + 1]] - w_lo[at[j]];
        res.g1.push_back(g1);
        res.g2.push_back(g2);
        res.psi.push_back(std::min(g1, g2));
        res.partition[m - j] = static_cast<double>(g1 <= g2 ? j + 1 : j);

        const double mj = static_cast<double>(m - j);
        const double v1 = (1.0 - std::pow(r, 2.0 * (mj + 1.0))) * inv_r2;
        const double v2 = (1.0 - std::pow(r, 2.0 * mj)) * inv_r2;
        const double cv = r * (1.0 - std::pow(r, 2.0 * mj)) * inv_r2;
        res.var_g1.push_back(v1);
        res.var_g2.push_back(v2);
        res.cov_g.push_back(cv);
        res.mean_psi.push_back(-std::sqrt((v1 - cv) + (v2 - cv)) /
                               std::sqrt(2.0 * 3.14159265358979323846));
    }

    double l = 0.0;
    for (std::size_t k = 1; k <= m; ++k) {
        const auto& wk = g.row(k);
        l += wk[b.grid.index_of(res.partition[k - 1])] - wk[b.grid.index_of(res.partition[k])];
    }
    res.l_pi_star = l;
    double rhs = g.row(m)[at[1]];
    for (double p : res.psi) rhs += p;
    res.identity_rhs = rhs;
    return res;
}

} // namespace cbp

#endif // CBP_LPP_HPP
