// Piecewise-linear driving paths on a shared time grid.
//
// A bundle holds N rows sampled at the grid times; row j is B_j (Brownian),
// V_j = g_j t + B_j (driven) or an arbitrary deterministic path.  Rows are
// immutable after construction and safe to share across threads.

#ifndef CBP_PATH_HPP
#define CBP_PATH_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "grid.hpp"
#include "params.hpp"
#include "rng.hpp"

namespace cbp {

enum class PathKind { Brownian, Driven, Deterministic };

struct PathBundle {
    TimeGrid grid;
    PathKind kind = PathKind::Deterministic;
    std::uint64_t seed = 0; // meaningful for Brownian-sampled bundles only
    std::vector<std::vector<double>> values; // values[j-1][k] = row j at t_k

    std::size_t count() const { return values.size(); }

    const std::vector<double>& row(std::size_t j) const { // 1-based
        if (j == 0 || j > values.size()) throw std::out_of_range("PathBundle: row index");
        return values[j - 1];
    }

    // Value of row j at grid index k.
    double at(std::size_t j, std::size_t k) const { return row(j)[k]; }
};

// Independent Gaussian random walks on the grid: increments over
// [t_k, t_{k+1}] are Normal(0, t_{k+1}-t_k), rows start at 0.  Row j draws
// from its own substream mix(seed, j), so bundles are prefix-stable in N:
// the first rows of a larger bundle coincide with a smaller one.
inline PathBundle sample_brownian(const TimeGrid& grid, std::size_t n_rows, std::uint64_t seed) {
    if (n_rows == 0) throw std::invalid_argument("sample_brownian: need N >= 1");
    PathBundle b;
    b.grid = grid;
    b.kind = PathKind::Brownian;
    b.seed = seed;
    b.values.assign(n_rows, std::vector<double>(grid.n_points(), 0.0));
    for (std::size_t j = 0; j < n_rows; ++j) {
        Rng rng(mix64(seed ^ mix64(0x42'0000 + j)));
        double v = 0.0;
        auto& row = b.values[j];
        row[0] = 0.0;
        for (std::size_t k = 0; k < grid.n_steps(); ++k) {
            v += std::sqrt(grid.dt(k)) * rng.gauss();
            row[k + 1] = v;
        }
    }
    return b;
}

// Deterministic bundle from explicit rows (each row must start at 0 so the
// initial condition stays in the initial configuration, not the path).
inline PathBundle deterministic_bundle(const TimeGrid& grid,
                                       std::vector<std::vector<double>> rows) {
    for (const auto& r : rows) {
        if (r.size() != grid.n_points())
            throw std::invalid_argument("deterministic_bundle: row length mismatch");
        if (r.front() != 0.0)
            throw std::invalid_argument("deterministic_bundle: rows must start at 0");
    }
    PathBundle b;
    b.grid = grid;
    b.kind = PathKind::Deterministic;
    b.values = std::move(rows);
    return b;
}

// V_j(t) = g_j t + B_j(t).  Applying a second drift adds on top, so the
// operation is additive in the drift sequence.
inline PathBundle drift_apply(const PathBundle& b, const SystemParams& params) {
    PathBundle out = b;
    out.kind = PathKind::Driven;
    for (std::size_t j = 1; j <= out.count(); ++j) {
        const double g = params.drift(j);
        if (g == 0.0) continue;
        auto& row = out.values[j - 1];
        for (std::size_t k = 0; k < row.size(); ++k) row[k] += g * b.grid.time(k);
    }
    return out;
}

enum class TranslateMode { Raw, Recentred };

// Time translation: Raw keeps values, s -> w(t0 + s); Recentred re-anchors,
// s -> w(t0 + s) - w(t0).  t0 must be a grid point; the output grid is the
// suffix shifted to start at 0.
inline PathBundle translate_path(const PathBundle& b, double t0, TranslateMode mode) {
    const std::size_t a = b.grid.index_of(t0);
    PathBundle out;
    out.grid = b.grid.suffix_from(a);
    out.kind = b.kind;
    out.seed = b.seed;
    out.values.assign(b.count(), {});
    for (std::size_t j = 0; j < b.count(); ++j) {
        const auto& src = b.values[j];
        std::vector<double> row(src.begin() + static_cast<std::ptrdiff_t>(a), src.end());
        if (mode == TranslateMode::Recentred) {
            const double anchor = src[a];
            for (double& v : row) v -= anchor;
            row[0] = 0.0;
        }
        out.values[j] = std::move(row);
    }
    return out;
}

} // namespace cbp

#endif // CBP_PATH_HPP
