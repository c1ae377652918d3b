// GUE sampling and largest-eigenvalue computation.
//
// H is an M x M Hermitian matrix with real N(0,T) diagonal entries and
// off-diagonal entries whose real and imaginary parts are independent
// N(0,T/2), so every off-diagonal entry has total variance T.  Under this
// convention the zero-drift ascending-chain supremum across M rows on
// [0,T] has the same distribution as lambda_max(H).  The split is
// configurable (see GueVarianceConvention) because the alternative
// full-T-per-component normalisation is a common off-by-sqrt(2) trap.
//
// Eigenvalues come from cyclic Jacobi sweeps on the 2M x 2M real symmetric
// embedding [[A, -B], [B, A]] of H = A + iB; every eigenvalue of H appears
// twice in the embedding.  Plain and auditable, fine for M <= 64.

#ifndef CBP_GUE_HPP
#define CBP_GUE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rng.hpp"

namespace cbp {

enum class GueVarianceConvention {
    HalfT, // off-diagonal components N(0, T/2); matches the chain supremum
    FullT  // off-diagonal components N(0, T); kept for the discrimination test
};

struct GueSample {
    std::size_t m = 0;
    double variance = 0.0; // entry variance T
    double lambda_max = 0.0;
    double residual = 0.0; // ||Hv - lambda v|| / ||v|| for the returned pair
    std::uint64_t seed = 0;
    std::vector<double> eigenvalues; // all M, ascending
};

namespace gue_detail {

// Cyclic Jacobi on a dense symmetric matrix; rotates until the off-diagonal
// mass is negligible.  a is overwritten; v accumulates the rotations.
inline void jacobi_eigen(std::vector<std::vector<double>>& a,
                         std::vector<std::vector<double>>& v, std::size_t n,
                         std::size_t max_sweeps = 100) {
    v.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0, diag = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            diag += a[i][i] * a[i][i];
            for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
        }
        if (off <= 1e-30 * std::max(diag, 1e-300)) return;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                const double apq = a[p][q];
                a[p][q] = a[q][p] = 0.0;
                a[p][p] -= t * apq;
                a[q][q] += t * apq;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double arp = a[r][p], arq = a[r][q];
                        a[r][p] = a[p][r] = arp - s * (arq + tau * arp);
                        a[r][q] = a[q][r] = arq + s * (arp - tau * arq);
                    }
                    const double vrp = v[r][p], vrq = v[r][q];
                    v[r][p] = vrp - s * (vrq + tau * vrp);
                    v[r][q] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }
    throw std::runtime_error("jacobi_eigen: no convergence within sweep cap");
}

} // namespace gue_detail

inline GueSample sample_gue_lambda_max(std::size_t m, double t_var, std::uint64_t seed,
                                       GueVarianceConvention conv = GueVarianceConvention::HalfT) {
    if (m == 0) throw std::invalid_argument("sample_gue_lambda_max: need M >= 1");
    if (!(t_var > 0.0)) throw std::invalid_argument("sample_gue_lambda_max: need T > 0");

    Rng rng(mix64(seed ^ 0x67756575ULL));
    const double sd_diag = std::sqrt(t_var);
    const double sd_off =
        conv == GueVarianceConvention::HalfT ? std::sqrt(t_var / 2.0) : std::sqrt(t_var);

    std::vector<std::vector<double>> re(m, std::vector<double>(m, 0.0));
    std::vector<std::vector<double>> im(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        re[i][i] = sd_diag * rng.gauss();
        for (std::size_t j = i + 1; j < m; ++j) {
            re[i][j] = re[j][i] = sd_off * rng.gauss();
            im[i][j] = sd_off * rng.gauss();
            im[j][i] = -im[i][j];
        }
    }

    // real symmetric embedding [[A, -B], [B, A]]
    const std::size_t n = 2 * m;
    std::vector<std::vector<double>> s(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            s[i][j] = re[i][j];
            s[m + i][m + j] = re[i][j];
            s[i][m + j] = -im[i][j];
            s[m + i][j] = im[i][j];
        }

    std::vector<std::vector<double>> vec;
    gue_detail::jacobi_eigen(s, vec, n);

    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k)
        if (s[k][k] > s[best][best]) best = k;

    GueSample out;
    out.m = m;
    out.variance = t_var;
    out.seed = seed;
    out.lambda_max = s[best][best];
    out.eigenvalues.reserve(m);
    {
        std::vector<double> all(n);
        for (std::size_t k = 0; k < n; ++k) all[k] = s[k][k];
        std::sort(all.begin(), all.end());
        for (std::size_t k = 0; k < m; ++k) out.eigenvalues.push_back(all[2 * k]);
    }

    // residual of (lambda, v) against the complex matrix itself
    std::vector<std::complex<double>> v(m), hv(m, {0.0, 0.0});
    double norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        v[i] = {vec[i][best], vec[m + i][best]};
        norm += std::norm(v[i]);
    }
    norm = std::sqrt(norm);
    double rnorm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) hv[i] += std::complex<double>(re[i][j], im[i][j]) * v[j];
        rnorm += std::norm(hv[i] - out.lambda_max * v[i]);
    }
    out.residual = std::sqrt(rnorm) / std::max(norm, 1e-300);
    if (out.residual > 1e-10)
        throw std::runtime_error("sample_gue_lambda_max: eigenpair residual above 1e-10");
    return out;
}

// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|, by
// merge scan over the sorted samples.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < a.size() && ib < b.size()) {
        const double x = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] <= x) ++ia;
        while (ib < b.size() && b[ib] <= x) ++ib;
        d = std::max(d, std::fabs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
    }
    return d;
}

} // namespace cbp

#endif // CBP_GUE_HPP
