#include <catch2/catch_amalgamated.hpp>

#include "cbp/gue.hpp"
#include "cbp/lpp.hpp"

using namespace cbp;

TEST_CASE("1x1 case is a plain Gaussian", "[mc]") {
    double acc = 0.0, acc2 = 0.0;
    const int n = 10000;
    const double t = 2.0;
    for (int s = 0; s < n; ++s) {
        const double l = sample_gue_lambda_max(1, t, replica_seed(6000, s)).lambda_max;
        acc += l;
        acc2 += l * l;
    }
    const double mean = acc / n;
    const double var = acc2 / n - mean * mean;
    REQUIRE(std::fabs(mean) < 0.05 * std::sqrt(t) + 0.05);
    REQUIRE(std::fabs(var - t) < 0.05 * t);
}

TEST_CASE("2x2 case matches the closed-form eigenvalue sampler", "[mc]") {
    const int n = 4000;
    double m_jac = 0.0, m_cf = 0.0, v_cf = 0.0;
    Rng rng(424242);
    std::vector<double> cf(n);
    for (int s = 0; s < n; ++s) {
        m_jac += sample_gue_lambda_max(2, 1.0, replica_seed(6100, s)).lambda_max;
        const double a = rng.gauss(), d = rng.gauss();
        const double br = rng.gauss() * std::sqrt(0.5), bi = rng.gauss() * std::sqrt(0.5);
        cf[s] = (a + d) / 2.0 + std::sqrt((a - d) * (a - d) / 4.0 + br * br + bi * bi);
        m_cf += cf[s];
    }
    m_jac /= n;
    m_cf /= n;
    for (double x : cf) v_cf += (x - m_cf) * (x - m_cf);
    const double se = std::sqrt(v_cf / (n - 1) / n) * std::sqrt(2.0);
    REQUIRE(std::fabs(m_jac - m_cf) <= 3.0 * se);
}

TEST_CASE("eigen residual and trace identity") {
    for (std::size_t m : {1u, 2u, 5u, 16u}) {
        auto s = sample_gue_lambda_max(m, 1.5, 970 + m);
        REQUIRE(s.residual <= 1e-10);
        REQUIRE(s.eigenvalues.size() == m);
        double tr = 0.0;
        for (double l : s.eigenvalues) tr += l;
        // the trace of the sampled matrix is reproducible from the seed
        Rng rng(mix64((970 + m) ^ 0x67756575ULL));
        double diag = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            diag += std::sqrt(1.5) * rng.gauss();
            for (std::size_t j = i + 1; j < m; ++j) {
                rng.gauss();
                rng.gauss();
            }
        }
        REQUIRE(tr == Catch::Approx(diag).margin(1e-8 * std::max(1.0, std::fabs(diag))));
        REQUIRE(s.lambda_max == Catch::Approx(s.eigenvalues.back()).margin(1e-12));
    }
}

TEST_CASE("ks distance basics") {
    REQUIRE(ks_distance({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
    REQUIRE(ks_distance({0.0, 0.1}, {5.0, 6.0, 7.0}) == 1.0);
    REQUIRE_THROWS_AS(ks_distance({}, {1.0}), std::invalid_argument);
}

TEST_CASE("ks statistic stays below the 1% critical value for equal laws", "[mc]") {
    // 20 independent pairs of N(0,1) samples of size 2000; the 1% critical
    // value 1.63 sqrt(2/2000) should be exceeded at most once
    const double crit = 1.63 * std::sqrt(2.0 / 2000.0);
    int below = 0;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> a(2000), b(2000);
        Rng ra(replica_seed(6200, 2 * rep)), rb(replica_seed(6200, 2 * rep + 1));
        for (auto& x : a) x = ra.gauss();
        for (auto& x : b) x = rb.gauss();
        if (ks_distance(a, b) < crit) ++below;
    }
    REQUIRE(below >= 19);
}

TEST_CASE("variance convention is discriminated by the chain supremum", "[mc]") {
    // quick version of the distributional identity: at M = 2 the half-T
    // split matches the ascending-chain supremum, the full-T split does not
    auto grid = TimeGrid::uniform(1.0, 1024);
    const int n = 1000;
    std::vector<double> lpp(n), half(n), full(n);
    for (int s = 0; s < n; ++s) {
        auto b = sample_brownian(grid, 2, replica_seed(6300, s));
        lpp[s] = v_plus(b, 1, 2, 0.0, 1.0).value;
        half[s] = sample_gue_lambda_max(2, 1.0, replica_seed(6400, s)).lambda_max;
        full[s] = sample_gue_lambda_max(2, 1.0, replica_seed(6500, s),
                                        GueVarianceConvention::FullT)
                      .lambda_max;
    }
    REQUIRE(ks_distance(lpp, half) < 0.08);
    REQUIRE(ks_distance(lpp, full) > 0.10);
}
