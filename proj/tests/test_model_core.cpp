#include <catch2/catch_amalgamated.hpp>

#include "cbp/io.hpp"
#include "cbp/path.hpp"

using namespace cbp;

TEST_CASE("uniform grid basics") {
    auto g = TimeGrid::uniform(2.0, 4);
    REQUIRE(g.n_steps() == 4);
    REQUIRE(g.time(0) == 0.0);
    REQUIRE(g.horizon() == 2.0);
    REQUIRE(g.index_of(1.0) == 2);
    REQUIRE_THROWS_AS(g.index_of(0.3), std::invalid_argument);
    REQUIRE_THROWS_AS(TimeGrid({0.0, 1.0, 0.5}), std::invalid_argument);
    REQUIRE_THROWS_AS(TimeGrid({0.5, 1.0}), std::invalid_argument);
}

TEST_CASE("brownian rows start at zero and repeat bit-identically") {
    auto grid = TimeGrid::uniform(1.0, 64);
    auto a = sample_brownian(grid, 5, 1234);
    auto b = sample_brownian(grid, 5, 1234);
    for (std::size_t j = 1; j <= 5; ++j) {
        REQUIRE(a.at(j, 0) == 0.0);
        for (std::size_t k = 0; k <= 64; ++k) REQUIRE(a.at(j, k) == b.at(j, k));
    }
    auto c = sample_brownian(grid, 5, 1235);
    REQUIRE(a.at(1, 64) != c.at(1, 64));
}

TEST_CASE("bundles are prefix-stable in the row count") {
    auto grid = TimeGrid::uniform(1.0, 16);
    auto small = sample_brownian(grid, 3, 777);
    auto large = sample_brownian(grid, 8, 777);
    for (std::size_t j = 1; j <= 3; ++j)
        for (std::size_t k = 0; k <= 16; ++k) REQUIRE(small.at(j, k) == large.at(j, k));
}

TEST_CASE("increment variance matches the step size", "[mc]") {
    auto grid = TimeGrid::uniform(1.0, 1);
    double acc = 0.0, acc2 = 0.0;
    const int n = 10000;
    for (int s = 0; s < n; ++s) {
        const double inc = sample_brownian(grid, 1, replica_seed(9000, s)).at(1, 1);
        acc += inc;
        acc2 += inc * inc;
    }
    const double mean = acc / n;
    const double var = acc2 / n - mean * mean;
    REQUIRE(std::fabs(var - 1.0) < 0.05);
}

TEST_CASE("increments over disjoint intervals are uncorrelated", "[mc]") {
    auto grid = TimeGrid::uniform(1.0, 2);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const int n = 10000;
    for (int s = 0; s < n; ++s) {
        auto b = sample_brownian(grid, 1, replica_seed(9100, s));
        const double x = b.at(1, 1) - b.at(1, 0);
        const double y = b.at(1, 2) - b.at(1, 1);
        sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
    }
    const double corr = (n * sxy - sx * sy) /
                        std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    REQUIRE(std::fabs(corr) < 0.05);
}

TEST_CASE("drift application") {
    auto grid = TimeGrid::uniform(1.0, 2);
    auto b = deterministic_bundle(grid, {std::vector<double>{0.0, 0.0, 0.0}});

    SECTION("zero drift is the identity") {
        auto out = drift_apply(b, SystemParams::make(0.5));
        for (std::size_t k = 0; k <= 2; ++k) REQUIRE(out.at(1, k) == b.at(1, k));
    }
    SECTION("pure drift line") {
        auto out = drift_apply(b, SystemParams::make(0.5, {2.0}));
        REQUIRE(out.at(1, 0) == 0.0);
        REQUIRE(out.at(1, 1) == Catch::Approx(1.0));
        REQUIRE(out.at(1, 2) == Catch::Approx(2.0));
        REQUIRE(out.kind == PathKind::Driven);
    }
    SECTION("opposite drifts cancel") {
        auto noisy = sample_brownian(grid, 1, 5);
        auto fwd = drift_apply(noisy, SystemParams::make(0.5, {-1.0}));
        auto back = drift_apply(fwd, SystemParams::make(0.5, {1.0}));
        for (std::size_t k = 0; k <= 2; ++k)
            REQUIRE(back.at(1, k) == Catch::Approx(noisy.at(1, k)).margin(1e-12));
    }
}

TEST_CASE("path translation") {
    auto grid = TimeGrid::uniform(2.0, 2);
    auto b = deterministic_bundle(grid, {std::vector<double>{0.0, 1.0, 3.0}});

    SECTION("t0 = 0 is the identity in both modes") {
        for (auto mode : {TranslateMode::Raw, TranslateMode::Recentred}) {
            auto out = translate_path(b, 0.0, mode);
            for (std::size_t k = 0; k <= 2; ++k) REQUIRE(out.at(1, k) == b.at(1, k));
        }
    }
    SECTION("recentring subtracts the anchor value") {
        auto out = translate_path(b, grid.time(1), TranslateMode::Recentred);
        REQUIRE(out.grid.n_points() == 2);
        REQUIRE(out.at(1, 0) == 0.0);
        REQUIRE(out.at(1, 1) == Catch::Approx(2.0));
    }
    SECTION("raw keeps values") {
        auto out = translate_path(b, grid.time(1), TranslateMode::Raw);
        REQUIRE(out.at(1, 0) == 1.0);
        REQUIRE(out.at(1, 1) == 3.0);
    }
    SECTION("off-grid origins are rejected") {
        REQUIRE_THROWS_AS(translate_path(b, 0.7, TranslateMode::Raw), std::invalid_argument);
    }
    SECTION("recentred translations compose additively on grid points") {
        auto grid2 = TimeGrid::uniform(1.0, 8);
        auto noisy = sample_brownian(grid2, 2, 31);
        auto two = translate_path(translate_path(noisy, grid2.time(2), TranslateMode::Recentred),
                                  grid2.time(3) - grid2.time(2), TranslateMode::Recentred);
        auto one = translate_path(noisy, grid2.time(3), TranslateMode::Recentred);
        for (std::size_t j = 1; j <= 2; ++j)
            for (std::size_t k = 0; k < one.grid.n_points(); ++k)
                REQUIRE(two.at(j, k) == Catch::Approx(one.at(j, k)).margin(1e-12));
    }
    SECTION("recentred after raw starts at zero") {
        auto noisy = sample_brownian(TimeGrid::uniform(1.0, 8), 1, 3);
        auto raw = translate_path(noisy, noisy.grid.time(3), TranslateMode::Raw);
        auto rec = translate_path(raw, 0.0, TranslateMode::Recentred);
        REQUIRE(rec.at(1, 0) == 0.0);
    }
}

TEST_CASE("sequence parameters") {
    auto p = SystemParams::make(0.25, {0.5, -1.5}, 0.25);
    REQUIRE(p.q == 0.75);
    REQUIRE(p.r() == Catch::Approx(1.0 / 3.0));
    REQUIRE(p.sigma() == Catch::Approx(3.0));
    REQUIRE(p.drift(1) == 0.5);
    REQUIRE(p.drift(7) == 0.25);
    REQUIRE(p.drift_sup_norm() == 1.5);
    REQUIRE(std::isinf(p.drift_sq_sum()));
    REQUIRE(SystemParams::make(0.5, {1.0, 2.0}, 0.0).drift_sq_sum() == Catch::Approx(5.0));
    REQUIRE_THROWS_AS(SystemParams::make(1.5), std::invalid_argument);
    REQUIRE_THROWS_AS(SystemParams::make(0.0).sigma(), std::domain_error);
    REQUIRE_THROWS_AS(SystemParams::make(1.0).r(), std::domain_error);

    auto x = InitialConfig::power(2.0, 0.75, 1.0, {0.0, 0.5});
    REQUIRE(x.x(1) == 0.0);
    REQUIRE(x.x(2) == 0.5);
    REQUIRE(x.x(3) == Catch::Approx(2.0 * std::pow(3.0, 0.75) + 1.0));
    REQUIRE(x.admissible_tail());
    REQUIRE_FALSE(InitialConfig::constant(3.0).admissible_tail());
    REQUIRE_THROWS_AS(InitialConfig::constant(0.0, {1.0, 0.5}), std::invalid_argument);
    REQUIRE_THROWS_AS(InitialConfig::constant(0.0, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("bundle serialisation round trips") {
    auto grid = TimeGrid::uniform(1.0, 4);
    auto b = sample_brownian(grid, 3, 42);

    SECTION("binary") {
        auto back = bundle_from_binary(bundle_to_binary(b));
        REQUIRE(back.count() == 3);
        for (std::size_t j = 1; j <= 3; ++j)
            for (std::size_t k = 0; k <= 4; ++k) REQUIRE(back.at(j, k) == b.at(j, k));
        for (std::size_t k = 0; k <= 4; ++k) REQUIRE(back.grid.time(k) == grid.time(k));
    }
    SECTION("csv header and shape") {
        auto csv = bundle_to_csv(b);
        REQUIRE(csv.substr(0, 13) == "time,b1,b2,b3");
        REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 6); // header + 5 points
    }
}
