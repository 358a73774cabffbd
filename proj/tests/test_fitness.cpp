#include <catch2/catch_amalgamated.hpp>

#include <popdescent/fitness.hpp>

#include <cmath>
#include <limits>

using namespace popdescent;

TEST_CASE("fitness_from_loss known values", "[fitness]") {
    REQUIRE(fitness_from_loss(0.0) == 1.0);
    REQUIRE(fitness_from_loss(2.0) == 0.5);
    // Mutation magnitude at loss 2 is 1 - fitness = 0.5.
    REQUIRE(mutation_magnitude(fitness_from_loss(2.0)) == 0.5);
}

TEST_CASE("fitness_from_loss is strictly decreasing and lands in (0,1]", "[fitness]") {
    RngStream rng(17);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(0.0, 50.0);
        const double b = a + rng.uniform_open();
        const double fa = fitness_from_loss(a);
        const double fb = fitness_from_loss(b);
        REQUIRE(fa > fb);
        REQUIRE(fa > 0.0);
        REQUIRE(fa <= 1.0);
    }
}

TEST_CASE("fitness_from_loss rejects bad losses", "[fitness]") {
    REQUIRE_THROWS_AS(fitness_from_loss(-1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(fitness_from_loss(std::numeric_limits<double>::quiet_NaN()),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(fitness_from_loss(std::numeric_limits<double>::infinity()),
                      std::invalid_argument);
}

TEST_CASE("build_fitness_distribution normalizes", "[fitness]") {
    const auto p = build_fitness_distribution({0.25, 0.25, 0.25, 0.25});
    REQUIRE(p == std::vector<double>{0.25, 0.25, 0.25, 0.25});

    const auto q = build_fitness_distribution({0.2, 0.3, 0.5});
    REQUIRE_THAT(q[0], Catch::Matchers::WithinAbs(0.2, 1e-15));
    REQUIRE_THAT(q[1], Catch::Matchers::WithinAbs(0.3, 1e-15));
    REQUIRE_THAT(q[2], Catch::Matchers::WithinAbs(0.5, 1e-15));
}

TEST_CASE("all-zero fitness falls back to uniform", "[fitness]") {
    REQUIRE(build_fitness_distribution({0.0, 0.0}) == std::vector<double>{0.5, 0.5});
}

TEST_CASE("distribution sums to one within 1e-12 on random input", "[fitness]") {
    RngStream rng(23);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 1 + rng.uniform_below(64);
        std::vector<double> f(n);
        for (auto& x : f) x = rng.uniform();
        const auto p = build_fitness_distribution(f);
        long double sum = 0.0L;
        for (double v : p) sum += v;
        REQUIRE(std::abs(static_cast<double>(sum) - 1.0) < 1e-12);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            // proportionality: p_i / p_j == f_i / f_j where defined
            if (f[i] > 0 && f[i + 1] > 0)
                REQUIRE_THAT(p[i] * f[i + 1], Catch::Matchers::WithinRel(p[i + 1] * f[i], 1e-9));
        }
    }
}

TEST_CASE("build_fitness_distribution rejects bad input", "[fitness]") {
    REQUIRE_THROWS_AS(build_fitness_distribution({}), std::invalid_argument);
    REQUIRE_THROWS_AS(build_fitness_distribution({0.5, 1.5}), std::invalid_argument);
    REQUIRE_THROWS_AS(build_fitness_distribution({-0.1}), std::invalid_argument);
}

TEST_CASE("sample_index respects weights and skips zero-probability entries", "[fitness]") {
    RngStream rng(31);
    const std::vector<double> probs{0.0, 0.7, 0.0, 0.3};
    std::vector<int> counts(4, 0);
    for (int i = 0; i < 20000; ++i) ++counts[sample_index(probs, rng)];
    REQUIRE(counts[0] == 0);
    REQUIRE(counts[2] == 0);
    REQUIRE(counts[1] > 13500);
    REQUIRE(counts[3] > 5400);
}
