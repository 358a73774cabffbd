#include <catch2/catch_amalgamated.hpp>

#include <popdescent/objectives.hpp>
#include <popdescent/rng.hpp>

#include <cmath>
#include <vector>

using namespace popdescent;

TEST_CASE("sphere value and gradient", "[objectives]") {
    auto [v0, g0] = analytic_objective("sphere", std::vector<double>{0.0, 0.0});
    REQUIRE(v0 == 0.0);
    REQUIRE(g0 == std::vector<double>{0.0, 0.0});

    auto [v, g] = analytic_objective("sphere", std::vector<double>{1.0, 2.0});
    REQUIRE(v == 5.0);
    REQUIRE(g == std::vector<double>{2.0, 4.0});
}

TEST_CASE("rosenbrock minimum and errors", "[objectives]") {
    auto [v, g] = analytic_objective("rosenbrock", std::vector<double>{1.0, 1.0});
    REQUIRE(v == 0.0);
    REQUIRE(g == std::vector<double>{0.0, 0.0});
    REQUIRE_THROWS_AS(analytic_objective("rosenbrock", std::vector<double>{1.0}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(analytic_objective("nope", std::vector<double>{1.0}),
                      std::invalid_argument);
}

TEST_CASE("central differences recover the sphere gradient", "[objectives]") {
    const std::vector<double> x{1.0, 2.0};
    auto f = [](std::span<const double> p) {
        return analytic_objective("sphere", p).first;
    };
    const auto fd = finite_diff_grad(f, x, 1e-6);
    REQUIRE_THAT(fd[0], Catch::Matchers::WithinAbs(2.0, 1e-6));
    REQUIRE_THAT(fd[1], Catch::Matchers::WithinAbs(4.0, 1e-6));
}

TEST_CASE("constant functions have zero finite-difference gradient", "[objectives]") {
    const std::vector<double> x{0.3, -0.7, 1.1};
    auto f = [](std::span<const double>) { return 3.5; };
    const auto fd = finite_diff_grad(f, x, 1e-6);
    REQUIRE(fd == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("finite differences agree with the rosenbrock gradient", "[objectives]") {
    auto f = [](std::span<const double> p) {
        return analytic_objective("rosenbrock", p).first;
    };
    const std::vector<double> x{1.2, 1.2};
    const auto fd = finite_diff_grad(f, x, 1e-6);
    const auto [v, g] = analytic_objective("rosenbrock", x);
    for (std::size_t i = 0; i < g.size(); ++i)
        REQUIRE_THAT(fd[i], Catch::Matchers::WithinRel(g[i], 1e-5));

    RngStream rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> p{rng.uniform(-2.0, 2.0), rng.uniform(-1.0, 3.0),
                              rng.uniform(-2.0, 2.0)};
        const auto fd2 = finite_diff_grad(f, p, 1e-6);
        const auto [v2, g2] = analytic_objective("rosenbrock", p);
        for (std::size_t i = 0; i < g2.size(); ++i) {
            if (std::abs(g2[i]) > 1e-4)
                REQUIRE_THAT(fd2[i], Catch::Matchers::WithinRel(g2[i], 1e-5));
            else
                REQUIRE_THAT(fd2[i], Catch::Matchers::WithinAbs(g2[i], 1e-4));
        }
    }
}

TEST_CASE("finite_diff_grad validates inputs", "[objectives]") {
    auto f = [](std::span<const double>) { return 1.0; };
    REQUIRE_THROWS_AS(finite_diff_grad(f, std::vector<double>{1.0}, 0.0), std::invalid_argument);
    auto bad = [](std::span<const double>) { return std::nan(""); };
    REQUIRE_THROWS_AS(finite_diff_grad(bad, std::vector<double>{1.0}, 1e-6), std::runtime_error);
}
