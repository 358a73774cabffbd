#include <catch2/catch_amalgamated.hpp>

#include <popdescent/optimizers.hpp>

#include <cmath>
#include <limits>
#include <vector>

using namespace popdescent;

namespace {

Individual one_param(double theta, double lr) {
    Individual ind;
    ind.id = 0;
    ind.theta = {theta};
    ind.alpha[hp::learning_rate] = lr;
    return ind;
}

}  // namespace

TEST_CASE("sgd takes the closed-form step on the quadratic", "[optimizers]") {
    // f(theta) = theta^2, grad = 2 theta
    Individual ind = one_param(1.0, 0.1);
    ind = sgd_step(std::move(ind), std::vector<double>{2.0 * ind.theta[0]});
    REQUIRE(ind.theta[0] == 0.8);

    Individual frozen = one_param(1.0, 0.0);
    frozen = sgd_step(std::move(frozen), std::vector<double>{2.0});
    REQUIRE(frozen.theta[0] == 1.0);
}

TEST_CASE("ten sgd steps follow the geometric recurrence", "[optimizers]") {
    Individual ind = one_param(1.0, 0.1);
    for (int i = 0; i < 10; ++i)
        ind = sgd_step(std::move(ind), std::vector<double>{2.0 * ind.theta[0]});
    REQUIRE_THAT(ind.theta[0], Catch::Matchers::WithinRel(std::pow(0.8, 10), 1e-12));
    REQUIRE_THAT(ind.theta[0], Catch::Matchers::WithinAbs(0.1074, 2e-4));
}

TEST_CASE("sgd descent never increases the quadratic for lr below 2/L", "[optimizers]") {
    // L = 2 for f = theta^2, so any lr < 1 is non-increasing.
    for (double lr : {0.05, 0.3, 0.9}) {
        Individual ind = one_param(1.7, lr);
        double prev = ind.theta[0] * ind.theta[0];
        for (int i = 0; i < 50; ++i) {
            ind = sgd_step(std::move(ind), std::vector<double>{2.0 * ind.theta[0]});
            const double loss = ind.theta[0] * ind.theta[0];
            REQUIRE(loss <= prev + 1e-15);
            prev = loss;
        }
    }
}

TEST_CASE("sgd rejects mismatched or non-finite gradients", "[optimizers]") {
    Individual ind = one_param(1.0, 0.1);
    REQUIRE_THROWS_AS(sgd_step(ind, std::vector<double>{1.0, 2.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(sgd_step(ind, std::vector<double>{std::numeric_limits<double>::infinity()}),
                      std::runtime_error);
}

TEST_CASE("adam leaves theta alone on a zero gradient", "[optimizers]") {
    Individual ind = one_param(0.37, 0.01);
    ind = adam_step(std::move(ind), std::vector<double>{0.0});
    REQUIRE(ind.theta[0] == 0.37);
    REQUIRE(ind.opt_state.step == 1);
}

TEST_CASE("the first adam step has magnitude close to the learning rate", "[optimizers]") {
    for (double g : {0.5, -3.0, 10.0}) {
        Individual ind = one_param(0.0, 0.01);
        ind = adam_step(std::move(ind), std::vector<double>{g});
        // bias correction makes |delta| -> lr * sign(g) as epsilon -> 0
        REQUIRE_THAT(std::abs(ind.theta[0]), Catch::Matchers::WithinRel(0.01, 1e-4));
        REQUIRE(std::signbit(ind.theta[0]) == !std::signbit(g) ? false : true);
    }
}

TEST_CASE("adam moment accounting matches the closed form on step one", "[optimizers]") {
    Individual ind = one_param(0.0, 0.001);
    ind = adam_step(std::move(ind), std::vector<double>{2.0});
    REQUIRE_THAT(ind.opt_state.first_moment[0], Catch::Matchers::WithinRel(0.2, 1e-12));
    REQUIRE_THAT(ind.opt_state.second_moment[0], Catch::Matchers::WithinRel(0.004, 1e-12));
    REQUIRE(ind.opt_state.step == 1);
}

TEST_CASE("two adam runs with the same inputs stay in lockstep", "[optimizers]") {
    Individual a = one_param(1.0, 0.05);
    Individual b = one_param(1.0, 0.05);
    for (int i = 0; i < 25; ++i) {
        const std::vector<double> grad{2.0 * a.theta[0]};
        a = adam_step(std::move(a), grad);
        b = adam_step(std::move(b), grad);
        REQUIRE(a.theta[0] == b.theta[0]);
        REQUIRE(a.opt_state.first_moment[0] == b.opt_state.first_moment[0]);
        REQUIRE(a.opt_state.second_moment[0] == b.opt_state.second_moment[0]);
    }
}

TEST_CASE("optimizer names round-trip", "[optimizers]") {
    REQUIRE(optimizer_from_name("sgd") == Optimizer::sgd);
    REQUIRE(optimizer_from_name("adam") == Optimizer::adam);
    REQUIRE_THROWS_AS(optimizer_from_name("lbfgs"), std::invalid_argument);
}
