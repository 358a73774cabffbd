#include <catch2/catch_amalgamated.hpp>

#include <popdescent/mutation.hpp>
#include <popdescent/report.hpp>

#include <cmath>
#include <cstring>
#include <vector>

using namespace popdescent;

namespace {

Individual sample_individual() {
    Individual ind;
    ind.id = 3;
    ind.theta = {0.5, -0.25, 1.0};
    ind.alpha[hp::learning_rate] = 0.001;
    ind.alpha[hp::regularization_rate] = 0.01;
    return ind;
}

bool bit_identical(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("magnitude zero is the identity and consumes no randomness", "[mutation]") {
    MutationConfig config;
    RngStream rng(1);
    const auto before = rng;
    const Individual ind = sample_individual();
    const Individual out = mutate(ind, 0.0, config, rng);
    REQUIRE(bit_identical(out.theta, ind.theta));
    REQUIRE(out.alpha == ind.alpha);
    RngStream probe = before;
    REQUIRE(rng.next_u64() == probe.next_u64());
}

TEST_CASE("magnitude outside [0,1] is rejected", "[mutation]") {
    MutationConfig config;
    RngStream rng(1);
    REQUIRE_THROWS_AS(mutate(sample_individual(), -0.1, config, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(mutate(sample_individual(), 1.1, config, rng), std::invalid_argument);
}

TEST_CASE("weight noise has sd beta1 * magnitude", "[mutation]") {
    MutationConfig config;  // weight_noise_scale 0.01
    Individual ind;
    ind.theta = {0.0, 0.0};
    ind.alpha[hp::learning_rate] = 1.0;
    RngStream rng(77);
    const int n = 100000;
    std::vector<double> draws;
    draws.reserve(2 * n);
    for (int i = 0; i < n; ++i) {
        const Individual out = mutate(ind, 1.0, config, rng);
        draws.push_back(out.theta[0]);
        draws.push_back(out.theta[1]);
    }
    const double sd = aggregate(draws).sd;
    REQUIRE(sd > 0.0095);
    REQUIRE(sd < 0.0105);
}

TEST_CASE("hyper-parameter noise is log-symmetric around the current value", "[mutation]") {
    MutationConfig config;
    Individual ind;
    ind.theta = {};
    ind.alpha[hp::learning_rate] = 0.001;
    RngStream rng(101);
    const int n = 100000;
    std::vector<double> lrs;
    lrs.reserve(n);
    for (int i = 0; i < n; ++i)
        lrs.push_back(mutate(ind, 0.5, config, rng).alpha.at(hp::learning_rate));
    const double median = aggregate(lrs).median;
    REQUIRE(median > 0.00098);
    REQUIRE(median < 0.00102);
    for (double lr : lrs) REQUIRE(lr > 0.0);

    // Empirical skew of log(alpha'/alpha) should be near zero.
    std::vector<double> logs;
    logs.reserve(n);
    for (double lr : lrs) logs.push_back(std::log(lr / 0.001));
    const Aggregate agg = aggregate(logs);
    double m3 = 0.0;
    for (double v : logs) m3 += std::pow(v - agg.mean, 3.0);
    m3 /= static_cast<double>(logs.size());
    const double skew = m3 / std::pow(agg.sd, 3.0);
    REQUIRE(std::abs(skew) < 0.05);
}

TEST_CASE("theta noise scales linearly with magnitude", "[mutation]") {
    MutationConfig config;
    config.hyper_noise_scale = 0.0;  // isolate the weight noise
    Individual ind;
    ind.theta = {0.0};
    ind.alpha[hp::learning_rate] = 1.0;
    auto sd_at = [&](double magnitude, std::uint64_t seed) {
        RngStream rng(seed);
        std::vector<double> draws;
        draws.reserve(100000);
        for (int i = 0; i < 100000; ++i)
            draws.push_back(mutate(ind, magnitude, config, rng).theta[0]);
        return aggregate(draws).sd;
    };
    const double ratio = sd_at(0.5, 5) / sd_at(1.0, 6);
    REQUIRE(ratio > 0.45);
    REQUIRE(ratio < 0.55);
}

TEST_CASE("hyper-parameters stay positive and clamped", "[mutation]") {
    MutationConfig config;
    Individual ind;
    ind.alpha[hp::learning_rate] = 1e-11;
    RngStream rng(13);
    std::size_t clamps = 0;
    for (int i = 0; i < 2000; ++i) {
        const Individual out = mutate(ind, 1.0, config, rng, &clamps);
        const double lr = out.alpha.at(hp::learning_rate);
        REQUIRE(lr >= config.hyper_min);
        REQUIRE(lr <= config.hyper_max);
    }
    // sigma = 15 at magnitude 1 kicks hard; some draws must have clamped.
    REQUIRE(clamps > 0);
}

TEST_CASE("mutation is deterministic under a fixed stream", "[mutation]") {
    MutationConfig config;
    RngStream a(55), b(55);
    const Individual x = mutate(sample_individual(), 0.7, config, a);
    const Individual y = mutate(sample_individual(), 0.7, config, b);
    REQUIRE(bit_identical(x.theta, y.theta));
    REQUIRE(x.alpha == y.alpha);
}

TEST_CASE("init_hyperparams matches the configured log-domain laws", "[mutation]") {
    MutationConfig config;
    RngStream rng(99);
    const int n = 100000;
    std::vector<double> lr_log10, reg_log10;
    lr_log10.reserve(n);
    for (int i = 0; i < n; ++i) {
        const HyperParams alpha = init_hyperparams(config, rng);
        REQUIRE(alpha.at(hp::learning_rate) > 0.0);
        REQUIRE(alpha.at(hp::regularization_rate) > 0.0);
        lr_log10.push_back(std::log10(alpha.at(hp::learning_rate)));
        reg_log10.push_back(std::log10(alpha.at(hp::regularization_rate)));
    }
    const Aggregate lr_agg = aggregate(lr_log10);
    REQUIRE(lr_agg.median > -4.1);
    REQUIRE(lr_agg.median < -3.9);
    REQUIRE(lr_agg.sd > 1.96);
    REQUIRE(lr_agg.sd < 2.04);
    const Aggregate reg_agg = aggregate(reg_log10);
    REQUIRE(std::abs(reg_agg.median) < 0.1);
}

TEST_CASE("log_symmetry_check at sigma 1, base 10", "[mutation]") {
    RngStream rng(7);
    const auto result = log_symmetry_check(1.0, 10.0, 1000000, rng);
    // P(factor < 1/10) = P(N(0,1) < -1) ~= 0.1587, same above 10.
    REQUIRE(std::abs(result.p_low - result.p_high) < 0.01);
    REQUIRE(std::abs(result.p_low - 0.1587) < 0.005);
    REQUIRE(std::abs(result.p_high - 0.1587) < 0.005);
}

TEST_CASE("log_symmetry_check degenerate and base-2 cases", "[mutation]") {
    RngStream rng(8);
    const auto zero = log_symmetry_check(0.0, 10.0, 1000, rng);
    REQUIRE(zero.p_low == 0.0);
    REQUIRE(zero.p_high == 0.0);

    RngStream rng2(9);
    const auto base2 = log_symmetry_check(1.0, 2.0, 1000000, rng2);
    REQUIRE(std::abs(base2.p_low - base2.p_high) < 0.01);
}
