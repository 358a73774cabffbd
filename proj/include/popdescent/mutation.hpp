#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "popdescent/individual.hpp"
#include "popdescent/rng.hpp"

namespace popdescent {

// Log-domain initialization: draws base^N(mean, sd).
struct LogInit {
    double mean = 0.0;
    double sd = 1.0;
    double base = 10.0;

    double sample(RngStream& rng) const { return std::pow(base, rng.gaussian(mean, sd)); }
};

// Noise scales for the evolution step. Weight noise is additive Gaussian with
// sd weight_noise_scale * magnitude; hyper-parameter noise is multiplicative,
// hyper_noise_base ^ N(0, hyper_noise_scale * magnitude).
struct MutationConfig {
    double weight_noise_scale = 0.01;
    double hyper_noise_scale = 15.0;
    double hyper_noise_base = 2.0;
    LogInit lr_init{-4.0, 2.0, 10.0};
    LogInit reg_init{0.0, 2.0, 10.0};
    // Keeps local updates finite after extreme multiplicative kicks.
    double hyper_min = 1e-12;
    double hyper_max = 1e6;

    void validate() const {
        if (weight_noise_scale < 0.0 || hyper_noise_scale < 0.0)
            throw std::invalid_argument("mutation noise scales must be nonnegative");
        if (!(hyper_noise_base > 1.0))
            throw std::invalid_argument("hyper_noise_base must exceed 1");
        if (!(hyper_min > 0.0) || !(hyper_max > hyper_min))
            throw std::invalid_argument("hyper-parameter clamp range is invalid");
    }
};

// Perturbs a copy of `ind` by `magnitude` in [0, 1]. Weights get additive
// Gaussian noise, hyper-parameters a multiplicative log-symmetric factor.
// Magnitude zero returns the individual bit-for-bit unchanged and consumes no
// randomness. `clamp_count`, when given, accumulates how many hyper-parameters
// hit the clamp range.
inline Individual mutate(const Individual& ind, double magnitude, const MutationConfig& config,
                         RngStream& rng, std::size_t* clamp_count = nullptr) {
    if (!(magnitude >= 0.0) || !(magnitude <= 1.0))
        throw std::invalid_argument("mutate: magnitude must lie in [0,1]");
    Individual out = ind;
    if (magnitude == 0.0) return out;

    const double theta_sd = config.weight_noise_scale * magnitude;
    if (theta_sd > 0.0) {
        for (double& w : out.theta) w += rng.gaussian(0.0, theta_sd);
    }
    const double hyper_sd = config.hyper_noise_scale * magnitude;
    if (hyper_sd > 0.0) {
        for (auto& [name, value] : out.alpha) {
            value *= std::pow(config.hyper_noise_base, rng.gaussian(0.0, hyper_sd));
            const double clamped = std::clamp(value, config.hyper_min, config.hyper_max);
            if (clamped != value && clamp_count) ++*clamp_count;
            value = clamped;
        }
    }
    return out;
}

// Fresh hyper-parameters from the configured log-domain distributions.
inline HyperParams init_hyperparams(const MutationConfig& config, RngStream& rng) {
    HyperParams alpha;
    alpha[hp::learning_rate] = config.lr_init.sample(rng);
    alpha[hp::regularization_rate] = config.reg_init.sample(rng);
    return alpha;
}

struct LogSymmetryResult {
    double p_low = 0.0;   // fraction of factors below 1/base
    double p_high = 0.0;  // fraction of factors above base
};

// Empirically checks that multiplicative noise base^N(0, sigma) is
// log-symmetric: scaling by 1/base and by base are equally likely.
inline LogSymmetryResult log_symmetry_check(double sigma, double base, std::size_t n,
                                            RngStream& rng) {
    if (!(base > 1.0)) throw std::invalid_argument("log_symmetry_check: base must exceed 1");
    std::size_t low = 0, high = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double factor = std::pow(base, rng.gaussian(0.0, sigma));
        if (factor < 1.0 / base) ++low;
        if (factor > base) ++high;
    }
    const double dn = static_cast<double>(n);
    return {static_cast<double>(low) / dn, static_cast<double>(high) / dn};
}

}  // namespace popdescent
