#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "popdescent/rng.hpp"

namespace popdescent {

// Maps a nonnegative loss onto (0, 1], strictly decreasing: 2 / (2 + loss).
// The mutation magnitude of an individual is 1 minus this value.
inline double fitness_from_loss(double loss) {
    if (std::isnan(loss) || std::isinf(loss) || loss < 0.0)
        throw std::invalid_argument("fitness_from_loss: loss must be finite and nonnegative");
    return 2.0 / (2.0 + loss);
}

inline double mutation_magnitude(double fitness) { return 1.0 - fitness; }

// Normalizes fitness values into replacement-sampling probabilities.
// An all-zero vector falls back to the uniform distribution.
inline std::vector<double> build_fitness_distribution(const std::vector<double>& fitnesses) {
    if (fitnesses.empty())
        throw std::invalid_argument("build_fitness_distribution: empty fitness vector");
    long double total = 0.0L;
    for (double f : fitnesses) {
        if (!(f >= 0.0) || !(f <= 1.0))
            throw std::invalid_argument("build_fitness_distribution: fitness outside [0,1]");
        total += f;
    }
    std::vector<double> probs(fitnesses.size());
    if (total <= 0.0L) {
        const double u = 1.0 / static_cast<double>(fitnesses.size());
        for (double& p : probs) p = u;
        return probs;
    }
    for (std::size_t i = 0; i < fitnesses.size(); ++i)
        probs[i] = static_cast<double>(fitnesses[i] / total);
    return probs;
}

// One draw from a categorical distribution via cumulative inversion.
// Never returns a zero-probability index.
inline std::size_t sample_index(const std::vector<double>& probs, RngStream& rng) {
    if (probs.empty()) throw std::invalid_argument("sample_index: empty distribution");
    const double u = rng.uniform();
    long double cum = 0.0L;
    std::size_t last_positive = probs.size();
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) last_positive = i;
        cum += probs[i];
        if (u < static_cast<double>(cum)) return probs[i] > 0.0 ? i : last_positive;
    }
    if (last_positive == probs.size())
        throw std::invalid_argument("sample_index: all probabilities are zero");
    return last_positive;
}

}  // namespace popdescent
