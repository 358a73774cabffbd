#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "popdescent/individual.hpp"

namespace popdescent {

namespace detail {
inline void check_grad(const Individual& ind, std::span<const double> grad) {
    if (grad.size() != ind.theta.size())
        throw std::invalid_argument("gradient length " + std::to_string(grad.size()) +
                                    " does not match theta length " +
                                    std::to_string(ind.theta.size()));
    for (double g : grad) {
        if (!std::isfinite(g))
            throw std::runtime_error("non-finite gradient for individual " +
                                     std::to_string(ind.id));
    }
}
}  // namespace detail

// One descent step: theta <- theta - lr * grad.
inline Individual sgd_step(Individual ind, std::span<const double> grad) {
    detail::check_grad(ind, grad);
    const double lr = ind.learning_rate();
    for (std::size_t i = 0; i < ind.theta.size(); ++i) ind.theta[i] -= lr * grad[i];
    return ind;
}

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Bias-corrected Adam step using the individual's learning rate; the moment
// state rides along on the individual and is sized lazily on the first step.
inline Individual adam_step(Individual ind, std::span<const double> grad,
                            const AdamParams& params = {}) {
    detail::check_grad(ind, grad);
    AdamState& st = ind.opt_state;
    if (!st.initialized()) {
        st.first_moment.assign(ind.theta.size(), 0.0);
        st.second_moment.assign(ind.theta.size(), 0.0);
        st.step = 0;
    } else if (st.first_moment.size() != ind.theta.size()) {
        throw std::invalid_argument("optimizer state does not match theta length for individual " +
                                    std::to_string(ind.id));
    }
    ++st.step;
    const double lr = ind.learning_rate();
    const double c1 = 1.0 - std::pow(params.beta1, static_cast<double>(st.step));
    const double c2 = 1.0 - std::pow(params.beta2, static_cast<double>(st.step));
    for (std::size_t i = 0; i < ind.theta.size(); ++i) {
        double& m = st.first_moment[i];
        double& v = st.second_moment[i];
        m = params.beta1 * m + (1.0 - params.beta1) * grad[i];
        v = params.beta2 * v + (1.0 - params.beta2) * grad[i] * grad[i];
        ind.theta[i] -= lr * (m / c1) / (std::sqrt(v / c2) + params.epsilon);
    }
    return ind;
}

enum class Optimizer { sgd, adam };

inline Optimizer optimizer_from_name(const std::string& name) {
    if (name == "sgd") return Optimizer::sgd;
    if (name == "adam") return Optimizer::adam;
    throw std::invalid_argument("unknown optimizer '" + name + "'");
}

inline const char* optimizer_name(Optimizer opt) {
    return opt == Optimizer::sgd ? "sgd" : "adam";
}

inline Individual optimizer_step(Optimizer opt, Individual ind, std::span<const double> grad) {
    return opt == Optimizer::sgd ? sgd_step(std::move(ind), grad)
                                 : adam_step(std::move(ind), grad);
}

}  // namespace popdescent
