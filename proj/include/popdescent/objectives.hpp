#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace popdescent {

// Closed-form test objectives with exact gradients.
//   sphere:     sum x_i^2, any dimension
//   rosenbrock: standard a=1, b=100 form, dimension >= 2
inline std::pair<double, std::vector<double>> analytic_objective(std::string_view name,
                                                                 std::span<const double> x) {
    if (name == "sphere") {
        double value = 0.0;
        std::vector<double> grad(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            value += x[i] * x[i];
            grad[i] = 2.0 * x[i];
        }
        return {value, std::move(grad)};
    }
    if (name == "rosenbrock") {
        if (x.size() < 2)
            throw std::invalid_argument("rosenbrock requires dimension >= 2");
        double value = 0.0;
        std::vector<double> grad(x.size(), 0.0);
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            const double a = x[i + 1] - x[i] * x[i];
            const double b = 1.0 - x[i];
            value += 100.0 * a * a + b * b;
            grad[i] += -400.0 * x[i] * a - 2.0 * b;
            grad[i + 1] += 200.0 * a;
        }
        return {value, std::move(grad)};
    }
    throw std::invalid_argument("unknown objective '" + std::string(name) + "'");
}

// Central-difference gradient, (f(x+h e_i) - f(x-h e_i)) / 2h per coordinate.
// Independent of any backpropagation path; used as the gradient oracle.
template <typename F>
std::vector<double> finite_diff_grad(F&& f, std::span<const double> x, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: h must be positive");
    std::vector<double> point(x.begin(), x.end());
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double saved = point[i];
        point[i] = saved + h;
        const double up = f(std::span<const double>(point));
        point[i] = saved - h;
        const double down = f(std::span<const double>(point));
        point[i] = saved;
        if (!std::isfinite(up) || !std::isfinite(down))
            throw std::runtime_error("finite_diff_grad: non-finite objective value at coordinate " +
                                     std::to_string(i));
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

}  // namespace popdescent
