#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace popdescent {

// Named hyper-parameters of one individual. std::map keeps iteration order
// deterministic, which matters for random-stream alignment.
using HyperParams = std::map<std::string, double>;

namespace hp {
inline constexpr const char* learning_rate = "learning_rate";
inline constexpr const char* regularization_rate = "regularization_rate";
}  // namespace hp

// First/second moment accumulators for Adam. Vectors stay empty until the
// first step, so a freshly constructed state costs nothing.
struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t step = 0;

    bool initialized() const noexcept { return !first_moment.empty(); }
};

// One candidate solution: flat model parameters, named hyper-parameters, and
// the local optimizer's state. `id` is stable across iterations and breaks
// ties deterministically.
struct Individual {
    std::vector<double> theta;
    HyperParams alpha;
    AdamState opt_state;
    std::uint64_t id = 0;

    double hyper(const std::string& name) const {
        auto it = alpha.find(name);
        if (it == alpha.end())
            throw std::invalid_argument("individual " + std::to_string(id) +
                                        " has no hyper-parameter '" + name + "'");
        return it->second;
    }

    double learning_rate() const { return hyper(hp::learning_rate); }

    double regularization_rate() const {
        auto it = alpha.find(hp::regularization_rate);
        return it == alpha.end() ? 0.0 : it->second;
    }

    // All alpha entries strictly positive and finite; theta free of NaN/Inf.
    void validate() const {
        for (const auto& [name, value] : alpha) {
            if (!(value > 0.0) || !std::isfinite(value))
                throw std::invalid_argument("individual " + std::to_string(id) +
                                            ": hyper-parameter '" + name +
                                            "' must be positive and finite");
        }
        for (double v : theta) {
            if (!std::isfinite(v))
                throw std::runtime_error("individual " + std::to_string(id) +
                                         ": theta contains a non-finite value");
        }
    }
};

// Fixed-size multiset of individuals with elite count m. `next_id` feeds
// fresh ids to replacement copies so tie-breaking stays unambiguous.
struct Population {
    std::vector<Individual> members;
    std::size_t elite_count = 1;
    std::uint64_t next_id = 0;

    std::size_t size() const noexcept { return members.size(); }

    void validate() const {
        if (members.empty()) throw std::invalid_argument("population is empty");
        if (elite_count == 0 || elite_count >= members.size())
            throw std::invalid_argument("elite count m must satisfy 0 < m < population size (m=" +
                                        std::to_string(elite_count) + ", size=" +
                                        std::to_string(members.size()) + ")");
    }
};

}  // namespace popdescent
