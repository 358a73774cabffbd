#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace popdescent {

enum class ScheduleKind { exponential, inverse_time, polynomial };

inline ScheduleKind schedule_from_name(const std::string& name) {
    if (name == "exponential") return ScheduleKind::exponential;
    if (name == "inverse_time") return ScheduleKind::inverse_time;
    if (name == "polynomial") return ScheduleKind::polynomial;
    throw std::invalid_argument("unknown schedule kind '" + name + "'");
}

inline const char* schedule_name(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::exponential: return "exponential";
        case ScheduleKind::inverse_time: return "inverse_time";
        default: return "polynomial";
    }
}

// A predetermined learning-rate curve over gradient steps.
//   exponential:  lr0 * r^(step / s)
//   inverse_time: lr0 / (1 + r * step / s)
//   polynomial:   (lr0 - end_lr) * (1 - min(step, s)/s)^p + end_lr
struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::exponential;
    double initial_lr = 0.01;
    double decay_rate = 0.9;
    std::uint64_t decay_steps = 1000;
    double end_lr = 0.0;  // polynomial only
    double power = 1.0;   // polynomial only

    void validate() const {
        if (!(initial_lr > 0.0)) throw std::invalid_argument("schedule: initial_lr must be positive");
        if (decay_steps < 1) throw std::invalid_argument("schedule: decay_steps must be >= 1");
        if (kind != ScheduleKind::polynomial && !(decay_rate > 0.0))
            throw std::invalid_argument("schedule: decay_rate must be positive");
        if (kind == ScheduleKind::polynomial) {
            if (end_lr < 0.0) throw std::invalid_argument("schedule: end_lr must be nonnegative");
            if (!(power > 0.0)) throw std::invalid_argument("schedule: power must be positive");
        }
    }
};

inline double schedule_lr(const ScheduleSpec& spec, std::uint64_t step) {
    spec.validate();
    const double t = static_cast<double>(step);
    const double s = static_cast<double>(spec.decay_steps);
    switch (spec.kind) {
        case ScheduleKind::exponential:
            return spec.initial_lr * std::pow(spec.decay_rate, t / s);
        case ScheduleKind::inverse_time:
            return spec.initial_lr / (1.0 + spec.decay_rate * t / s);
        case ScheduleKind::polynomial: {
            const double clipped = std::min(t, s);
            return (spec.initial_lr - spec.end_lr) * std::pow(1.0 - clipped / s, spec.power) +
                   spec.end_lr;
        }
    }
    throw std::logic_error("unreachable schedule kind");
}

// True once the best (minimum) value in the history is more than `patience`
// epochs old. Never fires while the loss is still improving each epoch.
inline bool early_stop(const std::vector<double>& cv_history, std::size_t patience) {
    if (cv_history.empty()) throw std::invalid_argument("early_stop: empty history");
    std::size_t best = 0;
    for (std::size_t i = 1; i < cv_history.size(); ++i)
        if (cv_history[i] < cv_history[best]) best = i;
    return cv_history.size() - 1 - best > patience;
}

}  // namespace popdescent
