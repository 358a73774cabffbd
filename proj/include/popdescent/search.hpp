#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "popdescent/individual.hpp"
#include "popdescent/rng.hpp"

namespace popdescent {

// One hyper-parameter axis: a discrete candidate list (grid search) or a
// continuous range sampled log-uniformly (random search).
struct LogRange {
    double low = 0.0;
    double high = 0.0;
};

using SearchAxis = std::variant<std::vector<double>, LogRange>;

// Axes are keyed by hyper-parameter name; map order makes Cartesian-product
// enumeration and sampling deterministic.
struct SearchSpace {
    std::map<std::string, SearchAxis> axes;

    void validate() const {
        if (axes.empty()) throw std::invalid_argument("search space has no axes");
        for (const auto& [name, axis] : axes) {
            if (const auto* list = std::get_if<std::vector<double>>(&axis)) {
                if (list->empty())
                    throw std::invalid_argument("axis '" + name + "' has an empty candidate list");
            } else {
                const auto& range = std::get<LogRange>(axis);
                if (!(range.low > 0.0) || !(range.low < range.high))
                    throw std::invalid_argument("axis '" + name +
                                                "' needs 0 < low < high for log sampling");
            }
        }
    }

    bool all_discrete() const {
        for (const auto& [name, axis] : axes)
            if (!std::holds_alternative<std::vector<double>>(axis)) return false;
        return true;
    }

    std::size_t grid_size() const {
        std::size_t n = 1;
        for (const auto& [name, axis] : axes) n *= std::get<std::vector<double>>(axis).size();
        return n;
    }

    // Row-major point of the Cartesian product, axes in key order.
    HyperParams grid_point(std::size_t index) const {
        HyperParams point;
        std::size_t stride = grid_size();
        for (const auto& [name, axis] : axes) {
            const auto& list = std::get<std::vector<double>>(axis);
            stride /= list.size();
            point[name] = list[(index / stride) % list.size()];
        }
        return point;
    }

    HyperParams sample(RngStream& rng) const {
        HyperParams point;
        for (const auto& [name, axis] : axes) {
            if (const auto* list = std::get_if<std::vector<double>>(&axis)) {
                point[name] = (*list)[static_cast<std::size_t>(rng.uniform_below(list->size()))];
            } else {
                const auto& range = std::get<LogRange>(axis);
                point[name] = std::exp(rng.uniform(std::log(range.low), std::log(range.high)));
            }
        }
        return point;
    }
};

// How a trainer should run one candidate. Probe runs train for a couple of
// epochs; full runs train to the step budget, optionally with early stopping.
struct TrainPlan {
    std::uint64_t max_steps = 0;
    std::size_t epochs = 0;  // 0: derive epochs from max_steps
    bool early_stopping = false;
    std::size_t patience = 2;
};

// What a trainer reports back for one candidate.
struct TrialResult {
    HyperParams hyperparams;
    Individual model;
    double final_cv_loss = 0.0;
    std::uint64_t gradient_steps = 0;
    std::vector<double> cv_history;
    std::vector<std::pair<std::uint64_t, double>> cv_trace;  // (cumulative steps, cv loss)
};

struct SearchOutcome {
    HyperParams best_hyperparams;
    TrialResult best;
    std::uint64_t total_gradient_steps = 0;
    std::vector<double> trial_cv_losses;
};

// Exhaustive search: trains one model per grid point to the full budget and
// keeps the point with the lowest final cross-validation loss. Total gradient
// steps are exactly grid_size * budget_per_model.
//
// Trainer: TrialResult(const HyperParams&, const TrainPlan&, RngStream&)
template <typename Trainer>
SearchOutcome grid_search(const SearchSpace& space, Trainer&& trainer,
                          std::uint64_t budget_per_model, const RngStream& rng) {
    space.validate();
    if (!space.all_discrete())
        throw std::invalid_argument("grid_search requires all-discrete axes");
    if (budget_per_model == 0)
        throw std::invalid_argument("grid_search: budget_per_model must be positive");

    SearchOutcome outcome;
    const std::size_t points = space.grid_size();
    TrainPlan plan;
    plan.max_steps = budget_per_model;
    bool have_best = false;
    for (std::size_t i = 0; i < points; ++i) {
        const HyperParams point = space.grid_point(i);
        RngStream trial_rng = rng.derive(streams::trial, i);
        TrialResult result = trainer(point, plan, trial_rng);
        outcome.total_gradient_steps += result.gradient_steps;
        outcome.trial_cv_losses.push_back(result.final_cv_loss);
        if (!have_best || result.final_cv_loss < outcome.best.final_cv_loss) {
            have_best = true;
            outcome.best = std::move(result);
            outcome.best_hyperparams = point;
        }
    }
    return outcome;
}

// Random search with short probes: samples `trials` candidates, trains each
// for `probe_epochs`, then retrains the winner from a fresh initialization
// with early stopping. Probe models are discarded; only hyper-parameters carry
// over, so the final model comes from the full run.
template <typename Trainer>
SearchOutcome random_search(const SearchSpace& space, std::size_t trials, std::size_t probe_epochs,
                            Trainer&& trainer, const RngStream& rng, std::uint64_t full_budget,
                            std::size_t patience = 2) {
    space.validate();
    if (trials == 0) throw std::invalid_argument("random_search: need at least one trial");

    SearchOutcome outcome;
    TrainPlan probe_plan;
    probe_plan.epochs = probe_epochs;

    RngStream sample_rng = rng.derive(streams::trial, std::uint64_t{0xa11});
    bool have_best = false;
    HyperParams best_point;
    double best_probe_loss = 0.0;
    for (std::size_t i = 0; i < trials; ++i) {
        const HyperParams point = space.sample(sample_rng);
        RngStream trial_rng = rng.derive(streams::trial, i + 1);
        TrialResult result = trainer(point, probe_plan, trial_rng);
        outcome.total_gradient_steps += result.gradient_steps;
        outcome.trial_cv_losses.push_back(result.final_cv_loss);
        if (!have_best || result.final_cv_loss < best_probe_loss) {
            have_best = true;
            best_probe_loss = result.final_cv_loss;
            best_point = point;
        }
    }

    TrainPlan full_plan;
    full_plan.max_steps = full_budget;
    full_plan.early_stopping = true;
    full_plan.patience = patience;
    RngStream final_rng = rng.derive(streams::trial, std::uint64_t{0xf17a1});
    outcome.best = trainer(best_point, full_plan, final_rng);
    outcome.best_hyperparams = best_point;
    outcome.total_gradient_steps += outcome.best.gradient_steps;
    return outcome;
}

}  // namespace popdescent
