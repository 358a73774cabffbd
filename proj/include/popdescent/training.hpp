#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "popdescent/dataset.hpp"
#include "popdescent/engine.hpp"
#include "popdescent/mlp.hpp"
#include "popdescent/mutation.hpp"
#include "popdescent/optimizers.hpp"
#include "popdescent/rng.hpp"
#include "popdescent/schedules.hpp"
#include "popdescent/search.hpp"

namespace popdescent {

// The minibatches one engine iteration trains on, materialized lazily.
// Batch k of iteration i is always sampler.draw(i * size + k), so a member's
// trajectory can be replayed outside the engine draw for draw.
class BatchRun {
public:
    BatchRun(const BatchSampler& sampler, std::uint64_t iteration, std::size_t count)
        : sampler_(&sampler), iteration_(iteration), count_(count) {}

    std::size_t size() const noexcept { return count_; }
    Batch operator[](std::size_t k) const { return sampler_->draw(iteration_ * count_ + k); }

private:
    const BatchSampler* sampler_;
    std::uint64_t iteration_;
    std::size_t count_;
};

// Local update for MLP individuals: one optimizer step per batch in the run,
// using the individual's own learning and regularization rates. Pure in
// (individual, batches); the RNG substream is part of the contract but unused
// because SGD and Adam are deterministic.
struct MlpLocalUpdate {
    const Mlp* model = nullptr;
    Optimizer optimizer = Optimizer::adam;
    std::atomic<std::uint64_t>* step_counter = nullptr;

    template <typename Batches>
    Individual operator()(const Individual& ind, const Batches& batches, RngStream&) const {
        Individual current = ind;
        for (std::size_t k = 0; k < batches.size(); ++k) {
            auto [report, grad] =
                model->loss_and_grad(current.theta, batches[k], current.regularization_rate());
            current = optimizer_step(optimizer, std::move(current), grad);
            if (step_counter) step_counter->fetch_add(1, std::memory_order_relaxed);
        }
        return current;
    }
};

// Fitness loss: total (data + regularization) loss on the scoring batch.
struct MlpLoss {
    const Mlp* model = nullptr;

    double operator()(const Individual& ind, const Batch& batch) const {
        return model->loss(ind.theta, batch, ind.regularization_rate()).total;
    }
};

inline double loss_from_fitness(double fitness) { return 2.0 / fitness - 2.0; }

enum class AlphaInit { random, fixed };
enum class FitnessSource { cross_validation, training };

// Everything needed to run the population engine on one dataset split.
struct PopDescentRunSpec {
    std::size_t population_size = 5;
    std::size_t replaced = 2;  // |P| - m
    std::uint64_t iterations = 50;
    std::size_t batches_per_iteration = 128;
    std::size_t epochs_per_iteration = 1;
    std::size_t batch_size = 64;
    std::size_t cv_batch_size = 64;
    Optimizer optimizer = Optimizer::adam;
    AlphaInit alpha_init = AlphaInit::random;
    FitnessSource fitness_source = FitnessSource::cross_validation;
    double fixed_learning_rate = 0.001;
    double fixed_regularization_rate = 0.001;
    EngineConfig engine{};

    std::size_t elite_count() const {
        if (replaced == 0 || replaced >= population_size)
            throw std::invalid_argument("replaced count must satisfy 0 < replaced < population");
        return population_size - replaced;
    }

    std::uint64_t planned_steps() const {
        return iterations * population_size * batches_per_iteration * epochs_per_iteration;
    }
};

struct PopDescentOutcome {
    RunResult result;
    std::uint64_t gradient_steps = 0;
    // (cumulative steps, best-member cv loss) per iteration
    std::vector<std::pair<std::uint64_t, double>> cv_trace;
};

inline Population make_population(const Mlp& model, const PopDescentRunSpec& spec,
                                  const RngStream& root) {
    Population pop;
    pop.elite_count = spec.elite_count();
    pop.next_id = spec.population_size;
    pop.members.reserve(spec.population_size);
    for (std::size_t i = 0; i < spec.population_size; ++i) {
        Individual ind;
        ind.id = i;
        RngStream theta_rng = root.derive(streams::init_theta, i);
        ind.theta = model.init_theta(theta_rng);
        if (spec.alpha_init == AlphaInit::random) {
            RngStream alpha_rng = root.derive(streams::init_alpha, i);
            ind.alpha = init_hyperparams(spec.engine.mutation, alpha_rng);
        } else {
            ind.alpha[hp::learning_rate] = spec.fixed_learning_rate;
            ind.alpha[hp::regularization_rate] = spec.fixed_regularization_rate;
        }
        pop.members.push_back(std::move(ind));
    }
    return pop;
}

// Runs the full engine on a train/cv split. With fitness_source == training,
// scoring batches come from the train partition instead, which is the
// train-fitness selection variant.
inline PopDescentOutcome run_popdescent_trial(const Mlp& model, const Dataset& train,
                                              const Dataset& cv, const PopDescentRunSpec& spec,
                                              const RngStream& root) {
    BatchSampler train_sampler(train, spec.batch_size, root.derive(streams::train_batch));
    const Dataset& score_data =
        spec.fitness_source == FitnessSource::cross_validation ? cv : train;
    BatchSampler score_sampler(score_data, std::min(spec.cv_batch_size, score_data.size()),
                               root.derive(streams::cv_batch));

    std::atomic<std::uint64_t> steps{0};
    const std::size_t batches_per_iter = spec.batches_per_iteration * spec.epochs_per_iteration;
    auto workload = Workload{
        MlpLocalUpdate{&model, spec.optimizer, &steps},
        MlpLoss{&model},
        [&](std::uint64_t iteration) { return BatchRun(train_sampler, iteration, batches_per_iter); },
        [&](std::uint64_t iteration) { return score_sampler.draw(iteration); },
    };

    Population pop = make_population(model, spec, root);
    RunResult result =
        run(std::move(pop), FixedIterations{spec.iterations}, workload, spec.engine, root);

    PopDescentOutcome outcome;
    outcome.gradient_steps = steps.load();
    const std::uint64_t steps_per_iteration =
        spec.population_size * spec.batches_per_iteration * spec.epochs_per_iteration;
    outcome.cv_trace.reserve(result.trace.size());
    for (const auto& trace : result.trace)
        outcome.cv_trace.emplace_back((trace.iteration + 1) * steps_per_iteration,
                                      loss_from_fitness(trace.best_fitness));
    outcome.result = std::move(result);
    return outcome;
}

// Trains one model per hyper-parameter point, epoch by epoch, for the grid,
// random-search, and schedule-search baselines. A point that carries
// schedule keys drives the learning rate through schedule_lr each step.
class EpochTrainer {
public:
    struct Settings {
        Optimizer optimizer = Optimizer::adam;
        std::size_t batch_size = 64;
        double default_regularization = 0.0;
    };

    EpochTrainer(const Mlp& model, const Dataset& train, const Dataset& cv, Settings settings)
        : model_(&model), train_(&train), cv_(&cv), settings_(settings) {}

    TrialResult operator()(const HyperParams& point, const TrainPlan& plan,
                           const RngStream& rng) const {
        const std::optional<ScheduleSpec> schedule = schedule_from_point(point);

        Individual ind;
        ind.id = 0;
        RngStream theta_rng = rng.derive(streams::init_theta);
        ind.theta = model_->init_theta(theta_rng);
        ind.alpha[hp::learning_rate] =
            schedule ? schedule->initial_lr : require(point, hp::learning_rate);
        const auto reg_it = point.find(hp::regularization_rate);
        ind.alpha[hp::regularization_rate] =
            reg_it != point.end() ? reg_it->second : settings_.default_regularization;

        BatchSampler sampler(*train_, std::min(settings_.batch_size, train_->size()),
                             rng.derive(streams::train_batch));
        const std::size_t batches_per_epoch = sampler.batches_per_epoch();
        std::size_t max_epochs = plan.epochs;
        if (max_epochs == 0) {
            if (plan.max_steps == 0)
                throw std::invalid_argument("train plan needs either epochs or max_steps");
            max_epochs = static_cast<std::size_t>(plan.max_steps / batches_per_epoch);
            if (max_epochs == 0) max_epochs = 1;
        }

        TrialResult result;
        result.hyperparams = point;
        const Batch cv_batch = cv_->as_batch();
        for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
            for (std::size_t k = 0; k < batches_per_epoch; ++k) {
                if (schedule)
                    ind.alpha[hp::learning_rate] =
                        schedule_lr(*schedule, result.gradient_steps);
                const Batch batch = sampler.epoch_batch(epoch, k);
                auto [report, grad] =
                    model_->loss_and_grad(ind.theta, batch, ind.regularization_rate());
                ind = optimizer_step(settings_.optimizer, std::move(ind), grad);
                ++result.gradient_steps;
            }
            const double cv_loss =
                model_->loss(ind.theta, cv_batch, ind.regularization_rate()).total;
            result.cv_history.push_back(cv_loss);
            result.cv_trace.emplace_back(result.gradient_steps, cv_loss);
            if (plan.early_stopping && early_stop(result.cv_history, plan.patience)) break;
        }
        result.final_cv_loss = result.cv_history.empty() ? 0.0 : result.cv_history.back();
        result.model = std::move(ind);
        return result;
    }

    // Axes for a schedule-search space, matching the ranges the schedule
    // baselines sample from.
    static void add_schedule_axes(SearchSpace& space) {
        space.axes["schedule_kind"] = std::vector<double>{0.0, 1.0, 2.0};
        space.axes["initial_lr"] = LogRange{1e-4, 1e-2};
        space.axes["decay_rate"] = LogRange{0.8, 0.99};
        space.axes["decay_steps"] = LogRange{1000.0, 10000.0};
        space.axes["end_lr"] = LogRange{1e-5, 1e-2};
        space.axes["power"] = LogRange{0.1, 2.0};
    }

private:
    static double require(const HyperParams& point, const char* key) {
        auto it = point.find(key);
        if (it == point.end())
            throw std::invalid_argument(std::string("hyper-parameter point lacks '") + key + "'");
        return it->second;
    }

    static std::optional<ScheduleSpec> schedule_from_point(const HyperParams& point) {
        auto it = point.find("schedule_kind");
        if (it == point.end()) return std::nullopt;
        ScheduleSpec spec;
        const int kind = static_cast<int>(it->second + 0.5);
        spec.kind = kind == 0   ? ScheduleKind::exponential
                    : kind == 1 ? ScheduleKind::inverse_time
                                : ScheduleKind::polynomial;
        spec.initial_lr = require(point, "initial_lr");
        spec.decay_rate = require(point, "decay_rate");
        spec.decay_steps = static_cast<std::uint64_t>(require(point, "decay_steps") + 0.5);
        spec.end_lr = require(point, "end_lr");
        spec.power = require(point, "power");
        if (spec.end_lr > spec.initial_lr) spec.end_lr = spec.initial_lr;
        spec.validate();
        return spec;
    }

    const Mlp* model_;
    const Dataset* train_;
    const Dataset* cv_;
    Settings settings_;
};

}  // namespace popdescent
