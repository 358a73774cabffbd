#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "popdescent/fitness.hpp"
#include "popdescent/individual.hpp"
#include "popdescent/mutation.hpp"
#include "popdescent/rng.hpp"

namespace popdescent {

// What one iteration did: per-member fitness after the local update, who won,
// who was replaced, and how hard the replacements were mutated.
struct IterationTrace {
    std::uint64_t iteration = 0;
    std::vector<std::uint64_t> member_ids;
    std::vector<double> fitness;
    std::uint64_t best_id = 0;
    double best_fitness = 0.0;
    std::vector<std::uint64_t> replaced_ids;
    std::vector<std::uint64_t> replacement_source_ids;
    std::vector<double> mutation_magnitudes;
    std::size_t hyper_clamp_count = 0;
};

struct EngineConfig {
    MutationConfig mutation{};
    // Off: selection and copying still run, but replacements are exact copies
    // (mutation magnitude forced to zero).
    bool mutation_enabled = true;
    // Off: no selection at all; members evolve as independent local-update
    // runs, which reduces the engine to random search over the initial draws.
    bool replacement_enabled = true;
    // Local updates are pure per member, so any thread count gives identical
    // results.
    unsigned threads = 1;

    void validate() const { mutation.validate(); }
};

namespace detail {

// Runs fn(i) for i in [0, n), optionally across threads. Exceptions are
// captured and the lowest-index one is rethrown after the join.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::size_t argmin_fitness(const std::vector<double>& fitness,
                                  const std::vector<Individual>& members,
                                  const std::vector<std::size_t>& alive) {
    std::size_t best = alive.front();
    for (std::size_t idx : alive) {
        if (fitness[idx] < fitness[best] ||
            (fitness[idx] == fitness[best] && members[idx].id < members[best].id))
            best = idx;
    }
    return best;
}

}  // namespace detail

inline std::size_t argmax_fitness(const std::vector<double>& fitness,
                                  const std::vector<Individual>& members) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < members.size(); ++i) {
        if (fitness[i] > fitness[best] ||
            (fitness[i] == fitness[best] && members[i].id < members[best].id))
            best = i;
    }
    return best;
}

struct ReplacementRecord {
    std::vector<std::uint64_t> replaced_ids;
    std::vector<std::uint64_t> source_ids;
    std::vector<double> magnitudes;
};

// The m-elitist replacement step. The size - m weakest members (ties broken by
// lowest id) are dropped; each is replaced by a mutated copy of a member drawn
// independently, with replacement, from the fitness-weighted multinomial over
// ALL optimized members. Each copy is mutated by 1 - fitness(source) and gets
// a fresh id. The m survivors are carried over bit-identically.
//
// MutateFn: Individual(const Individual& source, double magnitude, RngStream&)
template <typename MutateFn>
Population replace_weakest(const Population& optimized, const std::vector<double>& fitnesses,
                           RngStream& rng, MutateFn&& mutate_fn,
                           ReplacementRecord* record = nullptr) {
    optimized.validate();
    if (fitnesses.size() != optimized.size())
        throw std::invalid_argument("replace_weakest: fitness vector does not match population");

    const auto probs = build_fitness_distribution(fitnesses);
    const std::size_t replacements = optimized.size() - optimized.elite_count;

    std::vector<std::size_t> alive(optimized.size());
    for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;

    Population next;
    next.elite_count = optimized.elite_count;
    next.next_id = optimized.next_id;
    next.members.reserve(optimized.size());

    std::vector<Individual> mutated;
    mutated.reserve(replacements);
    for (std::size_t k = 0; k < replacements; ++k) {
        const std::size_t weakest = detail::argmin_fitness(fitnesses, optimized.members, alive);
        alive.erase(std::find(alive.begin(), alive.end(), weakest));

        const std::size_t source = sample_index(probs, rng);
        const double magnitude = mutation_magnitude(fitnesses[source]);
        Individual child = mutate_fn(optimized.members[source], magnitude, rng);
        child.id = next.next_id++;
        if (record) {
            record->replaced_ids.push_back(optimized.members[weakest].id);
            record->source_ids.push_back(optimized.members[source].id);
            record->magnitudes.push_back(magnitude);
        }
        mutated.push_back(std::move(child));
    }

    for (std::size_t idx : alive) next.members.push_back(optimized.members[idx]);
    for (auto& child : mutated) next.members.push_back(std::move(child));
    return next;
}

// The user-provided pieces the engine runs against.
//
//   local_update:     Individual(const Individual&, const Batches&, RngStream&)
//   loss:             double(const Individual&, const Batch&)
//   training:         Batches(std::uint64_t iteration)  -- indexable run of batches
//   cross_validation: Batch(std::uint64_t iteration)    -- one scoring batch
//
// `Batches` and `Batch` are whatever the workload chooses; the engine never
// looks inside them. Fitness is always scored on the cross_validation draw;
// wiring that callable to the training partition turns the engine into the
// train-fitness-selection variant.
template <typename LocalUpdateFn, typename LossFn, typename TrainStream, typename CvStream>
struct Workload {
    LocalUpdateFn local_update;
    LossFn loss;
    TrainStream training;
    CvStream cross_validation;
};

template <typename L, typename F, typename T, typename C>
Workload(L, F, T, C) -> Workload<L, F, T, C>;

namespace detail {

template <typename Workload>
std::vector<double> score_members(const std::vector<Individual>& members, const Workload& w,
                                  std::uint64_t iteration) {
    const auto batch = w.cross_validation(iteration);
    std::vector<double> fitness(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
        double loss;
        try {
            loss = w.loss(members[i], batch);
        } catch (const std::exception& e) {
            throw std::runtime_error("scoring failed for individual " +
                                     std::to_string(members[i].id) + ": " + e.what());
        }
        if (!std::isfinite(loss))
            throw std::runtime_error("non-finite loss for individual " +
                                     std::to_string(members[i].id));
        fitness[i] = fitness_from_loss(loss);
    }
    return fitness;
}

}  // namespace detail

// One full iteration: local updates for every member, fitness scoring on a
// fresh cross-validation draw, then m-elitist replacement. All random draws
// are substreams of `run_rng` keyed by (purpose, iteration, member id), so the
// result is independent of execution order and thread count.
template <typename Workload>
std::pair<Population, IterationTrace> iterate(const Population& pop, const Workload& w,
                                              const EngineConfig& config, const RngStream& run_rng,
                                              std::uint64_t iteration) {
    pop.validate();
    config.validate();

    const auto batches = w.training(iteration);

    Population optimized = pop;
    detail::parallel_for(pop.size(), config.threads, [&](std::size_t i) {
        RngStream member_rng =
            run_rng.derive(streams::local_update, iteration, pop.members[i].id);
        try {
            optimized.members[i] = w.local_update(pop.members[i], batches, member_rng);
        } catch (const std::exception& e) {
            throw std::runtime_error("local update failed for individual " +
                                     std::to_string(pop.members[i].id) + ": " + e.what());
        }
        optimized.members[i].validate();
    });

    IterationTrace trace;
    trace.iteration = iteration;
    trace.fitness = detail::score_members(optimized.members, w, iteration);
    trace.member_ids.reserve(optimized.size());
    for (const auto& m : optimized.members) trace.member_ids.push_back(m.id);
    const std::size_t best = argmax_fitness(trace.fitness, optimized.members);
    trace.best_id = optimized.members[best].id;
    trace.best_fitness = trace.fitness[best];

    if (!config.replacement_enabled) return {std::move(optimized), std::move(trace)};

    RngStream evolve_rng = run_rng.derive(streams::evolve, iteration);
    ReplacementRecord record;
    auto mutate_fn = [&](const Individual& source, double magnitude, RngStream& rng) {
        const double applied = config.mutation_enabled ? magnitude : 0.0;
        return mutate(source, applied, config.mutation, rng, &trace.hyper_clamp_count);
    };
    Population next = replace_weakest(optimized, trace.fitness, evolve_rng, mutate_fn, &record);
    trace.replaced_ids = std::move(record.replaced_ids);
    trace.replacement_source_ids = std::move(record.source_ids);
    trace.mutation_magnitudes = std::move(record.magnitudes);
    return {std::move(next), std::move(trace)};
}

struct RunResult {
    Individual best;
    double best_fitness = 0.0;
    Population final_population;
    std::vector<IterationTrace> trace;
    std::uint64_t iterations = 0;
    // Highest fitness seen in any iteration; reporting only, the returned
    // individual is always the final population's best.
    double best_ever_fitness = 0.0;
};

// Converges-by-count predicate matching the experimental protocol.
struct FixedIterations {
    std::uint64_t count = 0;
    std::uint64_t seen = 0;
    bool operator()(const Population&) { return seen++ >= count; }
};

// Runs iterations until `converged(pop)` is true, then scores the population
// on one more cross-validation draw and returns the fittest member (ties to
// the lowest id). With an immediately-true predicate no iteration runs and the
// initial population is scored as-is.
template <typename ConvergedFn, typename Workload>
RunResult run(Population pop, ConvergedFn&& converged, const Workload& w,
              const EngineConfig& config, const RngStream& run_rng) {
    pop.validate();
    config.validate();

    RunResult result;
    std::uint64_t iteration = 0;
    while (!converged(pop)) {
        auto [next, trace] = iterate(pop, w, config, run_rng, iteration);
        pop = std::move(next);
        result.best_ever_fitness = std::max(result.best_ever_fitness, trace.best_fitness);
        result.trace.push_back(std::move(trace));
        ++iteration;
    }
    result.iterations = iteration;

    const auto fitness = detail::score_members(pop.members, w, iteration);
    const std::size_t best = argmax_fitness(fitness, pop.members);
    result.best = pop.members[best];
    result.best_fitness = fitness[best];
    result.best_ever_fitness = std::max(result.best_ever_fitness, result.best_fitness);
    result.final_population = std::move(pop);
    return result;
}

}  // namespace popdescent
