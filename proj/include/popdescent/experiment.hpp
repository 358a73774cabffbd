#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "popdescent/config.hpp"
#include "popdescent/dataset.hpp"
#include "popdescent/mlp.hpp"
#include "popdescent/mutation.hpp"
#include "popdescent/report.hpp"
#include "popdescent/search.hpp"
#include "popdescent/training.hpp"

namespace popdescent {

// Hardware-independent compute accounting:
// total = iterations * model count * batches * epochs-per-iteration.
inline std::uint64_t gradient_steps(std::uint64_t iterations, std::uint64_t model_count,
                                    std::uint64_t batches_per_iteration,
                                    std::uint64_t epochs_per_iteration = 1) {
    if (iterations == 0 || model_count == 0 || batches_per_iteration == 0 ||
        epochs_per_iteration == 0)
        throw std::invalid_argument("gradient_steps: all factors must be positive");
    return iterations * model_count * batches_per_iteration * epochs_per_iteration;
}

enum class ExperimentMode { benchmark, convergence, ablation, sensitivity, sample_dist };

inline ExperimentMode mode_from_name(const std::string& name) {
    if (name == "benchmark" || name == "bench") return ExperimentMode::benchmark;
    if (name == "convergence" || name == "converge") return ExperimentMode::convergence;
    if (name == "ablation" || name == "ablate") return ExperimentMode::ablation;
    if (name == "sensitivity") return ExperimentMode::sensitivity;
    if (name == "sample-dist" || name == "sample_dist") return ExperimentMode::sample_dist;
    throw std::invalid_argument("unknown experiment mode '" + name + "'");
}

inline const char* mode_name(ExperimentMode mode) {
    switch (mode) {
        case ExperimentMode::benchmark: return "benchmark";
        case ExperimentMode::convergence: return "convergence";
        case ExperimentMode::ablation: return "ablation";
        case ExperimentMode::sensitivity: return "sensitivity";
        default: return "sample-dist";
    }
}

struct DatasetConfig {
    std::string kind = "auto";  // auto | fmnist | two_moons | blobs
    std::string data_dir;
    std::size_t synthetic_size = 2000;
    double noise = 0.2;
    SplitFractions fractions{0.8, 0.1, 0.1};
    std::size_t max_train = 0;
};

struct ModelConfig {
    std::vector<std::size_t> hidden;  // empty: per-dataset default
    bool regularized = false;
};

struct GridConfig {
    std::vector<double> learning_rates = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    std::vector<double> regularization_rates = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    std::uint64_t budget_per_model = 0;  // 0: popdescent per-model budget
    std::size_t chunk_batches = 128;     // cv evaluation cadence, in batches
};

struct RandomSearchConfig {
    std::size_t trials = 25;
    std::size_t probe_epochs = 2;
    std::size_t patience = 2;
    LogRange lr_range{1e-4, 1e-2};
    LogRange reg_range{1e-5, 1e-1};
};

struct ScheduleSearchConfig {
    std::size_t trials = 25;
    std::size_t probe_epochs = 2;
    std::size_t patience = 0;
};

struct ExperimentConfig {
    ExperimentMode mode = ExperimentMode::benchmark;
    DatasetConfig dataset;
    ModelConfig model;
    std::vector<std::string> methods = {"popdescent", "population", "random", "grid", "schedule"};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    PopDescentRunSpec popdescent;
    Optimizer population_optimizer = Optimizer::sgd;
    GridConfig grid;
    RandomSearchConfig random_search;
    ScheduleSearchConfig schedule_search;
    std::uint64_t total_budget = 0;  // 0: popdescent planned steps
    std::vector<double> sweep_learning_rates = {0.01, 0.05, 0.001};
    std::size_t dist_samples = 100000;
    std::size_t dist_symmetry_samples = 1000000;
    std::string out_dir = "out";
    double ema_lambda = 0.1;

    std::uint64_t effective_budget() const {
        return total_budget > 0 ? total_budget : popdescent.planned_steps();
    }

    void validate() const {
        if (seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
        std::vector<std::uint64_t> sorted = seeds;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("config: seeds must be distinct");
        if (methods.empty()) throw std::invalid_argument("config: methods must be nonempty");
        popdescent.elite_count();  // throws if population/replaced are inconsistent
        popdescent.engine.validate();
    }

    static ExperimentConfig from_config(ConfigMap& cfg, ExperimentMode mode);
};

inline ExperimentConfig ExperimentConfig::from_config(ConfigMap& cfg, ExperimentMode mode) {
    ExperimentConfig out;
    out.mode = mode;
    if (mode == ExperimentMode::ablation || mode == ExperimentMode::sensitivity) {
        // The feature and sensitivity studies run the larger population with
        // half of it replaced each iteration.
        out.popdescent.population_size = 10;
        out.popdescent.replaced = 5;
        out.popdescent.iterations = 35;
    }
    if (mode == ExperimentMode::ablation) out.dataset.max_train = 10000;

    out.seeds = cfg.get_u64_list("run.seeds", out.seeds);
    out.methods = cfg.get_string_list("run.methods", out.methods);
    out.out_dir = cfg.get_string("run.out", out.out_dir);
    out.total_budget = cfg.get_u64("run.budget", out.total_budget);
    out.ema_lambda = cfg.get_double("run.ema_lambda", out.ema_lambda);

    out.dataset.kind = cfg.get_string("dataset.kind", out.dataset.kind);
    out.dataset.data_dir = cfg.get_string("dataset.data_dir", out.dataset.data_dir);
    out.dataset.synthetic_size =
        static_cast<std::size_t>(cfg.get_u64("dataset.size", out.dataset.synthetic_size));
    out.dataset.noise = cfg.get_double("dataset.noise", out.dataset.noise);
    out.dataset.fractions.train =
        cfg.get_double("dataset.train_fraction", out.dataset.fractions.train);
    out.dataset.fractions.cross_validation =
        cfg.get_double("dataset.cv_fraction", out.dataset.fractions.cross_validation);
    out.dataset.fractions.test = cfg.get_double("dataset.test_fraction", out.dataset.fractions.test);
    out.dataset.max_train = static_cast<std::size_t>(cfg.get_u64("dataset.max_train", 0));

    for (std::uint64_t h : cfg.get_u64_list("model.hidden", {}))
        out.model.hidden.push_back(static_cast<std::size_t>(h));
    out.model.regularized = cfg.get_bool("model.regularized", out.model.regularized);

    auto& pd = out.popdescent;
    pd.population_size = static_cast<std::size_t>(cfg.get_u64("popdescent.population", pd.population_size));
    pd.replaced = static_cast<std::size_t>(cfg.get_u64("popdescent.replaced", pd.replaced));
    pd.iterations = cfg.get_u64("popdescent.iterations", pd.iterations);
    pd.batches_per_iteration =
        static_cast<std::size_t>(cfg.get_u64("popdescent.batches", pd.batches_per_iteration));
    pd.epochs_per_iteration =
        static_cast<std::size_t>(cfg.get_u64("popdescent.epochs", pd.epochs_per_iteration));
    pd.batch_size = static_cast<std::size_t>(cfg.get_u64("popdescent.batch_size", pd.batch_size));
    pd.cv_batch_size =
        static_cast<std::size_t>(cfg.get_u64("popdescent.cv_batch_size", pd.cv_batch_size));
    pd.fixed_learning_rate = cfg.get_double("popdescent.learning_rate", pd.fixed_learning_rate);
    pd.fixed_regularization_rate =
        cfg.get_double("popdescent.regularization_rate", pd.fixed_regularization_rate);
    pd.optimizer = optimizer_from_name(cfg.get_string("popdescent.optimizer", "adam"));
    const std::string alpha_init = cfg.get_string("popdescent.alpha_init", "random");
    if (alpha_init == "random")
        pd.alpha_init = AlphaInit::random;
    else if (alpha_init == "fixed")
        pd.alpha_init = AlphaInit::fixed;
    else
        throw std::invalid_argument("popdescent.alpha_init must be 'random' or 'fixed'");
    const std::string fitness = cfg.get_string("popdescent.fitness", "cv");
    if (fitness == "cv")
        pd.fitness_source = FitnessSource::cross_validation;
    else if (fitness == "train")
        pd.fitness_source = FitnessSource::training;
    else
        throw std::invalid_argument("popdescent.fitness must be 'cv' or 'train'");
    pd.engine.mutation_enabled = cfg.get_bool("popdescent.mutation", true);
    pd.engine.replacement_enabled = cfg.get_bool("popdescent.replacement", true);
    pd.engine.threads = static_cast<unsigned>(cfg.get_u64("popdescent.threads", 1));
    pd.engine.mutation.weight_noise_scale =
        cfg.get_double("popdescent.weight_noise", pd.engine.mutation.weight_noise_scale);
    pd.engine.mutation.hyper_noise_scale =
        cfg.get_double("popdescent.hyper_noise", pd.engine.mutation.hyper_noise_scale);
    pd.engine.mutation.hyper_noise_base =
        cfg.get_double("popdescent.hyper_noise_base", pd.engine.mutation.hyper_noise_base);

    out.population_optimizer =
        optimizer_from_name(cfg.get_string("population.optimizer", "sgd"));

    out.grid.learning_rates = cfg.get_double_list("grid.learning_rates", out.grid.learning_rates);
    out.grid.regularization_rates =
        cfg.get_double_list("grid.regularization_rates", out.grid.regularization_rates);
    out.grid.budget_per_model = cfg.get_u64("grid.budget_per_model", 0);
    out.grid.chunk_batches =
        static_cast<std::size_t>(cfg.get_u64("grid.chunk", out.grid.chunk_batches));

    auto& rs = out.random_search;
    rs.trials = static_cast<std::size_t>(cfg.get_u64("random.trials", rs.trials));
    rs.probe_epochs = static_cast<std::size_t>(cfg.get_u64("random.probe_epochs", rs.probe_epochs));
    rs.patience = static_cast<std::size_t>(cfg.get_u64("random.patience", rs.patience));
    rs.lr_range.low = cfg.get_double("random.lr_low", rs.lr_range.low);
    rs.lr_range.high = cfg.get_double("random.lr_high", rs.lr_range.high);
    rs.reg_range.low = cfg.get_double("random.reg_low", rs.reg_range.low);
    rs.reg_range.high = cfg.get_double("random.reg_high", rs.reg_range.high);

    auto& ss = out.schedule_search;
    ss.trials = static_cast<std::size_t>(cfg.get_u64("schedule.trials", ss.trials));
    ss.probe_epochs = static_cast<std::size_t>(cfg.get_u64("schedule.probe_epochs", ss.probe_epochs));
    ss.patience = static_cast<std::size_t>(cfg.get_u64("schedule.patience", ss.patience));

    out.sweep_learning_rates =
        cfg.get_double_list("sensitivity.learning_rates", out.sweep_learning_rates);
    out.dist_samples = static_cast<std::size_t>(cfg.get_u64("sample_dist.samples", out.dist_samples));
    out.dist_symmetry_samples = static_cast<std::size_t>(
        cfg.get_u64("sample_dist.symmetry_samples", out.dist_symmetry_samples));

    cfg.require_all_consumed();
    out.validate();
    return out;
}

namespace detail {

inline bool fmnist_available(const std::string& data_dir) {
    namespace fs = std::filesystem;
    return !data_dir.empty() && fs::exists(fs::path(data_dir) / "train-images-idx3-ubyte") &&
           fs::exists(fs::path(data_dir) / "train-labels-idx1-ubyte");
}

}  // namespace detail

// One seed's materialized world: data, split, and the model description.
struct SeedRuntime {
    Dataset data;
    DatasetSplit split;
    MlpSpec spec;
    std::string dataset_name;
};

inline SeedRuntime prepare_seed(const ExperimentConfig& config, std::uint64_t seed,
                                bool regularized) {
    SeedRuntime rt;
    RngStream seed_rng(mix64(seed));

    std::string kind = config.dataset.kind;
    if (kind == "auto")
        kind = detail::fmnist_available(config.dataset.data_dir) ? "fmnist" : "two_moons";

    std::size_t max_train = config.dataset.max_train;
    std::vector<std::size_t> widths;
    if (kind == "fmnist") {
        namespace fs = std::filesystem;
        const fs::path dir(config.dataset.data_dir);
        rt.data = load_idx((dir / "train-images-idx3-ubyte").string(),
                           (dir / "train-labels-idx1-ubyte").string());
        if (max_train == 0) max_train = 10000;  // desk-scale cap
        widths = {784};
        for (std::size_t h : config.model.hidden) widths.push_back(h);
        if (config.model.hidden.empty()) widths.push_back(128);
        widths.push_back(10);
    } else {
        RngStream data_rng = seed_rng.derive(streams::data);
        rt.data = make_synthetic(synthetic_from_name(kind), config.dataset.synthetic_size,
                                 config.dataset.noise, data_rng);
        widths = {2};
        for (std::size_t h : config.model.hidden) widths.push_back(h);
        if (config.model.hidden.empty()) widths.push_back(32);
        widths.push_back(2);
    }
    rt.dataset_name = kind;

    RngStream split_rng = seed_rng.derive(streams::split);
    rt.split = split(rt.data, config.dataset.fractions, split_rng, max_train);
    rt.spec = regularized ? MlpSpec::make(widths, {0}) : MlpSpec::unregularized(widths);
    return rt;
}

namespace detail {

// Per-method random hierarchies hang off (seed, method name).
inline RngStream method_rng(std::uint64_t seed, const std::string& method) {
    return RngStream(mix64(seed)).derive(hash_name(method));
}

inline MethodSeedResult finalize_result(std::string method, std::uint64_t seed,
                                        const Individual& best, std::uint64_t steps,
                                        std::vector<std::pair<std::uint64_t, double>> cv_trace,
                                        const Mlp& model, SeedRuntime& rt) {
    MethodSeedResult r;
    r.method = std::move(method);
    r.seed = seed;
    r.gradient_steps = steps;
    r.chosen_hyperparams = best.alpha;
    r.cv_trace = std::move(cv_trace);
    r.train_loss = model.loss(best.theta, rt.split.train.as_batch(), 0.0).data_loss;
    rt.split.test.grant(1);
    const Dataset& test = rt.split.test.acquire();
    r.test_loss = model.loss(best.theta, test.as_batch(), 0.0).data_loss;
    return r;
}

inline SearchSpace tuning_space(const ExperimentConfig& config, bool regularized) {
    SearchSpace space;
    space.axes[hp::learning_rate] = config.random_search.lr_range;
    if (regularized) space.axes[hp::regularization_rate] = config.random_search.reg_range;
    return space;
}

}  // namespace detail

// Runs one method on one prepared seed. Throws on failure; the caller records
// the error and keeps going.
inline MethodSeedResult run_method(const ExperimentConfig& config, const std::string& method,
                                   std::uint64_t seed, SeedRuntime& rt) {
    const Mlp model(rt.spec);
    const bool regularized = !rt.spec.regularized_layers.empty();
    const RngStream root = detail::method_rng(seed, method);

    if (method == "popdescent" || method == "population") {
        PopDescentRunSpec spec = config.popdescent;
        if (method == "population") {
            spec.engine.mutation_enabled = false;
            spec.engine.replacement_enabled = false;
            spec.alpha_init = AlphaInit::fixed;
            spec.optimizer = config.population_optimizer;
        }
        if (!regularized) spec.fixed_regularization_rate = 0.0;
        auto outcome =
            run_popdescent_trial(model, rt.split.train, rt.split.cross_validation, spec, root);
        if (outcome.gradient_steps != spec.planned_steps())
            throw std::runtime_error(method + ": counted " +
                                     std::to_string(outcome.gradient_steps) +
                                     " gradient steps but the accountant expected " +
                                     std::to_string(spec.planned_steps()));
        return detail::finalize_result(method, seed, outcome.result.best, outcome.gradient_steps,
                                       std::move(outcome.cv_trace), model, rt);
    }

    EpochTrainer::Settings settings;
    settings.optimizer = config.popdescent.optimizer;
    settings.batch_size = config.popdescent.batch_size;
    settings.default_regularization = regularized ? config.popdescent.fixed_regularization_rate : 0.0;
    EpochTrainer trainer(model, rt.split.train, rt.split.cross_validation, settings);

    auto concat_trace = [](const SearchOutcome& outcome) {
        // Sequential trials: the winner's trace rides at the end of the
        // cumulative step axis.
        std::vector<std::pair<std::uint64_t, double>> trace;
        const std::uint64_t offset =
            outcome.total_gradient_steps - outcome.best.gradient_steps;
        for (const auto& [s, v] : outcome.best.cv_trace) trace.emplace_back(offset + s, v);
        return trace;
    };

    if (method == "grid") {
        SearchSpace space;
        space.axes[hp::learning_rate] = config.grid.learning_rates;
        if (regularized) space.axes[hp::regularization_rate] = config.grid.regularization_rates;
        std::uint64_t budget = config.grid.budget_per_model;
        if (budget == 0)
            budget = config.popdescent.iterations * config.popdescent.batches_per_iteration *
                     config.popdescent.epochs_per_iteration;
        auto outcome = grid_search(space, trainer, budget, root);
        const std::uint64_t expected = gradient_steps(1, space.grid_size(), budget);
        if (outcome.total_gradient_steps != expected)
            throw std::runtime_error("grid: counted " + std::to_string(outcome.total_gradient_steps) +
                                     " gradient steps but the accountant expected " +
                                     std::to_string(expected));
        return detail::finalize_result(method, seed, outcome.best.model,
                                       outcome.total_gradient_steps, concat_trace(outcome), model,
                                       rt);
    }

    if (method == "random" || method == "schedule") {
        SearchSpace space;
        std::size_t trials, probe_epochs, patience;
        if (method == "random") {
            space = detail::tuning_space(config, regularized);
            trials = config.random_search.trials;
            probe_epochs = config.random_search.probe_epochs;
            patience = config.random_search.patience;
        } else {
            EpochTrainer::add_schedule_axes(space);
            if (regularized)
                space.axes[hp::regularization_rate] = config.random_search.reg_range;
            trials = config.schedule_search.trials;
            probe_epochs = config.schedule_search.probe_epochs;
            patience = config.schedule_search.patience;
        }
        BatchSampler probe_sampler(rt.split.train, config.popdescent.batch_size,
                                   root.derive(streams::train_batch));
        const std::uint64_t probe_steps =
            static_cast<std::uint64_t>(trials) * probe_epochs * probe_sampler.batches_per_epoch();
        const std::uint64_t budget = config.effective_budget();
        if (probe_steps >= budget)
            throw std::runtime_error(method + ": probe phase (" + std::to_string(probe_steps) +
                                     " steps) exhausts the budget (" + std::to_string(budget) + ")");
        auto outcome =
            random_search(space, trials, probe_epochs, trainer, root, budget - probe_steps, patience);
        return detail::finalize_result(method, seed, outcome.best.model,
                                       outcome.total_gradient_steps, concat_trace(outcome), model,
                                       rt);
    }

    throw std::invalid_argument("unknown method '" + method + "'");
}

// The benchmark/convergence driver: every seed x method, failures recorded
// per run rather than aborting the sweep.
inline TrialReport run_benchmark(const ExperimentConfig& config) {
    config.validate();
    TrialReport report;
    for (const std::uint64_t seed : config.seeds) {
        SeedRuntime rt = prepare_seed(config, seed, config.model.regularized);
        for (const auto& method : config.methods) {
            try {
                report.results.push_back(run_method(config, method, seed, rt));
            } catch (const std::exception& e) {
                MethodSeedResult failed;
                failed.method = method;
                failed.seed = seed;
                failed.failed = true;
                failed.error = e.what();
                report.results.push_back(std::move(failed));
            }
        }
        // Hygiene: every successful run consumed its single test-set grant.
        std::size_t ok = 0;
        for (const auto& r : report.results)
            if (r.seed == seed && !r.failed) ++ok;
        if (rt.split.test.accesses() != ok)
            throw std::runtime_error("test-set hygiene violation: " +
                                     std::to_string(rt.split.test.accesses()) +
                                     " accesses for seed " + std::to_string(seed) + ", expected " +
                                     std::to_string(ok));
    }
    return report;
}

// The four rows of the feature study: randomization on/off on the regularized
// model, then cv- vs train-fitness selection on the unregularized model.
struct AblationVariant {
    std::string name;
    bool mutation = true;
    FitnessSource fitness = FitnessSource::cross_validation;
    bool regularized = true;
};

struct AblationSummary {
    TrialReport detail;
    std::map<std::string, Aggregate> test_loss;
    std::map<std::string, Aggregate> train_loss;
};

inline AblationSummary run_ablation(const ExperimentConfig& config) {
    config.validate();
    const std::vector<AblationVariant> variants = {
        {"randomized", true, FitnessSource::cross_validation, true},
        {"no-randomization", false, FitnessSource::cross_validation, true},
        {"cv-selection", true, FitnessSource::cross_validation, false},
        {"train-selection", true, FitnessSource::training, false},
    };

    AblationSummary summary;
    for (const std::uint64_t seed : config.seeds) {
        // Both model variants share the same data split within a seed.
        SeedRuntime reg_rt = prepare_seed(config, seed, true);
        SeedRuntime unreg_rt = prepare_seed(config, seed, false);
        for (const auto& variant : variants) {
            SeedRuntime& rt = variant.regularized ? reg_rt : unreg_rt;
            const Mlp model(rt.spec);
            PopDescentRunSpec spec = config.popdescent;
            spec.alpha_init = AlphaInit::fixed;  // the study initializes at the defaults
            spec.engine.mutation_enabled = variant.mutation;
            spec.fitness_source = variant.fitness;
            if (!variant.regularized) spec.fixed_regularization_rate = 0.0;
            const RngStream root = detail::method_rng(seed, variant.name);
            try {
                auto outcome = run_popdescent_trial(model, rt.split.train,
                                                    rt.split.cross_validation, spec, root);
                summary.detail.results.push_back(
                    detail::finalize_result(variant.name, seed, outcome.result.best,
                                            outcome.gradient_steps, std::move(outcome.cv_trace),
                                            model, rt));
            } catch (const std::exception& e) {
                MethodSeedResult failed;
                failed.method = variant.name;
                failed.seed = seed;
                failed.failed = true;
                failed.error = e.what();
                summary.detail.results.push_back(std::move(failed));
            }
        }
    }
    for (const auto& variant : variants) {
        const auto agg = summary.detail.aggregate_for(variant.name);
        summary.test_loss[variant.name] = agg.test_loss;
        summary.train_loss[variant.name] = agg.train_loss;
    }
    return summary;
}

// Local-parameter sensitivity: sweep the initial learning rate, holding
// everything else fixed, for the full engine and for the mutation-off
// baseline. The summary statistic is the standard deviation of the final test
// loss across every (sweep value, seed) run of a method.
struct SensitivitySummary {
    TrialReport detail;
    double popdescent_sd = 0.0;
    double baseline_sd = 0.0;
    Aggregate popdescent_test;
    Aggregate baseline_test;
};

inline SensitivitySummary run_sensitivity(const ExperimentConfig& config) {
    config.validate();
    SensitivitySummary summary;
    std::vector<double> pd_losses, base_losses;

    for (const std::uint64_t seed : config.seeds) {
        SeedRuntime rt = prepare_seed(config, seed, config.model.regularized);
        const Mlp model(rt.spec);
        const bool regularized = !rt.spec.regularized_layers.empty();
        for (const double lr : config.sweep_learning_rates) {
            for (const bool mutated : {true, false}) {
                PopDescentRunSpec spec = config.popdescent;
                spec.alpha_init = AlphaInit::fixed;
                spec.fixed_learning_rate = lr;
                if (!regularized) spec.fixed_regularization_rate = 0.0;
                if (!mutated) {
                    spec.engine.mutation_enabled = false;
                    spec.engine.replacement_enabled = false;
                }
                char label[64];
                std::snprintf(label, sizeof label, "%s[lr=%g]",
                              mutated ? "popdescent" : "population", lr);
                const RngStream root = detail::method_rng(seed, label);
                try {
                    auto outcome = run_popdescent_trial(model, rt.split.train,
                                                        rt.split.cross_validation, spec, root);
                    auto r = detail::finalize_result(label, seed, outcome.result.best,
                                                     outcome.gradient_steps,
                                                     std::move(outcome.cv_trace), model, rt);
                    (mutated ? pd_losses : base_losses).push_back(r.test_loss);
                    summary.detail.results.push_back(std::move(r));
                } catch (const std::exception& e) {
                    MethodSeedResult failed;
                    failed.method = label;
                    failed.seed = seed;
                    failed.failed = true;
                    failed.error = e.what();
                    summary.detail.results.push_back(std::move(failed));
                }
            }
        }
    }
    summary.popdescent_test = aggregate(pd_losses);
    summary.baseline_test = aggregate(base_losses);
    summary.popdescent_sd = summary.popdescent_test.sd;
    summary.baseline_sd = summary.baseline_test.sd;
    return summary;
}

// Monte Carlo summaries of the randomization scheme itself.
struct SampleDistSummary {
    LogSymmetryResult symmetry;          // sigma=1, base 10
    double lr_log10_median = 0.0;
    double lr_log10_sd = 0.0;
    double reg_log10_median = 0.0;
    double theta_sd_half_magnitude = 0.0;
    double theta_sd_full_magnitude = 0.0;
};

inline SampleDistSummary run_sample_dist(const ExperimentConfig& config, std::uint64_t seed = 1) {
    SampleDistSummary summary;
    const MutationConfig& mc = config.popdescent.engine.mutation;
    RngStream root(mix64(seed));

    RngStream sym_rng = root.derive(std::uint64_t{1});
    summary.symmetry = log_symmetry_check(1.0, 10.0, config.dist_symmetry_samples, sym_rng);

    RngStream init_rng = root.derive(std::uint64_t{2});
    std::vector<double> lr_logs, reg_logs;
    lr_logs.reserve(config.dist_samples);
    for (std::size_t i = 0; i < config.dist_samples; ++i) {
        const HyperParams alpha = init_hyperparams(mc, init_rng);
        lr_logs.push_back(std::log10(alpha.at(hp::learning_rate)));
        reg_logs.push_back(std::log10(alpha.at(hp::regularization_rate)));
    }
    const Aggregate lr_agg = aggregate(lr_logs);
    summary.lr_log10_median = lr_agg.median;
    summary.lr_log10_sd = lr_agg.sd;
    summary.reg_log10_median = aggregate(reg_logs).median;

    // Empirical sd of single-coordinate weight noise at two magnitudes.
    auto theta_sd = [&](double magnitude, std::uint64_t tag) {
        RngStream rng = root.derive(std::uint64_t{3}, tag);
        Individual ind;
        ind.id = 0;
        ind.theta = {0.0};
        ind.alpha[hp::learning_rate] = 1.0;
        std::vector<double> draws;
        draws.reserve(config.dist_samples);
        for (std::size_t i = 0; i < config.dist_samples; ++i)
            draws.push_back(mutate(ind, magnitude, mc, rng).theta[0]);
        return aggregate(draws).sd;
    };
    summary.theta_sd_half_magnitude = theta_sd(0.5, 0);
    summary.theta_sd_full_magnitude = theta_sd(1.0, 1);
    return summary;
}

}  // namespace popdescent
