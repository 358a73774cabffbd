#include <catch2/catch_amalgamated.hpp>

#include <popdescent/engine.hpp>

#include <cmath>
#include <cstring>
#include <vector>

using namespace popdescent;

namespace {

// One SGD step per provided batch on f(theta) = |theta|^2; the batch content
// is irrelevant, which keeps the engine contract in focus.
struct QuadUpdate {
    template <typename Batches>
    Individual operator()(const Individual& ind, const Batches& batches, RngStream&) const {
        Individual out = ind;
        for (std::size_t k = 0; k < batches.size(); ++k) {
            const double lr = out.learning_rate();
            for (double& t : out.theta) t -= lr * 2.0 * t;
        }
        return out;
    }
};

struct QuadLoss {
    double operator()(const Individual& ind, int) const {
        double s = 0.0;
        for (double t : ind.theta) s += t * t;
        return s;
    }
};

auto quad_workload() {
    return Workload{QuadUpdate{}, QuadLoss{},
                    [](std::uint64_t) { return std::vector<int>{0}; },
                    [](std::uint64_t) { return 0; }};
}

Population make_pop(std::size_t size, std::size_t m, RngStream& rng, double lr = 0.1) {
    Population pop;
    pop.elite_count = m;
    pop.next_id = size;
    for (std::size_t i = 0; i < size; ++i) {
        Individual ind;
        ind.id = i;
        ind.theta = {rng.uniform(-2.0, 2.0)};
        ind.alpha[hp::learning_rate] = lr;
        pop.members.push_back(std::move(ind));
    }
    return pop;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

bool same_individual_bits(const Individual& a, const Individual& b) {
    return a.id == b.id && same_bits(a.theta, b.theta) && a.alpha == b.alpha &&
           same_bits(a.opt_state.first_moment, b.opt_state.first_moment) &&
           same_bits(a.opt_state.second_moment, b.opt_state.second_moment) &&
           a.opt_state.step == b.opt_state.step;
}

}  // namespace

TEST_CASE("replace_weakest keeps population size and replaces size-m members", "[engine]") {
    RngStream rng(1);
    auto identity_mutate = [](const Individual& src, double, RngStream&) { return src; };

    Population pop = make_pop(5, 3, rng);
    std::vector<double> fitness{0.9, 0.1, 0.5, 0.4, 0.7};
    RngStream sampler(2);
    ReplacementRecord record;
    Population next = replace_weakest(pop, fitness, sampler, identity_mutate, &record);
    REQUIRE(next.size() == 5);
    REQUIRE(record.replaced_ids.size() == 2);
    // weakest two by fitness are ids 1 (0.1) and 3 (0.4)
    REQUIRE(record.replaced_ids == std::vector<std::uint64_t>{1, 3});
}

TEST_CASE("equal fitness forces arity from m and breaks ties by id", "[engine]") {
    RngStream rng(3);
    Population pop = make_pop(5, 4, rng);
    std::vector<double> fitness(5, 0.6);
    RngStream sampler(4);
    ReplacementRecord record;
    auto identity_mutate = [](const Individual& src, double, RngStream&) { return src; };
    Population next = replace_weakest(pop, fitness, sampler, identity_mutate, &record);
    REQUIRE(record.replaced_ids == std::vector<std::uint64_t>{0});  // lowest id on tie
    // the four survivors are bit-identical elites
    std::size_t preserved = 0;
    for (const auto& m : next.members)
        for (const auto& original : pop.members)
            if (m.id == original.id && same_individual_bits(m, original)) ++preserved;
    REQUIRE(preserved == 4);
}

TEST_CASE("replacement sources follow the fitness-weighted multinomial", "[engine]") {
    RngStream rng(5);
    Population pop = make_pop(2, 1, rng);
    std::vector<double> fitness{0.9, 0.1};
    auto identity_mutate = [](const Individual& src, double, RngStream&) { return src; };
    std::size_t from_first = 0;
    const int reps = 10000;
    for (int i = 0; i < reps; ++i) {
        RngStream sampler = RngStream(1000).derive(static_cast<std::uint64_t>(i));
        ReplacementRecord record;
        replace_weakest(pop, fitness, sampler, identity_mutate, &record);
        if (record.source_ids.at(0) == 0) ++from_first;
    }
    const double p = static_cast<double>(from_first) / reps;
    REQUIRE(p > 0.89);
    REQUIRE(p < 0.91);
}

TEST_CASE("mutation magnitude is one minus the source fitness", "[engine]") {
    RngStream rng(6);
    Population pop = make_pop(4, 2, rng);
    std::vector<double> fitness{0.9, 0.8, 0.2, 0.4};
    RngStream sampler(7);
    ReplacementRecord record;
    auto identity_mutate = [](const Individual& src, double, RngStream&) { return src; };
    replace_weakest(pop, fitness, sampler, identity_mutate, &record);
    for (std::size_t k = 0; k < record.magnitudes.size(); ++k) {
        const std::uint64_t source = record.source_ids[k];
        REQUIRE(record.magnitudes[k] == 1.0 - fitness[source]);
    }
}

TEST_CASE("size mismatch and bad m are rejected", "[engine]") {
    RngStream rng(8);
    Population pop = make_pop(4, 2, rng);
    RngStream sampler(9);
    auto identity_mutate = [](const Individual& src, double, RngStream&) { return src; };
    std::vector<double> wrong{0.5, 0.5};
    REQUIRE_THROWS_AS(replace_weakest(pop, wrong, sampler, identity_mutate),
                      std::invalid_argument);

    pop.elite_count = 4;  // m == size
    std::vector<double> fitness(4, 0.5);
    REQUIRE_THROWS_AS(replace_weakest(pop, fitness, sampler, identity_mutate),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(iterate(pop, quad_workload(), EngineConfig{}, RngStream(1), 0),
                      std::invalid_argument);
}

TEST_CASE("one iteration with mutation disabled is exactly one local step", "[engine]") {
    RngStream rng(10);
    Population pop = make_pop(3, 2, rng, 0.1);
    EngineConfig config;
    config.mutation_enabled = false;
    config.replacement_enabled = false;
    auto [next, trace] = iterate(pop, quad_workload(), config, RngStream(42), 0);
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const double expected = pop.members[i].theta[0] * (1.0 - 2.0 * 0.1);
        REQUIRE(next.members[i].theta[0] == expected);
    }
    REQUIRE(trace.replaced_ids.empty());
}

TEST_CASE("engine property suite over randomized cases", "[engine][properties]") {
    RngStream master(2024);
    EngineConfig config;
    for (int rep = 0; rep < 1000; ++rep) {
        RngStream case_rng = master.derive(static_cast<std::uint64_t>(rep));
        const std::size_t size = 2 + case_rng.uniform_below(14);
        const std::size_t m = 1 + case_rng.uniform_below(size - 1);
        Population pop = make_pop(size, m, case_rng);
        const RngStream run_rng = case_rng.derive(std::uint64_t{0xabc});

        // the optimized (pre-replacement) members, via a replacement-free pass
        EngineConfig no_replace = config;
        no_replace.replacement_enabled = false;
        auto [optimized, opt_trace] = iterate(pop, quad_workload(), no_replace, run_rng, 0);

        auto [next, trace] = iterate(pop, quad_workload(), config, run_rng, 0);

        // population size invariance
        REQUIRE(next.size() == pop.size());
        // replacement arity
        REQUIRE(trace.replaced_ids.size() == size - m);
        // elite preservation: survivors are bit-identical to their optimized form
        std::size_t survivors = 0;
        for (const auto& member : next.members) {
            for (const auto& opt : optimized.members) {
                if (member.id != opt.id) continue;
                ++survivors;
                REQUIRE(same_individual_bits(member, opt));
            }
        }
        REQUIRE(survivors == m);
        // probability normalization on this case's fitness vector
        const auto probs = build_fitness_distribution(trace.fitness);
        long double sum = 0.0L;
        for (double p : probs) sum += p;
        REQUIRE(std::abs(static_cast<double>(sum) - 1.0) < 1e-12);
    }
}

TEST_CASE("a master seed fully determines populations and traces", "[engine]") {
    for (int rep = 0; rep < 20; ++rep) {
        RngStream setup(300 + rep);
        Population a = make_pop(6, 3, setup);
        Population b = a;
        const RngStream run_rng(900 + rep);
        EngineConfig config;
        auto [pa, ta] = iterate(a, quad_workload(), config, run_rng, 0);
        auto [pb, tb] = iterate(b, quad_workload(), config, run_rng, 0);
        REQUIRE(ta.fitness == tb.fitness);
        REQUIRE(ta.replaced_ids == tb.replaced_ids);
        REQUIRE(ta.replacement_source_ids == tb.replacement_source_ids);
        REQUIRE(ta.mutation_magnitudes == tb.mutation_magnitudes);
        for (std::size_t i = 0; i < pa.size(); ++i)
            REQUIRE(same_individual_bits(pa.members[i], pb.members[i]));
    }
}

TEST_CASE("thread count does not change the result", "[engine]") {
    RngStream setup(33);
    Population pop = make_pop(8, 4, setup);
    const RngStream run_rng(44);
    EngineConfig serial;
    serial.threads = 1;
    EngineConfig parallel;
    parallel.threads = 4;
    auto [pa, ta] = iterate(pop, quad_workload(), serial, run_rng, 0);
    auto [pb, tb] = iterate(pop, quad_workload(), parallel, run_rng, 0);
    REQUIRE(ta.fitness == tb.fitness);
    for (std::size_t i = 0; i < pa.size(); ++i)
        REQUIRE(same_individual_bits(pa.members[i], pb.members[i]));
}

TEST_CASE("with mutation and replacement off the engine is independent local runs", "[engine]") {
    RngStream setup(55);
    Population pop = make_pop(4, 2, setup);
    EngineConfig config;
    config.mutation_enabled = false;
    config.replacement_enabled = false;
    const RngStream run_rng(66);
    const std::uint64_t iterations = 7;

    RunResult result =
        run(pop, FixedIterations{iterations}, quad_workload(), config, run_rng);

    // replay each member independently with the engine's own substreams
    for (std::size_t i = 0; i < pop.size(); ++i) {
        Individual ind = pop.members[i];
        for (std::uint64_t iter = 0; iter < iterations; ++iter) {
            const auto batches = std::vector<int>{0};
            RngStream member_rng = run_rng.derive(streams::local_update, iter, ind.id);
            ind = QuadUpdate{}(ind, batches, member_rng);
        }
        REQUIRE(same_individual_bits(result.final_population.members[i], ind));
    }
}

TEST_CASE("immediate convergence returns the scored initial population's best", "[engine]") {
    RngStream setup(77);
    Population pop = make_pop(5, 2, setup);
    // best member: smallest |theta|
    std::size_t expect = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (std::abs(pop.members[i].theta[0]) < std::abs(pop.members[expect].theta[0])) expect = i;

    auto always = [](const Population&) { return true; };
    RunResult result = run(pop, always, quad_workload(), EngineConfig{}, RngStream(88));
    REQUIRE(result.iterations == 0);
    REQUIRE(result.trace.empty());
    REQUIRE(result.best.id == pop.members[expect].id);
    REQUIRE(same_bits(result.best.theta, pop.members[expect].theta));
}

TEST_CASE("run converges thetas on the quadratic", "[engine]") {
    RngStream setup(111);
    Population pop = make_pop(5, 3, setup, 0.2);
    EngineConfig config;
    config.mutation.weight_noise_scale = 0.001;
    config.mutation.hyper_noise_scale = 0.5;
    RunResult result = run(pop, FixedIterations{60}, quad_workload(), config, RngStream(222));
    REQUIRE(result.iterations == 60);
    REQUIRE(std::abs(result.best.theta[0]) < 0.05);
    REQUIRE(result.best_ever_fitness >= result.best_fitness - 1e-12);
}

TEST_CASE("non-finite loss is reported with the individual id", "[engine]") {
    RngStream setup(121);
    Population pop = make_pop(3, 1, setup);
    pop.members[1].alpha[hp::learning_rate] = 1e200;  // loss overflows to inf
    auto exploding = Workload{
        QuadUpdate{}, QuadLoss{}, [](std::uint64_t) { return std::vector<int>{0}; },
        [](std::uint64_t) { return 0; }};
    try {
        iterate(pop, exploding, EngineConfig{}, RngStream(1), 0);
        FAIL("expected a failure");
    } catch (const std::runtime_error& e) {
        REQUIRE(std::string(e.what()).find("1") != std::string::npos);
    }
}
