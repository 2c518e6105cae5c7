#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"

using namespace molevo;

namespace {

/// Objectives from a caller-supplied function of the key.
class ScriptedEvaluator final : public Evaluator {
  public:
    explicit ScriptedEvaluator(std::function<std::optional<ObjectiveVector>(const std::string&)> f) : f_(std::move(f)) {}
    std::vector<EvaluationOutcome> evaluate(const std::vector<std::string>& keys) override {
        std::vector<EvaluationOutcome> out;
        for (const auto& k : keys) {
            ++calls;
            auto v = f_(k);
            out.push_back({v, v ? "" : "scripted failure"});
        }
        return out;
    }
    std::size_t calls = 0;

  private:
    std::function<std::optional<ObjectiveVector>(const std::string&)> f_;
};

MoleculeEvaluator surrogate_evaluator(unsigned threads = 1) {
    return MoleculeEvaluator(std::make_shared<MetricModels>(), MetricConfig{}, std::make_shared<SurrogateGateway>(), 100,
                             threads);
}

struct CaptureWarnings {
    std::vector<std::string> seen;
    WarningSink prev;
    CaptureWarnings() {
        prev = set_warning_sink([this](const std::string& m) { seen.push_back(m); });
    }
    ~CaptureWarnings() { set_warning_sink(prev); }
};

std::vector<Individual> evaluated_parents(std::size_t mu, Evaluator& ev, UniquenessRegistry& reg, Rng& rng) {
    EvolutionConfig cfg;
    cfg.mu = mu;
    auto pop = init_population(cfg, Alphabet::standard(), reg, rng);
    evaluate_population(pop, ev, MetricConfig{});
    return pop;
}

} // namespace

TEST(IndividualTest, KeyIsCanonicalDecode) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        const auto s = random_string(1 + rng() % 40, Alphabet::standard(), rng);
        const Individual ind(s, 3);
        EXPECT_EQ(ind.phenotype_key, canonical_form(decode(s)));
        EXPECT_EQ(ind.birth_generation, 3u);
        EXPECT_FALSE(ind.evaluated);
        EXPECT_EQ(ind.objectives, ObjectiveVector::worst());
    }
}

TEST(InitPopulation, DistinctRegisteredKeys) {
    EvolutionConfig cfg;
    cfg.mu = 10;
    UniquenessRegistry reg;
    Rng rng(123);
    const auto pop = init_population(cfg, Alphabet::standard(), reg, rng);
    ASSERT_EQ(pop.size(), 10u);
    std::set<std::string> keys;
    for (const auto& ind : pop) {
        keys.insert(ind.phenotype_key);
        EXPECT_TRUE(reg.contains(ind.phenotype_key));
        EXPECT_EQ(ind.genotype.length(), cfg.init_length);
        EXPECT_EQ(ind.birth_generation, 0u);
    }
    EXPECT_EQ(keys.size(), 10u);
    EXPECT_EQ(reg.size(), 10u);
}

TEST(InitPopulation, SingleIndividual) {
    EvolutionConfig cfg;
    cfg.mu = 1;
    UniquenessRegistry reg;
    Rng rng(1);
    EXPECT_EQ(init_population(cfg, Alphabet::standard(), reg, rng).size(), 1u);
}

TEST(InitPopulation, OneSymbolAlphabetExhaustsRetries) {
    EvolutionConfig cfg;
    cfg.mu = 2;
    cfg.duplicate_retry_limit = 5;
    UniquenessRegistry reg;
    Rng rng(1);
    const auto a = Alphabet::from_weights({{"[C]", 1.0}});
    try {
        (void)init_population(cfg, a, reg, rng);
        FAIL() << "expected an initialization error";
    } catch (const InitializationError& e) {
        EXPECT_NE(std::string(e.what()).find("duplicate_retry_limit = 5"), std::string::npos) << e.what();
    }
}

TEST(InitPopulation, DeterministicForSeed) {
    EvolutionConfig cfg;
    UniquenessRegistry r1, r2;
    Rng a(77), b(77);
    const auto p = init_population(cfg, Alphabet::standard(), r1, a);
    const auto q = init_population(cfg, Alphabet::standard(), r2, b);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i].genotype, q[i].genotype);
}

TEST(Registry, InsertOnly) {
    UniquenessRegistry r;
    EXPECT_TRUE(r.insert("C"));
    EXPECT_FALSE(r.insert("C"));
    EXPECT_TRUE(r.contains("C"));
    EXPECT_EQ(r.size(), 1u);
}

TEST(Mutation, ZeroRatesReproduceParent) {
    Rng rng(5);
    UniquenessRegistry reg;
    const Individual parent(random_string(30, Alphabet::standard(), rng));
    reg.insert(parent.phenotype_key);
    MutationOptions opt;
    opt.enforce_unique = false;
    for (int i = 0; i < 20; ++i) {
        const auto child = mutate(parent, {0, 0, 0}, Alphabet::standard(), reg, rng, opt);
        EXPECT_EQ(child.genotype, parent.genotype);
        EXPECT_EQ(child.phenotype_key, parent.phenotype_key);
    }
}

TEST(Mutation, InsertionClampedAtMaxTokens) {
    Rng rng(6);
    const auto parent = random_string(80, Alphabet::standard(), rng);
    for (int i = 0; i < 100; ++i) {
        MutationRecord rec;
        const auto child = mutate_genotype(parent, {0, 1, 0}, Alphabet::standard(), rng, 80, &rec);
        EXPECT_EQ(child.length(), 80u);
        EXPECT_FALSE(rec.inserted);
        EXPECT_EQ(child, parent);
    }
}

TEST(Mutation, DeletionKeepsAtLeastOneSymbol) {
    Rng rng(7);
    const auto parent = parse_symbols("[N]");
    for (int i = 0; i < 50; ++i) {
        const auto child = mutate_genotype(parent, {0, 0, 1}, Alphabet::standard(), rng, 80);
        EXPECT_EQ(child.length(), 1u);
    }
    const auto two = parse_symbols("[N][O]");
    for (int i = 0; i < 50; ++i) EXPECT_EQ(mutate_genotype(two, {0, 0, 1}, Alphabet::standard(), rng, 80).length(), 1u);
}

TEST(Mutation, InsertThenDeleteOrder) {
    Rng rng(8);
    const auto parent = random_string(10, Alphabet::standard(), rng);
    for (int i = 0; i < 100; ++i) {
        MutationRecord rec;
        const auto child = mutate_genotype(parent, {0, 1, 1}, Alphabet::standard(), rng, 80, &rec);
        EXPECT_TRUE(rec.inserted);
        EXPECT_TRUE(rec.deleted);
        EXPECT_EQ(child.length(), 10u);
    }
}

TEST(Mutation, BinomialStatistics) {
    Rng rng(2024);
    const auto parent = random_string(40, Alphabet::standard(), rng);
    const MutationRates rates;
    double replaced = 0, inserted = 0, deleted = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        MutationRecord rec;
        (void)mutate_genotype(parent, rates, Alphabet::standard(), rng, 80, &rec);
        replaced += rec.replaced;
        inserted += rec.inserted;
        deleted += rec.deleted;
    }
    EXPECT_NEAR(replaced / n, 2.0, 0.15);
    EXPECT_NEAR(inserted / n, 0.1, 0.01);
    EXPECT_NEAR(deleted / n, 0.1, 0.01);
}

TEST(Mutation, EnforcesUniquenessAndRegisters) {
    Rng rng(9);
    UniquenessRegistry reg;
    const Individual parent(random_string(20, Alphabet::standard(), rng));
    reg.insert(parent.phenotype_key);
    MutationOptions opt;
    opt.generation = 4;
    std::set<std::string> seen = {parent.phenotype_key};
    for (int i = 0; i < 200; ++i) {
        const auto child = mutate(parent, {}, Alphabet::standard(), reg, rng, opt);
        EXPECT_TRUE(seen.insert(child.phenotype_key).second);
        EXPECT_TRUE(reg.contains(child.phenotype_key));
        EXPECT_EQ(child.birth_generation, 4u);
    }
    EXPECT_EQ(reg.size(), seen.size());
}

TEST(Mutation, RetryLimitRaisesMutationError) {
    Rng rng(10);
    UniquenessRegistry reg;
    const auto a = Alphabet::from_weights({{"[C]", 1.0}});
    const Individual parent(parse_symbols("[C]"));
    reg.insert(parent.phenotype_key);
    MutationOptions opt;
    opt.retry_limit = 7;
    EXPECT_THROW((void)mutate(parent, {1, 0, 0}, a, reg, rng, opt), MutationError);
}

TEST(Selection, FitterTieBreaks) {
    Individual a(parse_symbols("[C]"), 1), b(parse_symbols("[O]"), 2), c(parse_symbols("[N]"), 1);
    a.fitness = b.fitness = c.fitness = 0.3;
    EXPECT_TRUE(fitter(a, b)); // older first
    EXPECT_TRUE(fitter(a, c)); // "C" < "N"
    c.fitness = 0.1;
    EXPECT_TRUE(fitter(c, a));
}

TEST(StepSingle, WorseOffspringLeaveParentsUnchanged) {
    Rng rng(11);
    UniquenessRegistry reg;
    ScriptedEvaluator init([](const std::string&) { return ObjectiveVector(0.2, 0.2, 0.2, 0.2, 0.2); });
    auto parents = evaluated_parents(10, init, reg, rng);
    ScriptedEvaluator worse([](const std::string&) { return ObjectiveVector(0.9, 0.9, 0.9, 0.9, 0.9); });
    EvolutionConfig cfg;
    const auto next = step_single_objective(parents, cfg, {}, worse, reg, rng);
    ASSERT_EQ(next.size(), parents.size());
    std::set<std::string> a, b;
    for (const auto& p : parents) a.insert(p.phenotype_key);
    for (const auto& p : next) b.insert(p.phenotype_key);
    EXPECT_EQ(a, b);
    EXPECT_EQ(worse.calls, cfg.lambda);
}

TEST(StepSingle, PerfectOffspringIsKept) {
    Rng rng(12);
    UniquenessRegistry reg;
    ScriptedEvaluator init([](const std::string&) { return ObjectiveVector(0.5, 0.5, 0.5, 0.5, 0.5); });
    auto parents = evaluated_parents(10, init, reg, rng);
    std::size_t calls = 0;
    std::string star;
    ScriptedEvaluator ev([&](const std::string& k) {
        if (calls++ == 37) {
            star = k;
            return ObjectiveVector(0, 0, 0, 0, 0);
        }
        return ObjectiveVector(0.7, 0.7, 0.7, 0.7, 0.7);
    });
    const auto next = step_single_objective(parents, EvolutionConfig{}, {}, ev, reg, rng);
    ASSERT_FALSE(star.empty());
    EXPECT_EQ(next.front().phenotype_key, star);
    EXPECT_EQ(next.front().fitness, 0.0);
}

TEST(StepSingle, EvaluatorFailureGivesWorstAndWarning) {
    CaptureWarnings w;
    Rng rng(13);
    UniquenessRegistry reg;
    ScriptedEvaluator ev([](const std::string& k) -> std::optional<ObjectiveVector> {
        if (k.size() % 2) return std::nullopt;
        return ObjectiveVector(0.5, 0.5, 0.5, 0.5, 0.5);
    });
    auto pop = evaluated_parents(10, ev, reg, rng);
    std::size_t failed = 0;
    for (const auto& ind : pop) {
        EXPECT_TRUE(ind.evaluated);
        if (ind.phenotype_key.size() % 2) {
            ++failed;
            EXPECT_EQ(ind.objectives, ObjectiveVector::worst());
            EXPECT_EQ(ind.fitness, 1.0);
        }
    }
    EXPECT_EQ(w.seen.size(), failed);
}

TEST(StepSingle, UnevaluatedParentsRejected) {
    Rng rng(14);
    UniquenessRegistry reg;
    EvolutionConfig cfg;
    auto pop = init_population(cfg, Alphabet::standard(), reg, rng);
    ScriptedEvaluator ev([](const std::string&) { return ObjectiveVector::worst(); });
    EXPECT_THROW(step_single_objective(pop, cfg, {}, ev, reg, rng), ArgumentError);
}

TEST(StepSingle, ElitismAndUniquenessOnSurrogate) {
    Rng rng(15);
    UniquenessRegistry reg;
    auto ev = surrogate_evaluator();
    EvolutionConfig cfg;
    auto pop = evaluated_parents(cfg.mu, ev, reg, rng);
    std::vector<std::string> evaluated;
    for (const auto& p : pop) evaluated.push_back(p.phenotype_key);
    StepOptions opt;
    opt.sink = [&](const TranscriptRecord& r) { evaluated.push_back(r.phenotype_key); };
    double best = 1;
    for (const auto& p : pop) best = std::min(best, p.fitness);
    for (std::size_t g = 1; g <= 30; ++g) {
        opt.generation = g;
        pop = step_single_objective(pop, cfg, {}, ev, reg, rng, opt);
        ASSERT_EQ(pop.size(), cfg.mu);
        EXPECT_LE(pop.front().fitness, best);
        best = pop.front().fitness;
        for (const auto& p : pop) {
            EXPECT_NEAR(p.fitness, scalarize(p.objectives), 1e-15);
            EXPECT_EQ(p.phenotype_key, canonical_form(decode(p.genotype)));
        }
    }
    std::set<std::string> uniq(evaluated.begin(), evaluated.end());
    EXPECT_EQ(uniq.size(), evaluated.size());
}

TEST(StepSingle, ParallelEvaluationDoesNotChangeOutcome) {
    auto run = [](unsigned threads) {
        Rng rng(16);
        UniquenessRegistry reg;
        auto ev = surrogate_evaluator(threads);
        EvolutionConfig cfg;
        auto pop = evaluated_parents(cfg.mu, ev, reg, rng);
        std::vector<std::string> transcript;
        StepOptions opt;
        opt.sink = [&](const TranscriptRecord& r) { transcript.push_back(to_json(r).dump()); };
        for (std::size_t g = 1; g <= 5; ++g) {
            opt.generation = g;
            pop = step_single_objective(pop, cfg, {}, ev, reg, rng, opt);
        }
        return transcript;
    };
    EXPECT_EQ(run(1), run(4));
}

TEST(StepNsga2, DominatedOffspringDoNotDisplaceFront) {
    Rng rng(17);
    UniquenessRegistry reg;
    // parents spread on a trade-off line
    std::size_t i = 0;
    ScriptedEvaluator init([&](const std::string&) {
        const double t = (i++) / 19.0;
        return ObjectiveVector(t, 1 - t, 0.1, 0.1, 0);
    });
    auto parents = evaluated_parents(20, init, reg, rng);
    ScriptedEvaluator worse([](const std::string&) { return ObjectiveVector(0.9, 0.9, 0.9, 0.9, 1); });
    EvolutionConfig cfg;
    cfg.mu = 20;
    const auto next = step_nsga2(parents, cfg, {}, worse, reg, rng);
    std::set<std::string> a, b;
    for (const auto& p : parents) a.insert(p.phenotype_key);
    for (const auto& p : next) b.insert(p.phenotype_key);
    EXPECT_EQ(a, b);
}

TEST(StepNsga2, IdenticalObjectivesFallBackToCrowding) {
    Rng rng(18);
    UniquenessRegistry reg;
    ScriptedEvaluator same([](const std::string&) { return ObjectiveVector(0.4, 0.4, 0.4, 0.4, 0); });
    auto parents = evaluated_parents(5, same, reg, rng);
    EvolutionConfig cfg;
    cfg.mu = 5;
    cfg.lambda = 10;
    const auto next = step_nsga2(parents, cfg, {}, same, reg, rng);
    ASSERT_EQ(next.size(), 5u);
    // all candidates tie on rank and crowding, so the key order decides
    std::vector<std::string> keys;
    for (const auto& p : next) keys.push_back(p.phenotype_key);
    EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
}

TEST(StepNsga2, FrontGrowsUnderSteadyImprovement) {
    // Scripted objectives: generation-stamped points on ever better trade-off lines.
    Rng rng(19);
    UniquenessRegistry reg;
    std::size_t counter = 0;
    std::size_t gen = 0;
    ScriptedEvaluator ev([&](const std::string&) {
        const double t = static_cast<double>(counter++ % 97) / 96.0;
        const double level = 0.9 - 0.02 * static_cast<double>(gen);
        return ObjectiveVector(level * t, level * (1 - t), level, level, 0);
    });
    auto pop = evaluated_parents(20, ev, reg, rng);
    EvolutionConfig cfg;
    cfg.mu = 20;
    std::size_t prev = non_dominated_sort(objective_points(pop)).front().members.size();
    for (gen = 1; gen <= 20; ++gen) {
        StepOptions opt;
        opt.generation = gen;
        pop = step_nsga2(pop, cfg, {}, ev, reg, rng, opt);
        const std::size_t sz = non_dominated_sort(objective_points(pop)).front().members.size();
        EXPECT_GE(sz, prev) << "generation " << gen;
        prev = sz;
    }
    EXPECT_EQ(prev, 20u);
}

TEST(MoleculeEvaluatorTest, ThreadCountDoesNotMatter) {
    Rng rng(20);
    std::vector<std::string> keys;
    for (int i = 0; i < 64; ++i) keys.push_back(canonical_form(oracle::random_molecule(rng)));
    auto a = surrogate_evaluator(1).evaluate(keys);
    auto b = surrogate_evaluator(8).evaluate(keys);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].objectives.has_value(), b[i].objectives.has_value());
        if (a[i].objectives) { EXPECT_EQ(*a[i].objectives, *b[i].objectives); }
    }
}

TEST(MoleculeEvaluatorTest, UnparsableKeyIsAnError) {
    auto ev = surrogate_evaluator();
    const auto out = ev.evaluate({"C", "C(("});
    EXPECT_TRUE(out[0].objectives.has_value());
    EXPECT_FALSE(out[1].objectives.has_value());
    EXPECT_FALSE(out[1].error.empty());
}

TEST(MoleculeEvaluatorTest, BatchesRespectBatchSize) {
    struct Counting final : ScorerGateway {
        std::vector<std::size_t> sizes;
        std::vector<ScoreResponse> score_batch(const std::vector<ScoreRequest>& r) override {
            sizes.push_back(r.size());
            std::vector<ScoreResponse> out;
            for (const auto& q : r) out.push_back({q.id, -5.0, {}});
            return out;
        }
    };
    auto gw = std::make_shared<Counting>();
    MoleculeEvaluator ev(std::make_shared<MetricModels>(), MetricConfig{}, gw, 7, 1);
    const std::vector<std::string> keys(20, "CCO");
    const auto out = ev.evaluate(keys);
    EXPECT_EQ(gw->sizes, (std::vector<std::size_t>{7, 7, 6}));
    for (const auto& o : out) EXPECT_NEAR(o.objectives->docking(), normalize_docking(-5.0), 1e-15);
}
