#pragma once

/// @file evolution.hpp
/// @brief Populations of SELFIES genotypes: initialization, mutation,
/// uniqueness, evaluation and the (mu + lambda) generation steps.

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "molevo/canonical.hpp"
#include "molevo/log.hpp"
#include "molevo/metrics.hpp"
#include "molevo/moea.hpp"
#include "molevo/scorer.hpp"
#include "molevo/selfies.hpp"

namespace molevo {

using Rng = std::mt19937_64;

struct Individual {
    SelfiesString genotype;
    std::string phenotype_key;
    ObjectiveVector objectives = ObjectiveVector::worst();
    double fitness = 1.0;
    std::size_t birth_generation = 0;
    bool evaluated = false;

    explicit Individual(SelfiesString g, std::size_t birth = 0)
        : genotype(std::move(g)), phenotype_key(canonical_form(decode(genotype))), birth_generation(birth) {}
};

struct MutationRates {
    double p_r = 0.05; // per symbol
    double p_i = 0.1;
    double p_d = 0.1;

    void validate() const {
        for (double p : {p_r, p_i, p_d})
            if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("mutation probabilities must lie in [0,1]");
    }
};

struct EvolutionConfig {
    std::size_t mu = 10;
    std::size_t lambda = 100;
    std::size_t max_generations = 200;
    std::size_t max_tokens = kDefaultMaxTokens;
    std::size_t init_length = 20;
    std::size_t duplicate_retry_limit = 100;
    std::uint64_t seed = 0;

    void validate() const {
        if (mu < 1) throw ConfigError("mu must be >= 1");
        if (lambda < 1) throw ConfigError("lambda must be >= 1");
        if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
        if (init_length < 1 || init_length > max_tokens) throw ConfigError("init_length must lie in [1, max_tokens]");
        if (duplicate_retry_limit < 1) throw ConfigError("duplicate_retry_limit must be >= 1");
    }
};

/// Insert-only set of every phenotype key generated in a run.
class UniquenessRegistry {
public:
    [[nodiscard]] bool contains(const std::string& key) const { return keys_.count(key) > 0; }
    /// Returns false if the key was already present.
    bool insert(const std::string& key) { return keys_.insert(key).second; }
    [[nodiscard]] std::size_t size() const noexcept { return keys_.size(); }

private:
    std::unordered_set<std::string> keys_;
};

// ---------------------------------------------------------------------------
// Evaluation

struct EvaluationOutcome {
    std::optional<ObjectiveVector> objectives;
    std::string error;
};

/// Maps phenotype keys (canonical SMILES) to objective vectors, one outcome
/// per key in input order. Implementations may work in parallel internally.
class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual std::vector<EvaluationOutcome> evaluate(const std::vector<std::string>& keys) = 0;
};

/// Property models plus a docking gateway. Property scoring is spread over
/// `threads` workers; results are stored by index so order never matters.
class MoleculeEvaluator final : public Evaluator {
public:
    MoleculeEvaluator(std::shared_ptr<const MetricModels> models, MetricConfig metrics,
                      std::shared_ptr<ScorerGateway> gateway, std::size_t batch_size = 100, unsigned threads = 1)
        : models_(std::move(models)), metrics_(metrics), gateway_(std::move(gateway)),
          batch_size_(std::max<std::size_t>(batch_size, 1)), threads_(std::max(threads, 1u)) {
        metrics_.validate();
    }

    std::vector<EvaluationOutcome> evaluate(const std::vector<std::string>& keys) override {
        const std::size_t n = keys.size();
        std::vector<std::optional<PropertyReport>> props(n);
        std::vector<std::string> errors(n);
        auto work = [&](std::size_t begin, std::size_t stride) {
            for (std::size_t i = begin; i < n; i += stride) {
                try {
                    props[i] = evaluate_properties(parse_smiles(keys[i]), *models_);
                } catch (const std::exception& e) {
                    errors[i] = std::string("property evaluation failed: ") + e.what();
                }
            }
        };
        const std::size_t workers = std::min<std::size_t>(threads_, std::max<std::size_t>(n, 1));
        if (workers <= 1) work(0, 1);
        else {
            std::vector<std::thread> pool;
            for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work, t, workers);
            for (auto& th : pool) th.join();
        }

        std::vector<std::optional<double>> docking(n);
        std::vector<ScoreRequest> batch;
        auto flush = [&] {
            if (batch.empty()) return;
            std::vector<ScoreResponse> resp;
            try {
                resp = gateway_->score_batch(batch);
            } catch (const std::exception& e) {
                for (const auto& r : batch) errors[static_cast<std::size_t>(r.id)] = std::string("docking failed: ") + e.what();
                batch.clear();
                return;
            }
            for (const auto& r : resp) {
                const auto i = static_cast<std::size_t>(r.id);
                if (r.ok()) docking[i] = r.score;
                else errors[i] = "docking failed: " + r.error;
            }
            batch.clear();
        };
        for (std::size_t i = 0; i < n; ++i) {
            if (!props[i]) continue;
            batch.push_back({static_cast<long long>(i), keys[i]});
            if (batch.size() >= batch_size_) flush();
        }
        flush();

        std::vector<EvaluationOutcome> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (props[i] && docking[i]) {
                try {
                    out[i].objectives = objectives(*props[i], *docking[i], metrics_);
                } catch (const std::exception& e) {
                    out[i].error = e.what();
                }
            } else {
                out[i].error = errors[i].empty() ? "no docking score" : errors[i];
            }
        }
        return out;
    }

private:
    std::shared_ptr<const MetricModels> models_;
    MetricConfig metrics_;
    std::shared_ptr<ScorerGateway> gateway_;
    std::size_t batch_size_;
    unsigned threads_;
};

/// Evaluates every unevaluated individual. Failures get the worst objective
/// vector and a warning.
inline void evaluate_individuals(std::vector<Individual*>& inds, Evaluator& evaluator, const MetricConfig& metrics) {
    std::vector<std::string> keys;
    std::vector<Individual*> todo;
    for (auto* ind : inds)
        if (!ind->evaluated) {
            keys.push_back(ind->phenotype_key);
            todo.push_back(ind);
        }
    if (todo.empty()) return;
    auto outcomes = evaluator.evaluate(keys);
    if (outcomes.size() != todo.size()) throw ContractViolation("evaluator returned a wrong number of outcomes");
    for (std::size_t i = 0; i < todo.size(); ++i) {
        if (outcomes[i].objectives) todo[i]->objectives = *outcomes[i].objectives;
        else {
            warn("evaluation of '" + todo[i]->phenotype_key + "' failed (" + outcomes[i].error + "); assigning worst objectives");
            todo[i]->objectives = ObjectiveVector::worst();
        }
        todo[i]->fitness = scalarize(todo[i]->objectives, metrics);
        todo[i]->evaluated = true;
    }
}

inline void evaluate_population(std::vector<Individual>& pop, Evaluator& evaluator, const MetricConfig& metrics) {
    std::vector<Individual*> ptrs;
    for (auto& ind : pop) ptrs.push_back(&ind);
    evaluate_individuals(ptrs, evaluator, metrics);
}

// ---------------------------------------------------------------------------
// Initialization and mutation

/// `mu` random genotypes of `init_length` symbols with pairwise distinct
/// phenotypes, all registered. A collision discards the candidate.
inline std::vector<Individual> init_population(const EvolutionConfig& cfg, const Alphabet& alphabet,
                                               UniquenessRegistry& registry, Rng& rng) {
    cfg.validate();
    std::vector<Individual> pop;
    pop.reserve(cfg.mu);
    while (pop.size() < cfg.mu) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt < cfg.duplicate_retry_limit && !placed; ++attempt) {
            Individual ind(random_string(cfg.init_length, alphabet, rng), 0);
            if (registry.insert(ind.phenotype_key)) {
                pop.push_back(std::move(ind));
                placed = true;
            }
        }
        if (!placed)
            throw InitializationError("could not generate a unique individual within duplicate_retry_limit = " +
                                      std::to_string(cfg.duplicate_retry_limit) + " attempts");
    }
    return pop;
}

struct MutationOptions {
    std::size_t max_tokens = kDefaultMaxTokens;
    std::size_t retry_limit = 100;
    bool enforce_unique = true;
    std::size_t generation = 0; // birth generation of the child
};

/// What the accepted attempt did.
struct MutationRecord {
    std::size_t replaced = 0;
    bool inserted = false;
    bool deleted = false;
    std::size_t attempts = 0;
};

/// One mutation attempt: per-symbol replacement, then at most one insertion
/// (skipped at max_tokens), then at most one deletion (skipped at length 1).
inline SelfiesString mutate_genotype(const SelfiesString& parent, const MutationRates& rates, const Alphabet& alphabet,
                                     Rng& rng, std::size_t max_tokens, MutationRecord* rec = nullptr) {
    std::vector<SelfiesSymbol> s(parent.symbols().begin(), parent.symbols().end());
    std::bernoulli_distribution replace(rates.p_r), insert(rates.p_i), remove(rates.p_d);
    MutationRecord r;
    for (auto& sym : s)
        if (replace(rng)) {
            sym = alphabet.draw(rng);
            ++r.replaced;
        }
    if (insert(rng) && s.size() < max_tokens) {
        const auto pos = std::uniform_int_distribution<std::size_t>(0, s.size())(rng);
        s.insert(s.begin() + static_cast<std::ptrdiff_t>(pos), alphabet.draw(rng));
        r.inserted = true;
    }
    if (remove(rng) && s.size() > 1) {
        const auto pos = std::uniform_int_distribution<std::size_t>(0, s.size() - 1)(rng);
        s.erase(s.begin() + static_cast<std::ptrdiff_t>(pos));
        r.deleted = true;
    }
    if (s.size() > max_tokens) s.resize(max_tokens);
    if (rec) *rec = r;
    return SelfiesString(std::move(s));
}

/// Mutates `parent` until the child's phenotype is new to the registry (when
/// enforcing uniqueness), then registers it.
inline Individual mutate(const Individual& parent, const MutationRates& rates, const Alphabet& alphabet,
                         UniquenessRegistry& registry, Rng& rng, const MutationOptions& opt = {},
                         MutationRecord* rec = nullptr) {
    for (std::size_t attempt = 1; attempt <= opt.retry_limit; ++attempt) {
        MutationRecord r;
        Individual child(mutate_genotype(parent.genotype, rates, alphabet, rng, opt.max_tokens, &r), opt.generation);
        if (opt.enforce_unique && !registry.insert(child.phenotype_key)) continue;
        if (!opt.enforce_unique) registry.insert(child.phenotype_key);
        r.attempts = attempt;
        if (rec) *rec = r;
        return child;
    }
    throw MutationError("no unique offspring within retry limit " + std::to_string(opt.retry_limit));
}

// ---------------------------------------------------------------------------
// Generation steps

struct TranscriptRecord {
    std::size_t generation = 0;
    std::string phenotype_key;
    std::string genotype;
    ObjectiveVector objectives;
    double fitness = 1.0;
};

inline nlohmann::json to_json(const TranscriptRecord& r) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < kObjectiveCount; ++i) obj[kObjectiveNames[i]] = r.objectives[i];
    return {{"generation", r.generation}, {"phenotype_key", r.phenotype_key}, {"genotype", r.genotype},
            {"objectives", obj}, {"fitness", r.fitness}};
}

using TranscriptSink = std::function<void(const TranscriptRecord&)>;

struct StepOptions {
    const Alphabet* alphabet = &Alphabet::standard();
    MetricConfig metrics{};
    std::size_t generation = 1; // index of the generation being produced
    TranscriptSink sink;
    /// When set, skipped offspring slots are counted here instead of warned about.
    std::size_t* skipped_slots = nullptr;
};

inline void record(const StepOptions& opt, const Individual& ind) {
    if (opt.sink) opt.sink({ind.birth_generation, ind.phenotype_key, render(ind.genotype), ind.objectives, ind.fitness});
}

/// Produces and evaluates up to lambda offspring from uniformly chosen
/// parents. Slots whose retry limit runs out are skipped with a warning.
inline std::vector<Individual> make_offspring(const std::vector<Individual>& parents, const EvolutionConfig& cfg,
                                              const MutationRates& rates, Evaluator& evaluator,
                                              UniquenessRegistry& registry, Rng& rng, const StepOptions& opt) {
    if (parents.empty()) throw ArgumentError("make_offspring: empty parent population");
    MutationOptions mo{cfg.max_tokens, cfg.duplicate_retry_limit, true, opt.generation};
    std::vector<Individual> kids;
    kids.reserve(cfg.lambda);
    std::uniform_int_distribution<std::size_t> pick(0, parents.size() - 1);
    std::size_t skipped = 0;
    for (std::size_t k = 0; k < cfg.lambda; ++k) {
        const auto& p = parents[pick(rng)];
        try {
            kids.push_back(mutate(p, rates, *opt.alphabet, registry, rng, mo));
        } catch (const MutationError&) {
            ++skipped;
        }
    }
    if (opt.skipped_slots) *opt.skipped_slots += skipped;
    else if (skipped > 0)
        warn("generation " + std::to_string(opt.generation) + ": skipped " + std::to_string(skipped) +
             " offspring slot(s) after exhausting the duplicate retry limit");
    evaluate_population(kids, evaluator, opt.metrics);
    for (const auto& k : kids) record(opt, k);
    return kids;
}

/// Plus-selection order: ascending fitness, then older birth generation, then key.
inline bool fitter(const Individual& a, const Individual& b) {
    if (a.fitness != b.fitness) return a.fitness < b.fitness;
    if (a.birth_generation != b.birth_generation) return a.birth_generation < b.birth_generation;
    return a.phenotype_key < b.phenotype_key;
}

inline std::vector<Individual> plus_select(std::vector<Individual> pool, std::size_t mu) {
    std::sort(pool.begin(), pool.end(), fitter);
    if (pool.size() > mu) pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(mu), pool.end());
    return pool;
}

inline std::vector<Individual> step_single_objective(const std::vector<Individual>& parents, const EvolutionConfig& cfg,
                                                     const MutationRates& rates, Evaluator& evaluator,
                                                     UniquenessRegistry& registry, Rng& rng, const StepOptions& opt = {}) {
    auto pool = parents;
    for (const auto& p : pool)
        if (!p.evaluated) throw ArgumentError("step_single_objective: parents must be evaluated");
    auto kids = make_offspring(parents, cfg, rates, evaluator, registry, rng, opt);
    pool.insert(pool.end(), std::make_move_iterator(kids.begin()), std::make_move_iterator(kids.end()));
    return plus_select(std::move(pool), cfg.mu);
}

inline std::vector<Point> objective_points(const std::vector<Individual>& pop) {
    std::vector<Point> pts;
    pts.reserve(pop.size());
    for (const auto& ind : pop) pts.emplace_back(ind.objectives.begin(), ind.objectives.end());
    return pts;
}

inline std::vector<Individual> nsga2_survivors(const std::vector<Individual>& pool, std::size_t mu) {
    std::vector<std::string> keys;
    for (const auto& ind : pool) keys.push_back(ind.phenotype_key);
    const auto idx = nsga2_select(objective_points(pool), keys, std::min(mu, pool.size()));
    std::vector<Individual> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(pool[i]);
    return out;
}

inline std::vector<Individual> step_nsga2(const std::vector<Individual>& parents, const EvolutionConfig& cfg,
                                          const MutationRates& rates, Evaluator& evaluator, UniquenessRegistry& registry,
                                          Rng& rng, const StepOptions& opt = {}) {
    auto pool = parents;
    for (const auto& p : pool)
        if (!p.evaluated) throw ArgumentError("step_nsga2: parents must be evaluated");
    auto kids = make_offspring(parents, cfg, rates, evaluator, registry, rng, opt);
    pool.insert(pool.end(), std::make_move_iterator(kids.begin()), std::make_move_iterator(kids.end()));
    return nsga2_survivors(pool, cfg.mu);
}

} // namespace molevo
