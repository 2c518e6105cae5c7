#pragma once

/// @file harness.hpp
/// @brief Experiment orchestration: configuration, seeded repeats, and
/// plot-ready CSV/JSON artifacts.
///
/// Layout under the output directory:
///   manifest.json                 seeds, config hash, version, run status
///   config.json                   resolved configuration
///   metric_development.csv        per generation, mean and std across runs
///   metric_development_long.csv   every run's per-generation rows
///   summary.csv                   first vs. last generation per metric
///   table2.csv                    final results per method and reference molecule
///   run_NNN/metrics.csv, transcript.jsonl, final_population.csv, radar.csv
///   run_NNN/fronts.csv, hypervolume.csv, docking_vs_{qed,np,sa}.csv   (nsga2 only)
/// Generation g is the parent population after g generation steps; g = 0 is
/// the initial population and appears only in the transcript.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "molevo/evolution.hpp"

#ifndef MOLEVO_VERSION
#define MOLEVO_VERSION "0.1.0"
#endif

namespace molevo {

namespace fs = std::filesystem;

enum class Mode { Single, Nsga2 };

inline std::string to_string(Mode m) { return m == Mode::Single ? "single" : "nsga2"; }

inline Mode parse_mode(const std::string& s) {
    if (s == "single") return Mode::Single;
    if (s == "nsga2") return Mode::Nsga2;
    throw ConfigError("unknown mode '" + s + "' (expected single or nsga2)");
}

/// Optional data-file overrides; empty means the built-in default.
struct DataPaths {
    std::string alphabet, desirability, sa_fragments, np_fragments, filters, alogp, psa;
};

struct ExperimentConfig {
    Mode mode = Mode::Single;
    EvolutionConfig evolution{};
    std::size_t nsga2_mu = 20; // parent count in nsga2 mode
    MutationRates mutation{};
    MetricConfig metrics{};
    DockingConfig docking{};
    std::size_t repeats = 20;
    std::size_t snapshot_every = 10;
    Point hv_reference = Point(kObjectiveCount, 1.0);
    DataPaths data{};
    std::string reference_molecules; // CSV with columns name,smiles
    std::string output_dir = "out";
    unsigned run_threads = 1;  // concurrent repeats
    unsigned eval_threads = 1; // property workers per run

    [[nodiscard]] std::size_t parents() const { return mode == Mode::Nsga2 ? nsga2_mu : evolution.mu; }

    void validate() const {
        evolution.validate();
        if (nsga2_mu < 1) throw ConfigError("nsga2_mu must be >= 1");
        mutation.validate();
        metrics.validate();
        docking.validate();
        if (repeats < 1) throw ConfigError("repeats must be >= 1");
        if (snapshot_every < 1) throw ConfigError("snapshot_every must be >= 1");
        if (hv_reference.size() != kObjectiveCount) throw ConfigError("hv_reference needs 5 components");
    }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw ConfigError("unknown configuration key '" + where + "." + k + "'");
    }
}

template <class T>
void get_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace detail

/// Everything except the output location and thread counts, which do not
/// affect results. This is the hashed and recorded form.
inline nlohmann::json experiment_json(const ExperimentConfig& c) {
    const auto& e = c.evolution;
    return {
        {"mode", to_string(c.mode)},
        {"evolution",
         {{"mu", e.mu}, {"lambda", e.lambda}, {"max_generations", e.max_generations}, {"max_tokens", e.max_tokens},
          {"init_length", e.init_length}, {"duplicate_retry_limit", e.duplicate_retry_limit}, {"seed", e.seed}}},
        {"nsga2_mu", c.nsga2_mu},
        {"mutation", {{"p_r", c.mutation.p_r}, {"p_i", c.mutation.p_i}, {"p_d", c.mutation.p_d}}},
        {"metrics", c.metrics},
        {"docking", c.docking},
        {"repeats", c.repeats},
        {"snapshot_every", c.snapshot_every},
        {"hv_reference", c.hv_reference},
        {"data",
         {{"alphabet", c.data.alphabet}, {"desirability", c.data.desirability}, {"sa_fragments", c.data.sa_fragments},
          {"np_fragments", c.data.np_fragments}, {"filters", c.data.filters}, {"alogp", c.data.alogp}, {"psa", c.data.psa}}},
        {"reference_molecules", c.reference_molecules},
    };
}

inline ExperimentConfig experiment_from_json(const nlohmann::json& j) {
    using detail::get_if;
    ExperimentConfig c;
    try {
        detail::check_keys(j, "config",
                           {"mode", "evolution", "nsga2_mu", "mutation", "metrics", "docking", "repeats", "snapshot_every",
                            "hv_reference", "data", "reference_molecules", "output_dir", "execution"});
        if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
        if (j.contains("evolution")) {
            const auto& e = j.at("evolution");
            detail::check_keys(e, "evolution",
                               {"mu", "lambda", "max_generations", "max_tokens", "init_length", "duplicate_retry_limit", "seed"});
            get_if(e, "mu", c.evolution.mu);
            get_if(e, "lambda", c.evolution.lambda);
            get_if(e, "max_generations", c.evolution.max_generations);
            get_if(e, "max_tokens", c.evolution.max_tokens);
            get_if(e, "init_length", c.evolution.init_length);
            get_if(e, "duplicate_retry_limit", c.evolution.duplicate_retry_limit);
            get_if(e, "seed", c.evolution.seed);
        }
        get_if(j, "nsga2_mu", c.nsga2_mu);
        if (j.contains("mutation")) {
            const auto& m = j.at("mutation");
            detail::check_keys(m, "mutation", {"p_r", "p_i", "p_d"});
            get_if(m, "p_r", c.mutation.p_r);
            get_if(m, "p_i", c.mutation.p_i);
            get_if(m, "p_d", c.mutation.p_d);
        }
        if (j.contains("metrics")) {
            detail::check_keys(j.at("metrics"), "metrics", {"weights", "docking_min", "docking_max", "softclip_sharpness"});
            c.metrics = j.at("metrics").get<MetricConfig>();
        }
        if (j.contains("docking")) {
            detail::check_keys(j.at("docking"), "docking",
                               {"backend", "executable", "extra_args", "receptor", "grid_center", "grid_size",
                                "exhaustiveness", "timeout", "batch_size"});
            c.docking = j.at("docking").get<DockingConfig>();
        }
        get_if(j, "repeats", c.repeats);
        get_if(j, "snapshot_every", c.snapshot_every);
        get_if(j, "hv_reference", c.hv_reference);
        if (j.contains("data")) {
            const auto& d = j.at("data");
            detail::check_keys(d, "data", {"alphabet", "desirability", "sa_fragments", "np_fragments", "filters", "alogp", "psa"});
            get_if(d, "alphabet", c.data.alphabet);
            get_if(d, "desirability", c.data.desirability);
            get_if(d, "sa_fragments", c.data.sa_fragments);
            get_if(d, "np_fragments", c.data.np_fragments);
            get_if(d, "filters", c.data.filters);
            get_if(d, "alogp", c.data.alogp);
            get_if(d, "psa", c.data.psa);
        }
        get_if(j, "reference_molecules", c.reference_molecules);
        get_if(j, "output_dir", c.output_dir);
        if (j.contains("execution")) {
            const auto& x = j.at("execution");
            detail::check_keys(x, "execution", {"run_threads", "eval_threads"});
            get_if(x, "run_threads", c.run_threads);
            get_if(x, "eval_threads", c.eval_threads);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("configuration: ") + e.what());
    }
    c.validate();
    return c;
}

inline ExperimentConfig load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("configuration " + path + ": " + e.what());
    }
    auto cfg = experiment_from_json(j);
    // relative data paths resolve against the config file's directory
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](std::string& p) {
        if (!p.empty() && fs::path(p).is_relative()) p = (base / p).lexically_normal().string();
    };
    resolve(cfg.data.alphabet);
    resolve(cfg.data.desirability);
    resolve(cfg.data.sa_fragments);
    resolve(cfg.data.np_fragments);
    resolve(cfg.data.filters);
    resolve(cfg.data.alogp);
    resolve(cfg.data.psa);
    resolve(cfg.reference_molecules);
    return cfg;
}

/// splitmix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed of run `index`, derived from the master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ (index * 0xD1B54A32D192ED03ull + 1));
}

inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string fmt(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// Quotes a CSV field when it contains a delimiter, quote or newline.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

/// Minimal CSV reader for files written here: header row plus records.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::optional<std::size_t> column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') quoted = false;
            else cur += c;
        } else if (c == '"') quoted = true;
        else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') cur += c;
    }
    out.push_back(cur);
    return out;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open CSV file: " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (first) {
            t.header = split_csv_line(line);
            first = false;
        } else t.rows.push_back(split_csv_line(line));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Run records

struct GenerationRow {
    std::size_t generation = 0;
    double best_fitness = 1;
    ObjectiveVector best;   // single: best-fitness individual; nsga2: per-objective minima
    double hypervolume = 0; // rank-0 front of the parent population
    std::size_t front_size = 0;
    std::string best_key;   // best-fitness individual
};

struct FrontPoint {
    std::string phenotype_key;
    ObjectiveVector objectives;
    double crowding = 0;
};

struct FrontSnapshot {
    std::size_t generation = 0;
    std::vector<FrontPoint> points;
};

struct RunRecord {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::vector<GenerationRow> rows;
    std::vector<FrontSnapshot> snapshots;
    std::vector<Individual> final_population;
    std::vector<std::string> transcript; // JSON lines
    std::size_t evaluated = 0;           // registry size at the end
    std::size_t skipped_slots = 0;       // offspring slots lost to the duplicate retry limit
};

struct ReferenceMolecule {
    std::string name;
    std::string smiles;
    std::optional<ObjectiveVector> objectives;
    std::string error;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<RunRecord> runs;
    std::vector<ReferenceMolecule> references;
};

inline FrontSnapshot front_snapshot(const std::vector<Individual>& pop, std::size_t generation) {
    FrontSnapshot s{generation, {}};
    if (pop.empty()) return s;
    const auto pts = objective_points(pop);
    const auto fronts = non_dominated_sort(pts);
    const auto& members = fronts.front().members;
    const auto cd = crowding_distance(pts, members);
    for (std::size_t i = 0; i < members.size(); ++i)
        s.points.push_back({pop[members[i]].phenotype_key, pop[members[i]].objectives, cd[i]});
    return s;
}

inline GenerationRow summarize_generation(const std::vector<Individual>& pop, std::size_t generation, Mode mode,
                                          const Point& ref) {
    GenerationRow row;
    row.generation = generation;
    if (pop.empty()) return row;
    const Individual* best = &pop.front();
    for (const auto& ind : pop)
        if (fitter(ind, *best)) best = &ind;
    row.best_fitness = best->fitness;
    row.best_key = best->phenotype_key;
    if (mode == Mode::Single) row.best = best->objectives;
    else {
        std::array<double, kObjectiveCount> m{1, 1, 1, 1, 1};
        for (const auto& ind : pop)
            for (std::size_t k = 0; k < kObjectiveCount; ++k) m[k] = std::min(m[k], ind.objectives[k]);
        row.best = ObjectiveVector(m);
    }
    const auto pts = objective_points(pop);
    const auto fronts = non_dominated_sort(pts);
    std::vector<Point> front;
    for (std::size_t i : fronts.front().members) front.push_back(pts[i]);
    row.front_size = front.size();
    row.hypervolume = hypervolume(front, ref);
    return row;
}

// ---------------------------------------------------------------------------
// Shared read-only resources

struct Resources {
    std::shared_ptr<const MetricModels> models;
    std::shared_ptr<const Alphabet> alphabet;
};

inline Resources load_resources(const ExperimentConfig& cfg) {
    auto models = std::make_shared<MetricModels>();
    const auto& d = cfg.data;
    if (!d.desirability.empty()) models->desirability = DesirabilityParams::load(d.desirability);
    if (!d.sa_fragments.empty()) models->sa_fragments = FragmentTable::load(d.sa_fragments);
    if (!d.np_fragments.empty()) models->np_fragments = FragmentTable::load(d.np_fragments);
    if (!d.filters.empty()) {
        models->filter_patterns = load_alerts(d.filters);
        models->descriptor_tables.alerts = models->filter_patterns;
    }
    if (!d.alogp.empty()) models->descriptor_tables.alogp = ContributionTable::load(d.alogp);
    if (!d.psa.empty()) models->descriptor_tables.psa = ContributionTable::load(d.psa);
    auto alphabet = std::make_shared<Alphabet>(d.alphabet.empty() ? Alphabet::standard() : Alphabet::load(d.alphabet));
    return {std::move(models), std::move(alphabet)};
}

inline std::vector<ReferenceMolecule> load_reference_molecules(const std::string& path) {
    const auto t = read_csv(path);
    const auto name = t.column("name"), smiles = t.column("smiles");
    if (!name || !smiles) throw ConfigError("reference molecule file needs columns name,smiles: " + path);
    std::vector<ReferenceMolecule> out;
    for (const auto& r : t.rows)
        if (r.size() > std::max(*name, *smiles)) out.push_back({r[*name], r[*smiles], std::nullopt, {}});
    return out;
}

/// One seeded repeat. Exceptions are caught and recorded on the result.
inline RunRecord execute_run(const ExperimentConfig& cfg, const Resources& res, std::size_t index) {
    RunRecord run;
    run.index = index;
    run.seed = derive_seed(cfg.evolution.seed, index);
    try {
        EvolutionConfig ec = cfg.evolution;
        ec.mu = cfg.parents();
        ec.seed = run.seed;
        Rng rng(run.seed);
        std::shared_ptr<ScorerGateway> gateway = make_gateway(cfg.docking);
        MoleculeEvaluator evaluator(res.models, cfg.metrics, gateway, cfg.docking.batch_size, cfg.eval_threads);
        UniquenessRegistry registry;

        StepOptions opt;
        opt.alphabet = res.alphabet.get();
        opt.metrics = cfg.metrics;
        opt.sink = [&](const TranscriptRecord& r) { run.transcript.push_back(to_json(r).dump()); };
        opt.skipped_slots = &run.skipped_slots;

        auto pop = init_population(ec, *res.alphabet, registry, rng);
        evaluate_population(pop, evaluator, cfg.metrics);
        for (const auto& ind : pop) record(opt, ind);

        for (std::size_t g = 1; g <= ec.max_generations; ++g) {
            opt.generation = g;
            pop = cfg.mode == Mode::Single ? step_single_objective(pop, ec, cfg.mutation, evaluator, registry, rng, opt)
                                           : step_nsga2(pop, ec, cfg.mutation, evaluator, registry, rng, opt);
            run.rows.push_back(summarize_generation(pop, g, cfg.mode, cfg.hv_reference));
            if (cfg.mode == Mode::Nsga2 && (g == 1 || g % cfg.snapshot_every == 0 || g == ec.max_generations))
                run.snapshots.push_back(front_snapshot(pop, g));
        }
        run.final_population = std::move(pop);
        run.evaluated = registry.size();
        run.ok = true;
        if (run.skipped_slots > 0)
            warn("run " + std::to_string(index) + ": " + std::to_string(run.skipped_slots) +
                 " offspring slot(s) skipped after exhausting the duplicate retry limit");
    } catch (const std::exception& e) {
        run.ok = false;
        run.error = e.what();
        warn("run " + std::to_string(index) + " failed: " + run.error);
    }
    return run;
}

// ---------------------------------------------------------------------------
// Writers

inline std::ofstream open_output(const fs::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw InitializationError("cannot write " + p.string());
    return out;
}

inline const std::vector<std::string>& metric_columns() {
    static const std::vector<std::string> c = {"best_fitness", "docking", "sa", "qed", "np", "filters", "hypervolume", "front_size"};
    return c;
}

inline std::array<double, 8> row_values(const GenerationRow& r) {
    return {r.best_fitness, r.best.docking(), r.best.sa(), r.best.qed(), r.best.np(), r.best.filters(), r.hypervolume,
            static_cast<double>(r.front_size)};
}

inline void write_metrics_csv(const fs::path& p, const RunRecord& run, bool with_run_column) {
    auto out = open_output(p);
    if (with_run_column) out << "run,";
    out << "generation";
    for (const auto& c : metric_columns()) out << ',' << c;
    out << ",best_key\n";
    for (const auto& r : run.rows) {
        if (with_run_column) out << run.index << ',';
        out << r.generation;
        for (double v : row_values(r)) out << ',' << fmt(v);
        out << ',' << csv_field(r.best_key) << '\n';
    }
}

/// Three 2D projections (docking vs. QED, NP, SA) of every snapshot.
inline std::vector<fs::path> export_front_slices(const std::vector<FrontSnapshot>& snapshots, const fs::path& dir) {
    if (snapshots.empty()) throw ArgumentError("export_front_slices: no snapshots");
    static const std::array<std::pair<const char*, std::size_t>, 3> slices = {{{"qed", 2}, {"np", 3}, {"sa", 1}}};
    std::vector<fs::path> files;
    for (const auto& [name, k] : slices) {
        const fs::path p = dir / (std::string("docking_vs_") + name + ".csv");
        auto out = open_output(p);
        out << "generation,phenotype_key,docking," << name << '\n';
        for (const auto& s : snapshots)
            for (const auto& pt : s.points)
                out << s.generation << ',' << csv_field(pt.phenotype_key) << ',' << fmt(pt.objectives.docking()) << ','
                    << fmt(pt.objectives[k]) << '\n';
        files.push_back(p);
    }
    return files;
}

struct RadarRecord {
    std::string phenotype_key;
    std::array<double, kObjectiveCount> values{}; // 1 - score, border = better
};

inline std::vector<RadarRecord> export_radar(const std::vector<Individual>& pop) {
    std::vector<RadarRecord> out;
    out.reserve(pop.size());
    for (const auto& ind : pop) {
        RadarRecord r{ind.phenotype_key, {}};
        for (std::size_t k = 0; k < kObjectiveCount; ++k) r.values[k] = 1.0 - ind.objectives[k];
        out.push_back(std::move(r));
    }
    return out;
}

inline void write_radar_csv(const fs::path& p, const std::vector<RadarRecord>& recs) {
    auto out = open_output(p);
    out << "phenotype_key,docking,sa,qed,np,filters\n";
    for (const auto& r : recs) {
        out << csv_field(r.phenotype_key);
        for (double v : r.values) out << ',' << fmt(v);
        out << '\n';
    }
}

inline void write_run_artifacts(const fs::path& dir, const RunRecord& run, Mode mode) {
    fs::create_directories(dir);
    write_metrics_csv(dir / "metrics.csv", run, false);
    {
        auto out = open_output(dir / "transcript.jsonl");
        for (const auto& line : run.transcript) out << line << '\n';
    }
    {
        auto out = open_output(dir / "final_population.csv");
        out << "position,phenotype_key,genotype,docking,sa,qed,np,filters,fitness,birth_generation\n";
        for (std::size_t i = 0; i < run.final_population.size(); ++i) {
            const auto& ind = run.final_population[i];
            out << i << ',' << csv_field(ind.phenotype_key) << ',' << render(ind.genotype);
            for (double v : ind.objectives) out << ',' << fmt(v);
            out << ',' << fmt(ind.fitness) << ',' << ind.birth_generation << '\n';
        }
    }
    write_radar_csv(dir / "radar.csv", export_radar(run.final_population));
    if (mode != Mode::Nsga2) return;
    {
        auto out = open_output(dir / "fronts.csv");
        out << "generation,phenotype_key,docking,sa,qed,np,filters,crowding\n";
        for (const auto& s : run.snapshots)
            for (const auto& pt : s.points) {
                out << s.generation << ',' << csv_field(pt.phenotype_key);
                for (double v : pt.objectives) out << ',' << fmt(v);
                out << ',' << fmt(pt.crowding) << '\n';
            }
    }
    {
        auto out = open_output(dir / "hypervolume.csv");
        out << "generation,hypervolume,front_size\n";
        for (const auto& r : run.rows) out << r.generation << ',' << fmt(r.hypervolume) << ',' << r.front_size << '\n';
    }
    if (!run.snapshots.empty()) export_front_slices(run.snapshots, dir);
}

struct MeanStd {
    double mean = 0;
    double std = 0; // sample standard deviation, 0 for a single value
    std::size_t n = 0;
};

inline MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd m;
    m.n = xs.size();
    if (xs.empty()) return m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return m;
}

inline std::vector<const RunRecord*> successful(const ExperimentResult& res) {
    std::vector<const RunRecord*> ok;
    for (const auto& r : res.runs)
        if (r.ok) ok.push_back(&r);
    return ok;
}

/// Per generation and metric, mean and std across successful runs.
inline std::vector<std::vector<MeanStd>> aggregate_development(const ExperimentResult& res) {
    const auto runs = successful(res);
    const std::size_t G = res.config.evolution.max_generations;
    std::vector<std::vector<MeanStd>> agg(G, std::vector<MeanStd>(metric_columns().size()));
    for (std::size_t g = 0; g < G; ++g)
        for (std::size_t c = 0; c < metric_columns().size(); ++c) {
            std::vector<double> xs;
            for (const auto* r : runs)
                if (g < r->rows.size()) xs.push_back(row_values(r->rows[g])[c]);
            agg[g][c] = mean_std(xs);
        }
    return agg;
}

struct Table2Row {
    std::string label;
    std::size_t n = 0;
    std::array<MeanStd, kObjectiveCount> stats{};
};

/// Single mode: each run's final best-fitness individual. NSGA-II mode: per
/// objective, the 20 best final individuals pooled over runs.
/// Reference molecules follow as single-value rows.
inline std::vector<Table2Row> table2_rows(const ExperimentResult& res) {
    std::vector<Table2Row> rows;
    const auto runs = successful(res);
    Table2Row t;
    if (res.config.mode == Mode::Single) {
        t.label = "single_objective";
        std::array<std::vector<double>, kObjectiveCount> cols;
        for (const auto* r : runs) {
            if (r->final_population.empty()) continue;
            const Individual* best = &r->final_population.front();
            for (const auto& ind : r->final_population)
                if (fitter(ind, *best)) best = &ind;
            for (std::size_t k = 0; k < kObjectiveCount; ++k) cols[k].push_back(best->objectives[k]);
        }
        for (std::size_t k = 0; k < kObjectiveCount; ++k) t.stats[k] = mean_std(cols[k]);
        t.n = cols[0].size();
    } else {
        t.label = "nsga2";
        std::vector<const Individual*> pool;
        for (const auto* r : runs)
            for (const auto& ind : r->final_population) pool.push_back(&ind);
        for (std::size_t k = 0; k < kObjectiveCount; ++k) {
            auto sorted = pool;
            std::sort(sorted.begin(), sorted.end(), [k](const Individual* a, const Individual* b) {
                if (a->objectives[k] != b->objectives[k]) return a->objectives[k] < b->objectives[k];
                return a->phenotype_key < b->phenotype_key;
            });
            std::vector<double> xs;
            for (std::size_t i = 0; i < std::min<std::size_t>(20, sorted.size()); ++i) xs.push_back(sorted[i]->objectives[k]);
            t.stats[k] = mean_std(xs);
        }
        t.n = std::min<std::size_t>(20, pool.size());
    }
    rows.push_back(t);
    for (const auto& ref : res.references) {
        Table2Row r;
        r.label = ref.name;
        if (ref.objectives) {
            r.n = 1;
            for (std::size_t k = 0; k < kObjectiveCount; ++k) r.stats[k] = {(*ref.objectives)[k], 0.0, 1};
        }
        rows.push_back(r);
    }
    return rows;
}

inline void write_experiment_artifacts(const ExperimentResult& res, const fs::path& out_dir) {
    const auto& cfg = res.config;
    fs::create_directories(out_dir);
    const auto cfg_json = experiment_json(cfg);
    const std::string cfg_dump = cfg_json.dump();

    nlohmann::json manifest = {{"version", MOLEVO_VERSION},
                               {"config_hash", fnv1a_hex(cfg_dump)},
                               {"mode", to_string(cfg.mode)},
                               {"master_seed", cfg.evolution.seed},
                               {"repeats", cfg.repeats},
                               {"generations", cfg.evolution.max_generations},
                               {"seed_scheme", "splitmix64(splitmix64(master) ^ (index * 0xD1B54A32D192ED03 + 1))"}};
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : res.runs) {
        char name[32];
        std::snprintf(name, sizeof name, "run_%03zu", r.index);
        nlohmann::json jr = {{"index", r.index}, {"seed", r.seed}, {"status", r.ok ? "ok" : "failed"}, {"directory", name}};
        if (!r.ok) jr["error"] = r.error;
        else {
            jr["evaluated"] = r.evaluated;
            jr["skipped_slots"] = r.skipped_slots;
        }
        runs.push_back(jr);
        if (r.ok) write_run_artifacts(out_dir / name, r, cfg.mode);
    }
    manifest["runs"] = runs;
    open_output(out_dir / "manifest.json") << manifest.dump(2) << '\n';
    open_output(out_dir / "config.json") << cfg_json.dump(2) << '\n';

    {
        auto out = open_output(out_dir / "metric_development_long.csv");
        out << "run,generation";
        for (const auto& c : metric_columns()) out << ',' << c;
        out << ",best_key\n";
        for (const auto* r : successful(res))
            for (const auto& row : r->rows) {
                out << r->index << ',' << row.generation;
                for (double v : row_values(row)) out << ',' << fmt(v);
                out << ',' << csv_field(row.best_key) << '\n';
            }
    }
    const auto agg = aggregate_development(res);
    {
        auto out = open_output(out_dir / "metric_development.csv");
        out << "generation,runs";
        for (const auto& c : metric_columns()) out << ',' << c << "_mean," << c << "_std";
        out << '\n';
        for (std::size_t g = 0; g < agg.size(); ++g) {
            out << g + 1 << ',' << (agg[g].empty() ? 0 : agg[g][0].n);
            for (const auto& m : agg[g]) out << ',' << fmt(m.mean) << ',' << fmt(m.std);
            out << '\n';
        }
    }
    {
        auto out = open_output(out_dir / "summary.csv");
        out << "metric,first_generation,last_generation,first_mean,first_std,last_mean,last_std,runs_improved,runs\n";
        const auto ok = successful(res);
        for (std::size_t c = 0; c + 1 < metric_columns().size(); ++c) {
            if (agg.empty()) break;
            const bool maximize = metric_columns()[c] == "hypervolume";
            std::size_t improved = 0;
            for (const auto* r : ok) {
                if (r->rows.empty()) continue;
                const double a = row_values(r->rows.front())[c], b = row_values(r->rows.back())[c];
                improved += maximize ? (b > a) : (b < a);
            }
            out << metric_columns()[c] << ",1," << agg.size() << ',' << fmt(agg.front()[c].mean) << ','
                << fmt(agg.front()[c].std) << ',' << fmt(agg.back()[c].mean) << ',' << fmt(agg.back()[c].std) << ','
                << improved << ',' << ok.size() << '\n';
        }
    }
    {
        auto out = open_output(out_dir / "table2.csv");
        out << "method,n";
        for (const char* name : kObjectiveNames) out << ',' << name << "_mean," << name << "_std";
        out << '\n';
        for (const auto& row : table2_rows(res)) {
            out << csv_field(row.label) << ',' << row.n;
            for (const auto& s : row.stats) {
                if (row.n == 0) out << ",,";
                else out << ',' << fmt(s.mean) << ',' << fmt(s.std);
            }
            out << '\n';
        }
    }
}

/// Runs every repeat (possibly concurrently), scores reference molecules
/// and writes artifacts when `write` is set.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write = true) {
    cfg.validate();
    const fs::path out_dir = cfg.output_dir;
    if (write) {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        const fs::path probe = out_dir / ".write_probe";
        std::ofstream test(probe);
        if (ec || !test) throw InitializationError("output directory is not writable: " + out_dir.string());
        test.close();
        fs::remove(probe, ec);
    }
    const Resources res = load_resources(cfg);

    ExperimentResult result;
    result.config = cfg;
    result.runs.resize(cfg.repeats);
    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.run_threads, static_cast<unsigned>(cfg.repeats)));
    if (workers == 1) {
        for (std::size_t r = 0; r < cfg.repeats; ++r) result.runs[r] = execute_run(cfg, res, r);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t r = t; r < cfg.repeats; r += workers) result.runs[r] = execute_run(cfg, res, r);
            });
        for (auto& th : pool) th.join();
    }

    if (!cfg.reference_molecules.empty()) {
        result.references = load_reference_molecules(cfg.reference_molecules);
        std::shared_ptr<ScorerGateway> gateway = make_gateway(cfg.docking);
        MoleculeEvaluator evaluator(res.models, cfg.metrics, gateway, cfg.docking.batch_size, cfg.eval_threads);
        std::vector<std::string> keys;
        for (auto& ref : result.references) {
            try {
                ref.smiles = canonical_form(parse_smiles(ref.smiles));
            } catch (const Error& e) {
                ref.error = e.what();
            }
            keys.push_back(ref.smiles);
        }
        const auto outcomes = evaluator.evaluate(keys);
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            if (!result.references[i].error.empty()) continue;
            result.references[i].objectives = outcomes[i].objectives;
            if (!outcomes[i].objectives) {
                result.references[i].error = outcomes[i].error;
                warn("reference molecule '" + result.references[i].name + "': " + outcomes[i].error);
            }
        }
    }
    if (write) write_experiment_artifacts(result, out_dir);
    return result;
}

} // namespace molevo
