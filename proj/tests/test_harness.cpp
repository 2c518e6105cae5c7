#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "oracles.hpp"

using namespace molevo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("molevo_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

ExperimentConfig small(Mode mode, const fs::path& out, std::size_t repeats = 2, std::size_t generations = 4) {
    ExperimentConfig c;
    c.mode = mode;
    c.repeats = repeats;
    c.evolution.max_generations = generations;
    c.evolution.lambda = 30;
    c.evolution.seed = 42;
    c.nsga2_mu = 8;
    c.snapshot_every = 2;
    c.output_dir = out.string();
    return c;
}

struct Quiet {
    WarningSink prev;
    Quiet() { prev = set_warning_sink([](const std::string&) {}); }
    ~Quiet() { set_warning_sink(prev); }
};

int run_cli(const std::string& args, std::string* output = nullptr) {
    TempDir t;
    const auto log = t.path / "out.txt";
    const std::string cmd = std::string(MOLEVO_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (output) *output = slurp(log);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST(Seeds, DerivedSeedsDistinctAndStable) {
    std::set<std::uint64_t> s;
    for (std::uint64_t i = 0; i < 1000; ++i) s.insert(derive_seed(7, i));
    EXPECT_EQ(s.size(), 1000u);
    EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
    EXPECT_NE(derive_seed(7, 3), derive_seed(8, 3));
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Csv, QuotingRoundTrip) {
    for (const std::string s : {"plain", "a,b", "say \"hi\"", "", "C(=O)O"}) {
        const auto fields = split_csv_line(csv_field(s) + "," + csv_field("x"));
        ASSERT_EQ(fields.size(), 2u);
        EXPECT_EQ(fields[0], s);
    }
}

TEST(MeanStdTest, SampleStatistics) {
    const auto m = mean_std({1, 2, 3, 4});
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.std, std::sqrt(5.0 / 3.0), 1e-15);
    EXPECT_EQ(mean_std({3}).std, 0.0);
    EXPECT_EQ(mean_std({}).n, 0u);
}

TEST(Config, DefaultsMatchPublishedSetup) {
    const ExperimentConfig c;
    EXPECT_EQ(c.evolution.mu, 10u);
    EXPECT_EQ(c.evolution.lambda, 100u);
    EXPECT_EQ(c.evolution.max_generations, 200u);
    EXPECT_EQ(c.evolution.max_tokens, 80u);
    EXPECT_EQ(c.nsga2_mu, 20u);
    EXPECT_EQ(c.repeats, 20u);
    EXPECT_EQ(c.mutation.p_r, 0.05);
    EXPECT_EQ(c.mutation.p_i, 0.1);
    EXPECT_EQ(c.mutation.p_d, 0.1);
    EXPECT_EQ(c.metrics.weights, (std::array<double, 5>{0.4, 0.15, 0.15, 0.15, 0.15}));
    EXPECT_EQ(c.metrics.docking_min, -15.0);
    EXPECT_EQ(c.metrics.docking_max, 1.0);
}

TEST(Config, JsonRoundTripAndStrictKeys) {
    auto c = small(Mode::Nsga2, "somewhere");
    c.docking.timeout = 12;
    const auto j = experiment_json(c);
    const auto back = experiment_from_json(j);
    EXPECT_EQ(experiment_json(back), j);
    auto bad = j;
    bad["evolution"]["muu"] = 3;
    EXPECT_THROW(experiment_from_json(bad), ConfigError);
    bad = j;
    bad["mode"] = "moead";
    EXPECT_THROW(experiment_from_json(bad), ConfigError);
    bad = j;
    bad["repeats"] = 0;
    EXPECT_THROW(experiment_from_json(bad), ConfigError);
    bad = j;
    bad["evolution"]["mu"] = "ten";
    EXPECT_THROW(experiment_from_json(bad), ConfigError);
}

TEST(Config, LoadResolvesRelativePaths) {
    TempDir t;
    fs::create_directories(t.path / "cfg");
    {
        std::ofstream out(t.path / "cfg" / "c.json");
        out << R"({"mode": "nsga2", "data": {"alphabet": "../alpha.json"}, "execution": {"run_threads": 3}})";
    }
    const auto c = load_experiment((t.path / "cfg" / "c.json").string());
    EXPECT_EQ(c.mode, Mode::Nsga2);
    EXPECT_EQ(c.run_threads, 3u);
    EXPECT_EQ(fs::path(c.data.alphabet), (t.path / "alpha.json").lexically_normal());
    EXPECT_THROW(load_experiment((t.path / "missing.json").string()), ConfigError);
}

TEST(RunExperiment, TwoGenerationArtifacts) {
    Quiet q;
    TempDir t;
    const auto cfg = small(Mode::Single, t.path / "out", 1, 2);
    const auto res = run_experiment(cfg);
    ASSERT_EQ(res.runs.size(), 1u);
    ASSERT_TRUE(res.runs[0].ok) << res.runs[0].error;
    EXPECT_EQ(res.runs[0].rows.size(), 2u);
    const auto out = t.path / "out";
    for (const char* f : {"manifest.json", "config.json", "metric_development.csv", "metric_development_long.csv",
                          "summary.csv", "table2.csv", "run_000/metrics.csv", "run_000/transcript.jsonl",
                          "run_000/final_population.csv", "run_000/radar.csv"})
        EXPECT_TRUE(fs::exists(out / f)) << f;
    EXPECT_EQ(read_csv((out / "run_000/metrics.csv").string()).rows.size(), 2u);
    EXPECT_EQ(read_csv((out / "metric_development.csv").string()).rows.size(), 2u);
    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    EXPECT_EQ(manifest["runs"][0]["seed"].get<std::uint64_t>(), derive_seed(42, 0));
    EXPECT_EQ(manifest["config_hash"].get<std::string>(), fnv1a_hex(experiment_json(cfg).dump()));
    // transcript: initial population plus every offspring, one record per evaluation
    std::size_t lines = 0;
    std::istringstream tr(slurp(out / "run_000/transcript.jsonl"));
    for (std::string l; std::getline(tr, l); ++lines) {
        const auto j = nlohmann::json::parse(l);
        EXPECT_TRUE(j.contains("phenotype_key"));
        EXPECT_TRUE(j.contains("fitness"));
    }
    EXPECT_EQ(lines, res.runs[0].evaluated);
}

TEST(RunExperiment, SingleModeBestFitnessNonIncreasing) {
    Quiet q;
    TempDir t;
    auto cfg = small(Mode::Single, t.path, 3, 15);
    const auto res = run_experiment(cfg, false);
    for (const auto& r : res.runs) {
        ASSERT_TRUE(r.ok);
        ASSERT_EQ(r.rows.size(), 15u);
        for (std::size_t g = 1; g < r.rows.size(); ++g) EXPECT_LE(r.rows[g].best_fitness, r.rows[g - 1].best_fitness);
        for (const auto& row : r.rows) EXPECT_NEAR(row.best_fitness, scalarize(row.best), 1e-15);
    }
}

TEST(RunExperiment, Nsga2SnapshotsAndFiles) {
    Quiet q;
    TempDir t;
    auto cfg = small(Mode::Nsga2, t.path / "o", 1, 5);
    const auto res = run_experiment(cfg);
    const auto& r = res.runs.at(0);
    ASSERT_TRUE(r.ok) << r.error;
    std::vector<std::size_t> gens;
    for (const auto& s : r.snapshots) gens.push_back(s.generation);
    EXPECT_EQ(gens, (std::vector<std::size_t>{1, 2, 4, 5}));
    EXPECT_EQ(r.final_population.size(), 8u);
    for (const char* f : {"fronts.csv", "hypervolume.csv", "docking_vs_qed.csv", "docking_vs_np.csv", "docking_vs_sa.csv"})
        EXPECT_TRUE(fs::exists(t.path / "o" / "run_000" / f)) << f;
    for (const auto& row : r.rows) {
        EXPECT_GT(row.hypervolume, 0.0);
        EXPECT_LE(row.hypervolume, 1.0);
        EXPECT_GE(row.front_size, 1u);
    }
    EXPECT_EQ(read_csv((t.path / "o" / "run_000" / "radar.csv").string()).rows.size(), 8u);
}

TEST(RunExperiment, ReproducibleAcrossOutputDirsAndThreads) {
    Quiet q;
    TempDir t;
    auto a = small(Mode::Nsga2, t.path / "a", 3, 4);
    auto b = a;
    b.output_dir = (t.path / "b").string();
    b.run_threads = 3;
    b.eval_threads = 2;
    run_experiment(a);
    run_experiment(b);
    const auto ta = tree(t.path / "a"), tb = tree(t.path / "b");
    ASSERT_EQ(ta.size(), tb.size());
    for (const auto& [name, content] : ta) EXPECT_TRUE(tb.at(name) == content) << name;
}

TEST(RunExperiment, UnwritableOutputIsStartupError) {
    TempDir t;
    { std::ofstream(t.path / "file") << "x"; }
    const auto cfg = small(Mode::Single, t.path / "file" / "out", 1, 1);
    EXPECT_THROW(run_experiment(cfg), InitializationError);
}

TEST(RunExperiment, FailedRunsAreRecorded) {
    Quiet q;
    TempDir t;
    { std::ofstream(t.path / "one.json") << R"({"[C]": 1})"; }
    auto cfg = small(Mode::Single, t.path / "out", 2, 2);
    cfg.data.alphabet = (t.path / "one.json").string();
    cfg.evolution.duplicate_retry_limit = 3;
    const auto res = run_experiment(cfg);
    for (const auto& r : res.runs) {
        EXPECT_FALSE(r.ok);
        EXPECT_NE(r.error.find("duplicate_retry_limit"), std::string::npos);
    }
    const auto manifest = nlohmann::json::parse(slurp(t.path / "out" / "manifest.json"));
    EXPECT_EQ(manifest["runs"][1]["status"], "failed");
}

TEST(RunExperiment, ReferenceMoleculesInTable) {
    Quiet q;
    TempDir t;
    { std::ofstream(t.path / "refs.csv") << "name,smiles\naspirin,CC(=O)Oc1ccccc1C(=O)O\nbroken,C((\n"; }
    auto cfg = small(Mode::Single, t.path / "out", 2, 2);
    cfg.reference_molecules = (t.path / "refs.csv").string();
    const auto res = run_experiment(cfg);
    ASSERT_EQ(res.references.size(), 2u);
    EXPECT_TRUE(res.references[0].objectives.has_value());
    EXPECT_FALSE(res.references[1].objectives.has_value());
    const auto table = read_csv((t.path / "out" / "table2.csv").string());
    ASSERT_EQ(table.rows.size(), 3u);
    EXPECT_EQ(table.rows[0][0], "single_objective");
    EXPECT_EQ(table.rows[0][1], "2");
    EXPECT_EQ(table.rows[1][0], "aspirin");
    EXPECT_EQ(table.rows[2][0], "broken");
    EXPECT_EQ(table.rows[2][1], "0");
}

TEST(Aggregation, MatchesRecomputationFromRunRows) {
    Quiet q;
    TempDir t;
    const auto cfg = small(Mode::Nsga2, t.path, 4, 5);
    run_experiment(cfg);
    const auto agg = read_csv((t.path / "metric_development.csv").string());
    const auto lng = read_csv((t.path / "metric_development_long.csv").string());
    ASSERT_EQ(agg.rows.size(), 5u);
    ASSERT_EQ(lng.rows.size(), 20u);
    for (const auto& col : metric_columns()) {
        const auto ci = *lng.column(col);
        const auto mi = *agg.column(col + "_mean"), si = *agg.column(col + "_std");
        for (std::size_t g = 1; g <= 5; ++g) {
            std::vector<double> xs;
            for (const auto& row : lng.rows)
                if (std::stoul(row[1]) == g) xs.push_back(std::stod(row[ci]));
            ASSERT_EQ(xs.size(), 4u);
            double mean = 0;
            for (double x : xs) mean += x;
            mean /= 4;
            double ss = 0;
            for (double x : xs) ss += (x - mean) * (x - mean);
            EXPECT_NEAR(std::stod(agg.rows[g - 1][mi]), mean, 1e-9 * (1 + std::abs(mean))) << col << " g" << g;
            EXPECT_NEAR(std::stod(agg.rows[g - 1][si]), std::sqrt(ss / 3), 1e-9) << col << " g" << g;
        }
    }
}

TEST(FrontSlices, ThreeFilesOfThreeRows) {
    TempDir t;
    FrontSnapshot s{7, {{"CCO", ObjectiveVector(0.1, 0.2, 0.3, 0.4, 0), 1},
                        {"c1ccccc1", ObjectiveVector(0.15, 0.25, 0.35, 0.45, 1), 2},
                        {"C,weird", ObjectiveVector(0.123456789012345, 0.5, 0.6, 0.7, 0), 3}}};
    const auto files = export_front_slices({s}, t.path);
    ASSERT_EQ(files.size(), 3u);
    const std::map<std::string, std::size_t> which = {{"qed", 2}, {"np", 3}, {"sa", 1}};
    for (const auto& f : files) {
        const auto tab = read_csv(f.string());
        ASSERT_EQ(tab.rows.size(), 3u);
        const std::string metric = tab.header.back();
        const std::size_t k = which.at(metric);
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_EQ(tab.rows[i][0], "7");
            EXPECT_EQ(tab.rows[i][1], s.points[i].phenotype_key);
            EXPECT_NEAR(std::stod(tab.rows[i][2]), s.points[i].objectives.docking(), 1e-12);
            EXPECT_NEAR(std::stod(tab.rows[i][3]), s.points[i].objectives[k], 1e-12);
        }
    }
    EXPECT_THROW(export_front_slices({}, t.path), ArgumentError);
}

TEST(Radar, OrientationAndBounds) {
    Individual best(parse_symbols("[C]"));
    best.objectives = ObjectiveVector(0, 0, 0, 0, 0);
    const auto r = export_radar({best});
    ASSERT_EQ(r.size(), 1u);
    for (double v : r[0].values) EXPECT_EQ(v, 1.0);

    Rng rng(3);
    std::vector<Individual> pop;
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 20; ++i) {
        Individual ind(random_string(10, Alphabet::standard(), rng));
        ind.objectives = ObjectiveVector(u(rng), u(rng), u(rng), u(rng), rng() % 2);
        pop.push_back(ind);
    }
    const auto recs = export_radar(pop);
    EXPECT_EQ(recs.size(), 20u);
    for (std::size_t i = 0; i < recs.size(); ++i)
        for (std::size_t k = 0; k < 5; ++k) {
            EXPECT_GE(recs[i].values[k], 0.0);
            EXPECT_LE(recs[i].values[k], 1.0);
            EXPECT_EQ(recs[i].values[k], 1.0 - pop[i].objectives[k]);
        }
}

TEST(Cli, Decode) {
    std::string out;
    EXPECT_EQ(run_cli("decode '[O][c][c][c][c][c][c][Ring1][Branch1_1][F]'", &out), 0);
    EXPECT_EQ(out, canonical_form(parse_smiles("Oc1ccccc1F")) + "\n");
    EXPECT_NE(run_cli("decode '[C][Qx]'", &out), 0);
    EXPECT_NE(out.find("[Qx]"), std::string::npos);
}

TEST(Cli, Score) {
    std::string out;
    ASSERT_EQ(run_cli("score 'c1ccccc1O'", &out), 0) << out;
    const auto j = nlohmann::json::parse(out);
    const auto rep = evaluate_properties(parse_smiles("c1ccccc1O"));
    const auto v = objectives(rep, surrogate_score(rep.descriptors));
    EXPECT_NEAR(j["objectives"]["docking"].get<double>(), v.docking(), 1e-12);
    EXPECT_NEAR(j["fitness"].get<double>(), scalarize(v), 1e-12);
    EXPECT_NE(run_cli("score 'C(('"), 0);
}

TEST(Cli, Hypervolume) {
    TempDir t;
    { std::ofstream(t.path / "f.csv") << "docking,qed\n0.5,0.5\n"; }
    std::string out;
    EXPECT_EQ(run_cli("hv " + (t.path / "f.csv").string(), &out), 0);
    EXPECT_EQ(out, "0.25\n");
    EXPECT_NE(run_cli("hv " + (t.path / "f.csv").string() + " --ref 1,1,1"), 0);
    EXPECT_NE(run_cli("hv " + (t.path / "missing.csv").string()), 0);
}

TEST(Cli, RunAndUsageErrors) {
    TempDir t;
    std::string out;
    EXPECT_EQ(run_cli("run --mode nsga2 --seed 3 --repeats 1 --generations 2 --out " + (t.path / "r").string(), &out), 0)
        << out;
    EXPECT_TRUE(fs::exists(t.path / "r" / "manifest.json"));
    EXPECT_NE(run_cli("run --mode moead"), 0);
    EXPECT_NE(run_cli("frobnicate"), 0);
    EXPECT_NE(run_cli("run " + (t.path / "nope.json").string()), 0);
}
