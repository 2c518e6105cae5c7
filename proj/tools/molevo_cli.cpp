// molevo command-line interface: run, decode, score, hv.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "molevo/molevo.hpp"

namespace {

using namespace molevo;

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw ArgumentError("not a number: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

int cmd_run(const std::string& config, const std::string& mode, const std::optional<std::uint64_t>& seed,
            const std::string& out, const std::optional<std::size_t>& repeats, const std::optional<std::size_t>& generations,
            const std::optional<unsigned>& threads) {
    auto cfg = config.empty() ? ExperimentConfig{} : load_experiment(config);
    if (!mode.empty()) cfg.mode = parse_mode(mode);
    if (seed) cfg.evolution.seed = *seed;
    if (!out.empty()) cfg.output_dir = out;
    if (repeats) cfg.repeats = *repeats;
    if (generations) cfg.evolution.max_generations = *generations;
    if (threads) cfg.run_threads = *threads;
    cfg.validate();
    const auto res = run_experiment(cfg);
    std::size_t failed = 0;
    for (const auto& r : res.runs) failed += r.ok ? 0 : 1;
    std::cout << "completed " << res.runs.size() - failed << "/" << res.runs.size() << " runs, artifacts in "
              << cfg.output_dir << '\n';
    return failed == res.runs.size() ? 1 : 0;
}

int cmd_decode(const std::string& text, std::size_t max_tokens) {
    std::cout << canonical_form(decode(parse_symbols(text, max_tokens))) << '\n';
    return 0;
}

int cmd_score(const std::string& molecule, bool selfies, const std::string& config) {
    const auto cfg = config.empty() ? ExperimentConfig{} : load_experiment(config);
    const MolecularGraph g = selfies ? decode(parse_symbols(molecule)) : parse_smiles(molecule);
    const auto report = validate(g);
    if (!report.ok()) throw ArgumentError("molecule violates valence or aromaticity rules: " + report.violations.front().message);
    const std::string key = canonical_form(g);
    const auto res = load_resources(cfg);
    auto gateway = make_gateway(cfg.docking);
    const auto resp = gateway->score_batch({{0, key}});
    if (!resp.front().ok()) throw GatewayError("docking failed: " + resp.front().error);
    const auto props = evaluate_properties(g, *res.models);
    const auto v = objectives(props, *resp.front().score, cfg.metrics);
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t k = 0; k < kObjectiveCount; ++k) obj[kObjectiveNames[k]] = v[k];
    nlohmann::json j = {{"smiles", key},
                        {"objectives", obj},
                        {"fitness", scalarize(v, cfg.metrics)},
                        {"raw",
                         {{"docking_kcal_per_mol", *resp.front().score},
                          {"sa", props.sa_raw},
                          {"qed", props.qed_value},
                          {"np", props.np_raw},
                          {"passes_filters", props.passes_filters}}}};
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_hv(const std::string& path, const std::string& ref_text) {
    const auto t = read_csv(path);
    std::vector<std::size_t> cols;
    for (const char* name : kObjectiveNames)
        if (auto c = t.column(name)) cols.push_back(*c);
    if (cols.empty())
        for (std::size_t i = 0; i < t.header.size(); ++i) cols.push_back(i);
    std::vector<Point> pts;
    for (const auto& row : t.rows) {
        Point p;
        for (std::size_t c : cols) {
            if (c >= row.size()) throw ArgumentError("short row in " + path);
            p.push_back(parse_vector(row[c]).at(0));
        }
        pts.push_back(std::move(p));
    }
    const Point ref = ref_text.empty() ? Point(cols.size(), 1.0) : parse_vector(ref_text);
    if (ref.size() != cols.size())
        throw ArgumentError("reference point has " + std::to_string(ref.size()) + " components, front has " +
                            std::to_string(cols.size()));
    std::printf("%.12g\n", hypervolume(pts, ref));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evolutionary molecule design on SELFIES genotypes"};
    app.set_version_flag("--version", MOLEVO_VERSION);
    app.require_subcommand(1);

    std::string config, mode, out, ref, molecule, front;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> repeats, generations;
    std::optional<unsigned> threads;
    bool selfies = false;
    std::size_t max_tokens = kDefaultMaxTokens;

    auto* run = app.add_subcommand("run", "Run a seeded experiment and write artifacts");
    run->add_option("config", config, "JSON configuration file (defaults apply when omitted)");
    run->add_option("--mode", mode, "single or nsga2")->check(CLI::IsMember({"single", "nsga2"}));
    run->add_option("--seed", seed, "Master seed");
    run->add_option("--out", out, "Output directory");
    run->add_option("--repeats", repeats, "Number of repeats");
    run->add_option("--generations", generations, "Generations per run");
    run->add_option("--threads", threads, "Concurrent repeats");

    auto* dec = app.add_subcommand("decode", "Decode a SELFIES string to canonical SMILES");
    dec->add_option("selfies", molecule, "SELFIES string")->required();
    dec->add_option("--max-tokens", max_tokens, "Token limit");

    auto* score = app.add_subcommand("score", "Score one molecule and print its objectives as JSON");
    score->add_option("molecule", molecule, "SMILES (or SELFIES with --selfies)")->required();
    score->add_flag("--selfies", selfies, "Input is a SELFIES string");
    score->add_option("--config", config, "Configuration supplying data files and docking backend");

    auto* hv = app.add_subcommand("hv", "Hypervolume of a front file (CSV)");
    hv->add_option("front", front, "CSV with objective columns docking,sa,qed,np,filters or all-numeric columns")->required();
    hv->add_option("--ref", ref, "Reference point, comma separated (default all ones)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) return cmd_run(config, mode, seed, out, repeats, generations, threads);
        if (*dec) return cmd_decode(molecule, max_tokens);
        if (*score) return cmd_score(molecule, selfies, config);
        if (*hv) return cmd_hv(front, ref);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
