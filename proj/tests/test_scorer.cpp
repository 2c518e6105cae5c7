#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"

using namespace molevo;
namespace fs = std::filesystem;

namespace {

DockingConfig mock_config(std::vector<std::string> extra, double timeout = 5) {
    DockingConfig c;
    c.backend = DockingBackend::External;
    c.executable = MOLEVO_MOCK_SCORER;
    c.grid_center = {{-10.7, 12.4, 68.9}};
    c.timeout = timeout;
    c.extra_args = std::move(extra);
    return c;
}

std::string fixture() { return std::string(MOLEVO_FIXTURE_DIR) + "/mock_scores.json"; }

std::vector<ScoreRequest> requests(std::size_t n) {
    std::vector<ScoreRequest> r;
    for (std::size_t i = 0; i < n; ++i) r.push_back({static_cast<long long>(1000 + 7 * i), std::string(i % 5 + 1, 'C')});
    return r;
}

struct CaptureWarnings {
    std::vector<std::string> seen;
    WarningSink prev;
    CaptureWarnings() {
        prev = set_warning_sink([this](const std::string& m) { seen.push_back(m); });
    }
    ~CaptureWarnings() { set_warning_sink(prev); }
};

} // namespace

TEST(Surrogate, FormulaAndOrdering) {
    const double methane = surrogate_score(parse_smiles("C"));
    EXPECT_GT(methane, -2.0);
    EXPECT_LE(methane, 0.0);
    EXPECT_NEAR(methane, -(0.004 * 16.043) - 1.0, 1e-3);
    EXPECT_LT(surrogate_score(parse_smiles("c1ccccc1")), methane);
    EXPECT_EQ(surrogate_score(parse_smiles("CCO")), surrogate_score(parse_smiles("OCC")));
}

TEST(Surrogate, ClampedToRange) {
    DescriptorSet d;
    d.arom = 100;
    EXPECT_EQ(surrogate_score(d), -15.0);
    d = {};
    d.rotb = 1000;
    EXPECT_EQ(surrogate_score(d), 1.0);
}

TEST(Surrogate, PermutationInvariant) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        const auto g = oracle::random_molecule(rng);
        EXPECT_NEAR(surrogate_score(g), surrogate_score(oracle::shuffled(g, rng)), 1e-12);
    }
}

TEST(SurrogateGatewayTest, PreservesIds) {
    SurrogateGateway gw;
    const std::vector<ScoreRequest> req = {{5, "C"}, {2, "CCO"}, {9, "c1ccccc1"}};
    const auto resp = gw.score_batch(req);
    ASSERT_EQ(resp.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(resp[i].id, req[i].id);
        ASSERT_TRUE(resp[i].ok());
        EXPECT_EQ(*resp[i].score, surrogate_score(parse_smiles(req[i].smiles)));
    }
}

TEST(SurrogateGatewayTest, BadMoleculeIsPerIdError) {
    SurrogateGateway gw;
    const auto resp = gw.score_batch({{1, "C"}, {2, "C(("}});
    EXPECT_TRUE(resp[0].ok());
    EXPECT_FALSE(resp[1].ok());
    EXPECT_FALSE(resp[1].error.empty());
}

TEST(SurrogateGatewayTest, DuplicateIdsRejected) {
    SurrogateGateway gw;
    EXPECT_THROW(gw.score_batch({{1, "C"}, {1, "CC"}}), ArgumentError);
}

TEST(DockingConfigTest, DefaultsAndValidation) {
    DockingConfig c;
    EXPECT_EQ(c.receptor, "6LU7");
    EXPECT_EQ(c.grid_size, (std::array<double, 3>{22, 24, 22}));
    EXPECT_EQ(c.exhaustiveness, 8);
    EXPECT_NO_THROW(c.validate());
    c.grid_size[1] = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = DockingConfig{};
    c.exhaustiveness = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = DockingConfig{};
    c.backend = DockingBackend::External;
    c.executable = "x";
    EXPECT_THROW(c.validate(), ConfigError); // no grid center
}

TEST(DockingConfigTest, JsonRoundTrip) {
    auto c = mock_config({"--fixture", "f.json"});
    nlohmann::json j = c;
    const auto back = j.get<DockingConfig>();
    EXPECT_EQ(back.executable, c.executable);
    EXPECT_EQ(back.extra_args, c.extra_args);
    EXPECT_EQ(*back.grid_center, *c.grid_center);
    EXPECT_EQ(back.backend, DockingBackend::External);
    j["backend"] = "vina";
    EXPECT_THROW(j.get<DockingConfig>(), ConfigError);
}

TEST(ExternalGatewayTest, FixtureScores) {
    ExternalGateway gw(mock_config({"--fixture", fixture()}));
    const std::vector<ScoreRequest> req = {{3, "C"}, {1, "CCO"}, {8, "c1ccccc1"}, {4, "CCCC"}};
    const auto resp = gw.score_batch(req);
    ASSERT_EQ(resp.size(), 4u);
    const double expect[] = {-1.25, -2.5, -4.75, -3.5};
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(resp[i].id, req[i].id);
        ASSERT_TRUE(resp[i].ok()) << resp[i].error;
        EXPECT_EQ(*resp[i].score, expect[i]);
    }
    EXPECT_TRUE(gw.running());
    // the process is reused across batches
    const auto again = gw.score_batch({{77, "C"}});
    EXPECT_EQ(*again[0].score, -1.25);
}

TEST(ExternalGatewayTest, FiftyRequestsIdMatched) {
    ExternalGateway gw(mock_config({}));
    const auto req = requests(50);
    const auto resp = gw.score_batch(req);
    ASSERT_EQ(resp.size(), 50u);
    for (std::size_t i = 0; i < 50; ++i) {
        EXPECT_EQ(resp[i].id, req[i].id);
        ASSERT_TRUE(resp[i].ok());
        EXPECT_EQ(*resp[i].score, surrogate_score(parse_smiles(req[i].smiles)));
    }
}

TEST(ExternalGatewayTest, ReceivesDockingParameters) {
    const fs::path out = fs::temp_directory_path() / ("molevo_args_" + std::to_string(::getpid()) + ".txt");
    auto cfg = mock_config({"--args-out", out.string()});
    cfg.exhaustiveness = 16;
    {
        ExternalGateway gw(cfg);
        gw.score_batch({{1, "C"}});
    }
    std::ifstream in(out);
    std::vector<std::string> args;
    for (std::string l; std::getline(in, l);) args.push_back(l);
    fs::remove(out);
    const std::vector<std::string> expect = {"--receptor", "6LU7",  "--center",         "-10.699999999999999,12.4,68.900000000000006",
                                             "--size",     "22,24,22", "--exhaustiveness", "16",
                                             "--args-out", out.string()};
    EXPECT_EQ(args, expect);
}

TEST(ExternalGatewayTest, DeathMidBatchYieldsErrors) {
    CaptureWarnings w;
    ExternalGateway gw(mock_config({"--die-after", "20"}, 3));
    const auto req = requests(50);
    const auto t0 = std::chrono::steady_clock::now();
    const auto resp = gw.score_batch(req);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(secs, 3.5);
    ASSERT_EQ(resp.size(), 50u);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < 50; ++i) {
        EXPECT_EQ(resp[i].id, req[i].id);
        ok += resp[i].ok();
        if (!resp[i].ok()) { EXPECT_FALSE(resp[i].error.empty()); }
    }
    EXPECT_EQ(ok, 20u);
    EXPECT_FALSE(gw.running());
    EXPECT_FALSE(w.seen.empty());
    // restarted on the next batch
    const auto next = gw.score_batch({{1, "C"}});
    EXPECT_TRUE(next[0].ok());
}

TEST(ExternalGatewayTest, HangTimesOut) {
    CaptureWarnings w;
    ExternalGateway gw(mock_config({"--hang-after", "5"}, 1.0));
    const auto t0 = std::chrono::steady_clock::now();
    const auto resp = gw.score_batch(requests(12));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_GE(secs, 0.9);
    EXPECT_LT(secs, 2.5);
    std::size_t ok = 0;
    for (const auto& r : resp) ok += r.ok();
    EXPECT_EQ(ok, 5u);
    EXPECT_FALSE(gw.running());
}

TEST(ExternalGatewayTest, MalformedLinesAndPerIdErrors) {
    CaptureWarnings w;
    ExternalGateway gw(mock_config({"--garbage-first", "--error-on", "CC"}));
    const auto resp = gw.score_batch({{1, "C"}, {2, "CC"}, {3, "CCC"}});
    EXPECT_TRUE(resp[0].ok());
    EXPECT_FALSE(resp[1].ok());
    EXPECT_EQ(resp[1].error, "mock failure");
    EXPECT_TRUE(resp[2].ok());
    EXPECT_TRUE(gw.running());
    bool malformed = false;
    for (const auto& m : w.seen) malformed = malformed || m.find("malformed") != std::string::npos;
    EXPECT_TRUE(malformed);
}

TEST(ExternalGatewayTest, SpawnFailureIsGatewayError) {
    auto cfg = mock_config({});
    cfg.executable = "/nonexistent/docking-tool";
    ExternalGateway gw(cfg);
    EXPECT_THROW(gw.score_batch({{1, "C"}}), GatewayError);
}

TEST(ExternalGatewayTest, EmptyBatch) {
    ExternalGateway gw(mock_config({}));
    EXPECT_TRUE(gw.score_batch({}).empty());
}

TEST(MakeGateway, SelectsBackend) {
    EXPECT_NE(dynamic_cast<SurrogateGateway*>(make_gateway(DockingConfig{}).get()), nullptr);
    EXPECT_NE(dynamic_cast<ExternalGateway*>(make_gateway(mock_config({})).get()), nullptr);
}
