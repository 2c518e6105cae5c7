#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace molevo;

namespace {
std::string data(const char* name) { return std::string(MOLEVO_DATA_DIR) + "/" + name; }
} // namespace

TEST(DataFiles, AlphabetMatchesBuiltIn) {
    const auto a = Alphabet::load(data("alphabet.json"));
    const auto& s = Alphabet::standard();
    ASSERT_EQ(a.size(), s.size());
    std::map<std::string, double> pa, ps;
    for (std::size_t i = 0; i < a.size(); ++i) pa[a.entries()[i].symbol.spelling()] = a.probability(i);
    for (std::size_t i = 0; i < s.size(); ++i) ps[s.entries()[i].symbol.spelling()] = s.probability(i);
    for (const auto& [k, v] : ps) EXPECT_NEAR(pa.at(k), v, 1e-15) << k;
}

TEST(DataFiles, DesirabilityMatchesBuiltIn) {
    const auto p = DesirabilityParams::load(data("qed_params.json"));
    const auto d = DesirabilityParams::defaults();
    for (std::size_t k = 0; k < kDesirabilityCount; ++k)
        for (double x : {0.0, 1.0, 3.0, 50.0, 300.0}) EXPECT_EQ(p.fns[k](x), d.fns[k](x)) << kDesirabilityNames[k];
}

TEST(DataFiles, FiltersMatchBuiltIn) {
    const auto f = load_alerts(data("filters.json"));
    ASSERT_EQ(f.size(), default_alerts().size());
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        const auto g = oracle::random_molecule(rng);
        EXPECT_EQ(filters(g, f), filters(g));
    }
}

TEST(DataFiles, ContributionTablesMatchBuiltIn) {
    EXPECT_EQ(ContributionTable::load(data("alogp.json")).atoms, default_alogp_table().atoms);
    EXPECT_EQ(ContributionTable::load(data("alogp.json")).hydrogens, default_alogp_table().hydrogens);
    EXPECT_EQ(ContributionTable::load(data("psa.json")).atoms, default_psa_table().atoms);
}

TEST(DataFiles, FragmentTablesMatchBuiltIn) {
    const auto np = FragmentTable::load(data("np_fragments.json"));
    ASSERT_EQ(np.scores.size(), default_np_table().scores.size());
    for (const auto& [k, v] : default_np_table().scores) EXPECT_NEAR(np.scores.at(k), v, 1e-15) << k;
    EXPECT_TRUE(FragmentTable::load(data("sa_fragments.json")).scores.empty());
}

TEST(DataFiles, ExampleConfigLoads) {
    const auto c = load_experiment(data("example_config.json"));
    EXPECT_EQ(c.mode, Mode::Nsga2);
    EXPECT_EQ(c.nsga2_mu, 20u);
    const auto res = load_resources(c);
    EXPECT_EQ(res.alphabet->size(), Alphabet::standard().size());
    const auto refs = load_reference_molecules(c.reference_molecules);
    ASSERT_EQ(refs.size(), 2u);
    for (const auto& r : refs) EXPECT_TRUE(validate(parse_smiles(r.smiles)).ok()) << r.name;
}

TEST(DataFiles, MalformedFilesAreConfigErrors) {
    EXPECT_THROW(Alphabet::load(data("missing.json")), ConfigError);
    EXPECT_THROW(load_alerts(data("reference_molecules.csv")), ConfigError);
    EXPECT_THROW(FragmentTable::load(data("reference_molecules.csv")), ConfigError);
}
