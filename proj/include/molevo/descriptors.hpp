#pragma once

/// @file descriptors.hpp
/// @brief Molecular descriptors feeding the drug-likeness and surrogate scores.
///
/// ALogP and PSA are additive over atom environments. An environment key is
/// `<symbol>H<h>D<degree>[=|#]`: symbol lowercase when aromatic, `h` implicit
/// hydrogens, `degree` heavy neighbours, and a suffix for the highest
/// non-aromatic bond order above one (e.g. `OH1D1`, `OH0D1=`, `nH0D2`).
/// Lookups fall back to the bare symbol (`O`, `n`) and then to zero.

#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "molevo/alerts.hpp"
#include "molevo/molgraph.hpp"

namespace molevo {

struct DescriptorSet {
    double mw = 0;    // Da
    double alogp = 0; // unitless
    int hbd = 0;
    int hba = 0;
    double psa = 0; // A^2
    int rotb = 0;
    int arom = 0;
    int alerts = 0;
    int ring_count = 0;
    int heavy_atoms = 0;
};

inline std::string atom_environment(const MolecularGraph& g, int i) {
    const auto& a = g.atom(i);
    std::string key(symbol(a.element));
    if (a.aromatic) key[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(key[0])));
    int top = 1;
    for (const auto& adj : g.neighbors(i)) {
        const auto o = g.bond(adj.bond).order;
        if (o == BondOrder::Double) top = std::max(top, 2);
        if (o == BondOrder::Triple) top = std::max(top, 3);
    }
    key += "H" + std::to_string(a.implicit_h) + "D" + std::to_string(g.degree(i));
    if (top == 2) key += "=";
    if (top == 3) key += "#";
    return key;
}

inline std::string bare_symbol(const Atom& a) {
    std::string s(symbol(a.element));
    if (a.aromatic) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    return s;
}

/// Additive contribution table keyed by atom environment, plus optional
/// per-hydrogen contributions keyed by the bearing element's bare symbol.
struct ContributionTable {
    std::map<std::string, double> atoms;
    std::map<std::string, double> hydrogens;

    [[nodiscard]] double atom_value(const MolecularGraph& g, int i) const {
        if (auto it = atoms.find(atom_environment(g, i)); it != atoms.end()) return it->second;
        if (auto it = atoms.find(bare_symbol(g.atom(i))); it != atoms.end()) return it->second;
        return 0.0;
    }

    [[nodiscard]] double hydrogen_value(const Atom& a) const {
        if (auto it = hydrogens.find(std::string(symbol(a.element))); it != hydrogens.end()) return it->second;
        if (auto it = hydrogens.find("*"); it != hydrogens.end()) return it->second;
        return 0.0;
    }

    [[nodiscard]] double sum(const MolecularGraph& g) const {
        double total = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            total += atom_value(g, static_cast<int>(i));
            total += g.atom(static_cast<int>(i)).implicit_h * hydrogen_value(g.atom(static_cast<int>(i)));
        }
        return total;
    }

    [[nodiscard]] nlohmann::json to_json() const { return {{"atoms", atoms}, {"hydrogens", hydrogens}}; }

    static ContributionTable from_json(const nlohmann::json& j) {
        ContributionTable t;
        if (j.contains("atoms")) t.atoms = j.at("atoms").get<std::map<std::string, double>>();
        if (j.contains("hydrogens")) t.hydrogens = j.at("hydrogens").get<std::map<std::string, double>>();
        return t;
    }

    static ContributionTable load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open contribution table: " + path);
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("contribution table " + path + ": " + e.what());
        }
    }
};

/// Crippen-style atom contributions, coarsened to environment keys.
inline const ContributionTable& default_alogp_table() {
    static const ContributionTable t{
        {
            {"CH4D0", 0.1441}, {"CH3D1", 0.1441}, {"CH2D2", 0.1441}, {"CH1D3", 0.0}, {"CH0D4", 0.0},
            {"CH2D1=", 0.1551}, {"CH1D2=", 0.1551}, {"CH0D3=", 0.08}, {"CH0D2=", 0.08},
            {"CH1D1#", 0.0017}, {"CH0D2#", 0.0017},
            {"cH1D2", 0.1581}, {"cH0D3", 0.2955}, {"C", 0.1}, {"c", 0.2},
            {"NH2D1", -1.0190}, {"NH1D2", -0.7096}, {"NH0D3", -0.3187}, {"NH0D2=", -0.4806},
            {"NH1D1=", -0.4806}, {"NH0D1#", -0.2605}, {"nH0D2", -0.4806}, {"nH1D2", -0.4806},
            {"nH0D3", -0.3187}, {"N", -0.5}, {"n", -0.48},
            {"OH1D1", -0.2893}, {"OH0D2", -0.0684}, {"OH0D1=", -0.1526}, {"oH0D2", 0.1552},
            {"O", -0.2}, {"o", 0.155},
            {"F", 0.4202}, {"Cl", 0.6895}, {"Br", 0.8456}, {"I", 0.8857},
            {"SH1D1", 0.6482}, {"SH0D2", 0.6482}, {"SH0D1=", 0.6237}, {"sH0D2", 0.6237}, {"S", 0.6}, {"s", 0.62},
        },
        {{"C", 0.1230}, {"N", 0.2142}, {"O", -0.2677}, {"S", 0.1230}, {"*", 0.1230}},
    };
    return t;
}

/// Topological polar surface area contributions for N and O environments.
inline const ContributionTable& default_psa_table() {
    static const ContributionTable t{
        {
            {"NH0D3", 3.24}, {"NH0D2=", 12.36}, {"NH0D1#", 23.79}, {"NH1D2", 12.03}, {"NH1D1=", 23.85},
            {"NH2D1", 26.02}, {"NH3D0", 34.0}, {"nH0D2", 12.89}, {"nH0D3", 4.41}, {"nH1D2", 15.79},
            {"N", 12.03}, {"n", 12.89},
            {"OH0D2", 9.23}, {"OH0D1=", 17.07}, {"OH1D1", 20.23}, {"OH2D0", 20.23}, {"oH0D2", 13.14},
            {"O", 9.23}, {"o", 13.14},
        },
        {},
    };
    return t;
}

struct DescriptorTables {
    ContributionTable alogp = default_alogp_table();
    ContributionTable psa = default_psa_table();
    std::vector<SubstructurePattern> alerts = default_alerts();
};

inline const DescriptorTables& default_descriptor_tables() {
    static const DescriptorTables t{};
    return t;
}

/// Rotatable bond: non-ring single bond between atoms with >= 2 heavy neighbours each.
inline int rotatable_bonds(const MolecularGraph& g, const RingInfo& rings) {
    int n = 0;
    for (std::size_t b = 0; b < g.bond_count(); ++b) {
        const auto& bond = g.bond(static_cast<int>(b));
        if (bond.order != BondOrder::Single || rings.ring_bond[b]) continue;
        if (g.degree(bond.a) >= 2 && g.degree(bond.b) >= 2) ++n;
    }
    return n;
}

inline int aromatic_ring_count(const MolecularGraph& g, const RingInfo& rings) {
    int n = 0;
    for (const auto& ring : rings.ring_atoms) {
        bool all = true;
        for (int a : ring) all = all && g.atom(a).aromatic;
        n += all ? 1 : 0;
    }
    return n;
}

/// Heavy-atom hydrogen-bond donors: N or O bearing at least one hydrogen.
inline int hbond_donors(const MolecularGraph& g) {
    int n = 0;
    for (const auto& a : g.atoms())
        if ((a.element == Element::N || a.element == Element::O) && a.implicit_h > 0) ++n;
    return n;
}

/// Acceptors: O, F, and N except pyrrole-type aromatic N ([nH] or three-connected).
inline int hbond_acceptors(const MolecularGraph& g) {
    int n = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& a = g.atom(static_cast<int>(i));
        if (a.element == Element::O || a.element == Element::F) ++n;
        else if (a.element == Element::N) {
            const bool pyrrole_type = a.aromatic && (a.implicit_h > 0 || g.degree(static_cast<int>(i)) >= 3);
            if (!pyrrole_type) ++n;
        }
    }
    return n;
}

inline double molecular_weight(const MolecularGraph& g) {
    double mw = 0;
    for (const auto& a : g.atoms()) mw += atomic_mass(a.element) + a.implicit_h * atomic_mass(Element::H);
    return mw;
}

inline DescriptorSet descriptors(const MolecularGraph& g, const RingInfo& rings, const DescriptorTables& tables) {
    DescriptorSet d;
    d.heavy_atoms = static_cast<int>(g.size());
    d.mw = molecular_weight(g);
    d.alogp = tables.alogp.sum(g);
    d.psa = tables.psa.sum(g);
    d.hbd = hbond_donors(g);
    d.hba = hbond_acceptors(g);
    d.rotb = rotatable_bonds(g, rings);
    d.arom = aromatic_ring_count(g, rings);
    d.ring_count = static_cast<int>(rings.ring_count());
    d.alerts = count_alerts(MatchTarget(g), tables.alerts);
    return d;
}

inline DescriptorSet descriptors(const MolecularGraph& g, const DescriptorTables& tables = default_descriptor_tables()) {
    return descriptors(g, perceive_rings(g), tables);
}

} // namespace molevo
