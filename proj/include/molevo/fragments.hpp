#pragma once

/// @file fragments.hpp
/// @brief Atom-centred fragment signatures and fragment score tables.
///
/// A signature is the centre atom's environment key followed by the sorted
/// (bond, neighbour environment) pairs of its direct neighbours, e.g.
/// `cH0D3|:cH1D2|:cH1D2|-OH1D1`.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "molevo/descriptors.hpp"

namespace molevo {

inline std::string fragment_signature(const MolecularGraph& g, int centre) {
    std::vector<std::string> parts;
    for (const auto& adj : g.neighbors(centre)) {
        const auto o = g.bond(adj.bond).order;
        const char* b = o == BondOrder::Aromatic ? ":" : o == BondOrder::Double ? "=" : o == BondOrder::Triple ? "#" : "-";
        parts.push_back(b + atom_environment(g, adj.atom));
    }
    std::sort(parts.begin(), parts.end());
    std::string sig = atom_environment(g, centre);
    for (const auto& p : parts) sig += "|" + p;
    return sig;
}

inline std::vector<std::string> fragment_signatures(const MolecularGraph& g) {
    std::vector<std::string> out;
    out.reserve(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out.push_back(fragment_signature(g, static_cast<int>(i)));
    return out;
}

/// Signature -> score. Unknown signatures score zero.
struct FragmentTable {
    std::map<std::string, double> scores;

    [[nodiscard]] double lookup(const std::string& sig) const {
        auto it = scores.find(sig);
        return it == scores.end() ? 0.0 : it->second;
    }

    /// Mean contribution over atoms (0 for an empty graph).
    [[nodiscard]] double mean_score(const MolecularGraph& g) const {
        if (g.empty()) return 0.0;
        double s = 0;
        for (const auto& sig : fragment_signatures(g)) s += lookup(sig);
        return s / static_cast<double>(g.size());
    }

    static FragmentTable load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open fragment table: " + path);
        try {
            FragmentTable t;
            t.scores = nlohmann::json::parse(in).get<std::map<std::string, double>>();
            return t;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("fragment table " + path + ": " + e.what());
        }
    }
};

/// Log-odds fragment table from two reference sets: each signature scores
/// log10(((n_a + 1) / (n_b + 1)) * (N_b / N_a)), n counting molecules that
/// contain the signature and N the set sizes.
inline FragmentTable build_log_odds_table(const std::vector<MolecularGraph>& positive,
                                          const std::vector<MolecularGraph>& negative) {
    if (positive.empty() || negative.empty()) throw ArgumentError("build_log_odds_table: reference sets must be non-empty");
    std::map<std::string, std::pair<int, int>> counts;
    for (const auto& g : positive) {
        const auto sigs = fragment_signatures(g);
        for (const auto& sig : std::set<std::string>(sigs.begin(), sigs.end())) ++counts[sig].first;
    }
    for (const auto& g : negative) {
        const auto sigs = fragment_signatures(g);
        for (const auto& sig : std::set<std::string>(sigs.begin(), sigs.end())) ++counts[sig].second;
    }
    const double ratio = static_cast<double>(negative.size()) / static_cast<double>(positive.size());
    FragmentTable t;
    for (const auto& [sig, c] : counts)
        t.scores[sig] = std::log10((c.first + 1.0) / (c.second + 1.0) * ratio);
    return t;
}

} // namespace molevo
