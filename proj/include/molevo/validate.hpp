#pragma once

/// @file validate.hpp
/// @brief Structural and valence checks for MolecularGraph.

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "molevo/molgraph.hpp"

namespace molevo {

struct Violation {
    enum class Kind { Valence, SelfLoop, DuplicateBond, AromaticEndpoint, AromaticOffCycle, KekuleOrder, LoneAromaticAtom, NegativeHydrogens };
    Kind kind;
    int index; // atom index, or bond index for bond-level problems
    std::string message;
};

struct ValidityReport {
    std::vector<Violation> violations;
    [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
    [[nodiscard]] std::size_t count(Violation::Kind k) const {
        std::size_t c = 0;
        for (const auto& v : violations) c += (v.kind == k);
        return c;
    }
};

inline ValidityReport validate(const MolecularGraph& g) {
    ValidityReport report;
    auto add = [&](Violation::Kind k, int idx, std::string msg) { report.violations.push_back({k, idx, std::move(msg)}); };

    std::set<std::pair<int, int>> seen;
    for (std::size_t b = 0; b < g.bond_count(); ++b) {
        const auto& bond = g.bond(static_cast<int>(b));
        const int id = static_cast<int>(b);
        if (bond.a == bond.b) {
            add(Violation::Kind::SelfLoop, id, "bond " + std::to_string(id) + " is a self-loop");
            continue;
        }
        if (!seen.insert(std::minmax(bond.a, bond.b)).second)
            add(Violation::Kind::DuplicateBond, id, "bond " + std::to_string(id) + " duplicates an earlier bond");
        if (bond.order == BondOrder::Aromatic) {
            if (!g.atom(bond.a).aromatic || !g.atom(bond.b).aromatic)
                add(Violation::Kind::AromaticEndpoint, id, "aromatic bond " + std::to_string(id) + " has a non-aromatic endpoint");
            if (bond.kekule != 1 && bond.kekule != 2)
                add(Violation::Kind::KekuleOrder, id, "aromatic bond " + std::to_string(id) + " has Kekule order " + std::to_string(bond.kekule));
        }
    }

    const auto cyc = detail::cycle_bonds(g, [](const Bond& b) { return b.order == BondOrder::Aromatic; });
    for (std::size_t b = 0; b < g.bond_count(); ++b) {
        const auto& bond = g.bond(static_cast<int>(b));
        if (bond.order == BondOrder::Aromatic && bond.a != bond.b && !cyc[b])
            add(Violation::Kind::AromaticOffCycle, static_cast<int>(b), "aromatic bond " + std::to_string(b) + " is not on an aromatic cycle");
    }

    for (std::size_t v = 0; v < g.size(); ++v) {
        const int i = static_cast<int>(v);
        const auto& atom = g.atom(i);
        if (atom.implicit_h < 0) add(Violation::Kind::NegativeHydrogens, i, "atom " + std::to_string(i) + " has negative hydrogen count");
        const int used = g.bond_valence(i) + atom.implicit_h;
        if (used > max_valence(atom.element))
            add(Violation::Kind::Valence, i,
                "atom " + std::to_string(i) + " (" + std::string(symbol(atom.element)) + ") uses valence " + std::to_string(used) +
                    " > " + std::to_string(max_valence(atom.element)));
        if (atom.aromatic) {
            bool any = false;
            for (const auto& adj : g.neighbors(i)) any = any || g.bond(adj.bond).order == BondOrder::Aromatic;
            if (!any) add(Violation::Kind::LoneAromaticAtom, i, "aromatic atom " + std::to_string(i) + " has no aromatic bond");
        }
    }
    return report;
}

} // namespace molevo
