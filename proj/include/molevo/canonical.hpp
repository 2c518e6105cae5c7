#pragma once

/// @file canonical.hpp
/// @brief Relabeling-invariant SMILES emission used as the phenotype key.
///
/// Atoms are ranked by iterated neighbourhood refinement (Morgan style) on
/// element, aromaticity, degree, hydrogens and bond types. Remaining ties are
/// broken by individualizing one atom of the lowest tied class and refining
/// again. The string is then written by a depth-first walk that starts at
/// rank 0 and visits neighbours in rank order.

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "molevo/molgraph.hpp"
#include "molevo/validate.hpp"

namespace molevo {

namespace detail {

inline int bond_code(const Bond& b) { return static_cast<int>(b.order); }

/// Dense ranks 0..k-1 from arbitrary comparable keys.
template <class Key>
std::vector<int> dense_ranks(const std::vector<Key>& keys) {
    std::vector<int> order(keys.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int l, int r) { return keys[static_cast<std::size_t>(l)] < keys[static_cast<std::size_t>(r)]; });
    std::vector<int> ranks(keys.size(), 0);
    int r = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i > 0 && keys[static_cast<std::size_t>(order[i - 1])] < keys[static_cast<std::size_t>(order[i])]) ++r;
        ranks[static_cast<std::size_t>(order[i])] = r;
    }
    return ranks;
}

inline int distinct(const std::vector<int>& ranks) {
    return ranks.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end()) + 1;
}

inline std::vector<int> refine(const MolecularGraph& g, std::vector<int> ranks) {
    int classes = distinct(ranks);
    while (true) {
        std::vector<std::vector<int>> sig(g.size());
        for (std::size_t v = 0; v < g.size(); ++v) {
            auto& s = sig[v];
            s.push_back(ranks[v]);
            std::vector<int> nb;
            for (const auto& adj : g.neighbors(static_cast<int>(v)))
                nb.push_back(ranks[static_cast<std::size_t>(adj.atom)] * 8 + bond_code(g.bond(adj.bond)));
            std::sort(nb.begin(), nb.end());
            s.insert(s.end(), nb.begin(), nb.end());
        }
        auto next = dense_ranks(sig);
        const int next_classes = distinct(next);
        ranks = std::move(next);
        if (next_classes == classes) return ranks;
        classes = next_classes;
    }
}

} // namespace detail

/// Canonical atom ranks: a permutation of 0..n-1.
inline std::vector<int> canonical_ranks(const MolecularGraph& g) {
    const auto n = g.size();
    if (n == 0) return {};
    const auto rings = detail::cycle_bonds(g, [](const Bond&) { return true; });
    std::vector<std::array<int, 8>> keys(n);
    for (std::size_t v = 0; v < n; ++v) {
        const auto& a = g.atom(static_cast<int>(v));
        int dbl = 0, tpl = 0, aro = 0, ring = 0;
        for (const auto& adj : g.neighbors(static_cast<int>(v))) {
            const auto o = g.bond(adj.bond).order;
            dbl += o == BondOrder::Double;
            tpl += o == BondOrder::Triple;
            aro += o == BondOrder::Aromatic;
            ring += rings[static_cast<std::size_t>(adj.bond)];
        }
        keys[v] = {static_cast<int>(a.element), a.aromatic ? 1 : 0, g.degree(static_cast<int>(v)), a.implicit_h, ring, dbl, tpl, aro};
    }
    auto ranks = detail::refine(g, detail::dense_ranks(keys));
    while (detail::distinct(ranks) < static_cast<int>(n)) {
        // Lowest rank shared by several atoms.
        std::vector<int> count(n, 0);
        for (int r : ranks) ++count[static_cast<std::size_t>(r)];
        int tied = 0;
        while (count[static_cast<std::size_t>(tied)] < 2) ++tied;
        int chosen = -1;
        for (std::size_t v = 0; v < n && chosen < 0; ++v)
            if (ranks[v] == tied) chosen = static_cast<int>(v);
        std::vector<int> split(n);
        for (std::size_t v = 0; v < n; ++v) split[v] = ranks[v] * 2 + ((ranks[v] == tied && static_cast<int>(v) != chosen) ? 1 : 0);
        ranks = detail::refine(g, detail::dense_ranks(split));
    }
    return ranks;
}

namespace detail {

inline std::string atom_token(const MolecularGraph& g, int i) {
    const auto& a = g.atom(i);
    std::string sym(symbol(a.element));
    if (a.aromatic) sym[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(sym[0])));
    const bool aromatic_heteroatom = a.aromatic && a.element != Element::C;
    const int implied = aromatic_heteroatom ? 0 : std::max(0, max_valence(a.element) - g.bond_valence(i));
    if (a.implicit_h == implied) return sym;
    std::string out = "[" + sym;
    if (a.implicit_h > 0) out += "H";
    if (a.implicit_h > 1) out += std::to_string(a.implicit_h);
    return out + "]";
}

inline std::string bond_token(const MolecularGraph& g, const Bond& b) {
    switch (b.order) {
    case BondOrder::Aromatic: return "";
    case BondOrder::Double: return "=";
    case BondOrder::Triple: return "#";
    case BondOrder::Single: return (g.atom(b.a).aromatic && g.atom(b.b).aromatic) ? "-" : "";
    }
    return "";
}

class SmilesWriter {
  public:
    SmilesWriter(const MolecularGraph& g, const std::vector<int>& ranks)
        : g_(g), ranks_(ranks), order_(g.size(), -1), parent_bond_(g.size(), -1), closures_(g.size()) {}

    std::string write() {
        std::vector<int> starts(g_.size());
        for (std::size_t i = 0; i < starts.size(); ++i) starts[i] = static_cast<int>(i);
        std::sort(starts.begin(), starts.end(), [&](int l, int r) { return ranks_[static_cast<std::size_t>(l)] < ranks_[static_cast<std::size_t>(r)]; });
        std::string out;
        for (int s : starts) {
            if (order_[static_cast<std::size_t>(s)] != -1) continue;
            roots_.push_back(s);
            explore(s);
        }
        used_labels_.clear();
        for (std::size_t i = 0; i < roots_.size(); ++i) {
            if (i > 0) out += '.';
            emit(roots_[i], out);
        }
        return out;
    }

  private:
    std::vector<Adjacent> sorted_neighbors(int v) const {
        std::vector<Adjacent> nb(g_.neighbors(v).begin(), g_.neighbors(v).end());
        std::sort(nb.begin(), nb.end(), [&](const Adjacent& l, const Adjacent& r) {
            return ranks_[static_cast<std::size_t>(l.atom)] < ranks_[static_cast<std::size_t>(r.atom)];
        });
        return nb;
    }

    void explore(int v) {
        order_[static_cast<std::size_t>(v)] = counter_++;
        for (const auto& adj : sorted_neighbors(v)) {
            if (adj.bond == parent_bond_[static_cast<std::size_t>(v)]) continue;
            if (order_[static_cast<std::size_t>(adj.atom)] == -1) {
                parent_bond_[static_cast<std::size_t>(adj.atom)] = adj.bond;
                children_[v].push_back(adj);
                explore(adj.atom);
            } else if (order_[static_cast<std::size_t>(adj.atom)] < order_[static_cast<std::size_t>(v)] &&
                       !is_closure(adj.bond)) {
                // back edge to an ancestor: opened at the ancestor, closed here
                closures_[static_cast<std::size_t>(adj.atom)].push_back({adj.bond, true});
                closures_[static_cast<std::size_t>(v)].push_back({adj.bond, false});
                closure_bonds_.push_back(adj.bond);
            }
        }
    }

    bool is_closure(int bond) const {
        return std::find(closure_bonds_.begin(), closure_bonds_.end(), bond) != closure_bonds_.end();
    }

    int take_label() {
        int l = 1;
        while (used_labels_.count(l)) ++l;
        used_labels_.insert(l);
        return l;
    }

    static std::string label_text(int l) { return l < 10 ? std::to_string(l) : "%" + std::to_string(l); }

    void emit(int v, std::string& out) {
        out += atom_token(g_, v);
        auto& cl = closures_[static_cast<std::size_t>(v)];
        // Closings first (in the order their partners were visited), then openings by partner rank.
        std::vector<std::pair<int, int>> closing, opening; // (sort key, bond)
        for (const auto& [bond, open] : cl) {
            const int partner = g_.bond(bond).other(v);
            if (open) opening.emplace_back(ranks_[static_cast<std::size_t>(partner)], bond);
            else closing.emplace_back(order_[static_cast<std::size_t>(partner)], bond);
        }
        std::sort(closing.begin(), closing.end());
        std::sort(opening.begin(), opening.end());
        for (const auto& [key, bond] : closing) {
            const int label = labels_.at(bond);
            out += label_text(label);
            used_labels_.erase(label);
        }
        for (const auto& [key, bond] : opening) {
            const int label = take_label();
            labels_[bond] = label;
            out += bond_token(g_, g_.bond(bond)) + label_text(label);
        }
        const auto& kids = children_[v];
        for (std::size_t i = 0; i < kids.size(); ++i) {
            const bool branch = i + 1 < kids.size();
            if (branch) out += '(';
            out += bond_token(g_, g_.bond(kids[i].bond));
            emit(kids[i].atom, out);
            if (branch) out += ')';
        }
    }

    const MolecularGraph& g_;
    const std::vector<int>& ranks_;
    std::vector<int> order_;
    std::vector<int> parent_bond_;
    std::vector<std::vector<std::pair<int, bool>>> closures_;
    std::vector<int> closure_bonds_;
    std::map<int, std::vector<Adjacent>> children_;
    std::map<int, int> labels_;
    std::set<int> used_labels_;
    std::vector<int> roots_;
    int counter_ = 0;
};

} // namespace detail

/// Canonical SMILES of a valid graph. Isomorphic graphs yield identical keys.
/// @throws ContractViolation if `g` fails validate().
inline std::string canonical_form(const MolecularGraph& g) {
    if (const auto report = validate(g); !report.ok())
        throw ContractViolation("canonical_form: invalid graph: " + report.violations.front().message);
    if (g.empty()) return "";
    const auto ranks = canonical_ranks(g);
    return detail::SmilesWriter(g, ranks).write();
}

} // namespace molevo
