#pragma once

/// @file smiles.hpp
/// @brief Reader for the SMILES subset emitted by canonical_form().
///
/// Supported: organic-subset atoms (B C N O P S F Cl Br I, aromatic b c n o p s),
/// bracket atoms with an optional hydrogen count (`[nH]`, `[NH2]`), bonds
/// `- = # :`, branches and ring closures (digits and `%nn`). Charges,
/// isotopes, stereo marks and disconnected parts are rejected.

#include <cctype>
#include <map>
#include <string>
#include <string_view>

#include "molevo/molgraph.hpp"

namespace molevo {

namespace detail {

struct SmilesReader {
    std::string_view text;
    std::size_t pos = 0;
    MolecularGraph g;

    [[noreturn]] void fail(const std::string& why) const {
        throw ParseError("SMILES: " + why + " at offset " + std::to_string(pos + 1), pos + 1);
    }

    std::pair<Element, bool> read_element(bool bracket) {
        static constexpr std::string_view two[] = {"Cl", "Br"};
        for (auto t : two)
            if (text.substr(pos, 2) == t) {
                pos += 2;
                return {*element_from_symbol(t), false};
            }
        const char c = text[pos];
        if (std::islower(static_cast<unsigned char>(c))) {
            const std::string up(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
            auto e = element_from_symbol(up);
            if (!e || !can_be_aromatic(*e)) fail(std::string("unknown aromatic atom '") + c + "'");
            ++pos;
            return {*e, true};
        }
        auto e = element_from_symbol(std::string(1, c));
        if (!e || (*e == Element::H && !bracket)) fail(std::string("unknown atom '") + c + "'");
        ++pos;
        return {*e, false};
    }

    int read_atom() {
        if (text[pos] == '[') {
            ++pos;
            if (pos >= text.size()) fail("unterminated bracket atom");
            auto [e, arom] = read_element(true);
            if (e == Element::H) fail("explicit hydrogen atoms are not supported");
            Atom atom{e, arom, 0, true};
            if (pos < text.size() && text[pos] == 'H') {
                ++pos;
                atom.implicit_h = 1;
                if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) atom.implicit_h = text[pos++] - '0';
            }
            if (pos >= text.size() || text[pos] != ']') fail("unsupported bracket atom content");
            ++pos;
            return g.add_atom(atom);
        }
        auto [e, arom] = read_element(false);
        return g.add_atom(e, arom);
    }

    MolecularGraph parse() {
        if (text.empty()) return {};
        int prev = -1;
        std::vector<int> branch_stack;
        std::optional<BondOrder> pending;
        struct Open {
            int atom;
            std::optional<BondOrder> order;
        };
        std::map<int, Open> rings;
        auto connect = [&](int a, int b, std::optional<BondOrder> explicit_order) {
            BondOrder order = BondOrder::Single;
            if (explicit_order) order = *explicit_order;
            else if (g.atom(a).aromatic && g.atom(b).aromatic) order = BondOrder::Aromatic;
            if (g.bond_between(a, b) || a == b) fail("duplicate bond or self-loop");
            g.add_bond(a, b, order);
        };
        while (pos < text.size()) {
            const char c = text[pos];
            if (c == '(') {
                if (prev < 0) fail("branch without preceding atom");
                branch_stack.push_back(prev);
                ++pos;
            } else if (c == ')') {
                if (branch_stack.empty()) fail("unbalanced ')'");
                prev = branch_stack.back();
                branch_stack.pop_back();
                ++pos;
            } else if (c == '-' || c == '=' || c == '#' || c == ':') {
                pending = c == '-' ? BondOrder::Single : c == '=' ? BondOrder::Double : c == '#' ? BondOrder::Triple : BondOrder::Aromatic;
                ++pos;
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
                if (prev < 0) fail("ring closure without preceding atom");
                int label;
                if (c == '%') {
                    if (pos + 2 >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos + 1])) ||
                        !std::isdigit(static_cast<unsigned char>(text[pos + 2])))
                        fail("malformed %nn ring label");
                    label = (text[pos + 1] - '0') * 10 + (text[pos + 2] - '0');
                    pos += 3;
                } else {
                    label = c - '0';
                    ++pos;
                }
                if (auto it = rings.find(label); it != rings.end()) {
                    auto order = pending ? pending : it->second.order;
                    connect(it->second.atom, prev, order);
                    rings.erase(it);
                } else {
                    rings[label] = {prev, pending};
                }
                pending.reset();
            } else if (c == '.') {
                fail("disconnected structures are not supported");
            } else {
                const int a = read_atom();
                if (prev >= 0) connect(prev, a, pending);
                else if (pending) fail("bond without preceding atom");
                pending.reset();
                prev = a;
            }
        }
        if (!branch_stack.empty()) fail("unbalanced '('");
        if (!rings.empty()) fail("unclosed ring label " + std::to_string(rings.begin()->first));
        if (pending) fail("dangling bond");
        return std::move(g);
    }
};

} // namespace detail

/// Parses `text` and sanitizes the result (aromaticity, implicit hydrogens).
/// The returned graph may still violate valence; check with validate().
inline MolecularGraph parse_smiles(std::string_view text) {
    detail::SmilesReader reader{text, 0, {}};
    MolecularGraph g = reader.parse();
    sanitize(g);
    return g;
}

} // namespace molevo
