#pragma once

/// @file substructure.hpp
/// @brief Substructure patterns (a SMARTS subset) and embedding search.
///
/// Pattern syntax follows SMILES topology (branches, ring-closure digits).
/// Atoms: organic-subset symbols (case selects aliphatic/aromatic), `*`, `a`,
/// `A`, or a bracket expression of primitives joined by `,` (or), `&`/`;`
/// (and) and prefixed with `!` (not). Primitives: element symbols, `#n`,
/// `a`, `A`, `R` (in ring), `Hn` (total H), `Dn` (heavy degree), `*`.
/// Bonds: `-` `=` `#` `:` `~`; an omitted bond means single-or-aromatic.

#include <cctype>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "molevo/molgraph.hpp"

namespace molevo {

/// Per-atom facts used by pattern predicates.
struct AtomFacts {
    Element element;
    bool aromatic;
    bool in_ring;
    int total_h;
    int heavy_degree;
};

class AtomPredicate {
  public:
    struct Primitive {
        enum class Kind { Any, ElementIs, Aromatic, Aliphatic, InRing, HCount, Degree };
        Kind kind = Kind::Any;
        Element element = Element::C;
        int value = 0;
        std::optional<bool> aromatic; // for ElementIs
    };

    static AtomPredicate primitive(Primitive p) {
        AtomPredicate out;
        out.node_ = std::make_shared<Node>(Node{Op::Leaf, p, {}});
        return out;
    }
    static AtomPredicate any() { return primitive({}); }
    static AtomPredicate element(Element e, std::optional<bool> aromatic) {
        Primitive p;
        p.kind = Primitive::Kind::ElementIs;
        p.element = e;
        p.aromatic = aromatic;
        return primitive(p);
    }
    static AtomPredicate negate(AtomPredicate a) {
        AtomPredicate out;
        out.node_ = std::make_shared<Node>(Node{Op::Not, {}, {std::move(a)}});
        return out;
    }
    static AtomPredicate all_of(std::vector<AtomPredicate> parts) {
        AtomPredicate out;
        out.node_ = std::make_shared<Node>(Node{Op::And, {}, std::move(parts)});
        return out;
    }
    static AtomPredicate any_of(std::vector<AtomPredicate> parts) {
        AtomPredicate out;
        out.node_ = std::make_shared<Node>(Node{Op::Or, {}, std::move(parts)});
        return out;
    }

    [[nodiscard]] bool test(const AtomFacts& f) const { return eval(*node_, f); }

  private:
    enum class Op { Leaf, Not, And, Or };
    struct Node {
        Op op;
        Primitive leaf;
        std::vector<AtomPredicate> children;
    };

    static bool eval(const Node& n, const AtomFacts& f) {
        switch (n.op) {
        case Op::Leaf: return eval_leaf(n.leaf, f);
        case Op::Not: return !n.children.front().test(f);
        case Op::And:
            for (const auto& c : n.children)
                if (!c.test(f)) return false;
            return true;
        case Op::Or:
            for (const auto& c : n.children)
                if (c.test(f)) return true;
            return false;
        }
        return false;
    }

    static bool eval_leaf(const Primitive& p, const AtomFacts& f) {
        using K = Primitive::Kind;
        switch (p.kind) {
        case K::Any: return true;
        case K::ElementIs: return f.element == p.element && (!p.aromatic || *p.aromatic == f.aromatic);
        case K::Aromatic: return f.aromatic;
        case K::Aliphatic: return !f.aromatic;
        case K::InRing: return f.in_ring;
        case K::HCount: return f.total_h == p.value;
        case K::Degree: return f.heavy_degree == p.value;
        }
        return false;
    }

    std::shared_ptr<const Node> node_;
};

enum class BondPredicate { Any, Single, Double, Triple, Aromatic, SingleOrAromatic };

inline bool bond_matches(BondPredicate p, BondOrder o) {
    switch (p) {
    case BondPredicate::Any: return true;
    case BondPredicate::Single: return o == BondOrder::Single;
    case BondPredicate::Double: return o == BondOrder::Double;
    case BondPredicate::Triple: return o == BondOrder::Triple;
    case BondPredicate::Aromatic: return o == BondOrder::Aromatic;
    case BondPredicate::SingleOrAromatic: return o == BondOrder::Single || o == BondOrder::Aromatic;
    }
    return false;
}

struct PatternEdge {
    int a;
    int b;
    BondPredicate predicate;
};

struct SubstructurePattern {
    std::string name;
    std::string source;
    std::vector<AtomPredicate> nodes;
    std::vector<PatternEdge> edges;

    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
};

namespace detail {

class PatternParser {
  public:
    explicit PatternParser(std::string_view text) : text_(text) {}

    SubstructurePattern parse(std::string name) {
        SubstructurePattern p;
        p.name = std::move(name);
        p.source = std::string(text_);
        int prev = -1;
        std::vector<int> branches;
        std::optional<BondPredicate> pending;
        std::map<int, std::pair<int, std::optional<BondPredicate>>> rings;
        auto connect = [&](int a, int b, std::optional<BondPredicate> bp) {
            p.edges.push_back({a, b, bp.value_or(BondPredicate::SingleOrAromatic)});
        };
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '(') {
                if (prev < 0) fail("branch without atom");
                branches.push_back(prev);
                ++pos_;
            } else if (c == ')') {
                if (branches.empty()) fail("unbalanced ')'");
                prev = branches.back();
                branches.pop_back();
                ++pos_;
            } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '~') {
                pending = c == '-' ? BondPredicate::Single
                        : c == '=' ? BondPredicate::Double
                        : c == '#' ? BondPredicate::Triple
                        : c == ':' ? BondPredicate::Aromatic
                                   : BondPredicate::Any;
                ++pos_;
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                if (prev < 0) fail("ring closure without atom");
                const int label = c - '0';
                ++pos_;
                if (auto it = rings.find(label); it != rings.end()) {
                    connect(it->second.first, prev, pending ? pending : it->second.second);
                    rings.erase(it);
                } else {
                    rings[label] = {prev, pending};
                }
                pending.reset();
            } else if (c == '.') {
                fail("pattern must be connected");
            } else {
                p.nodes.push_back(read_atom());
                const int node = static_cast<int>(p.nodes.size()) - 1;
                if (prev >= 0) connect(prev, node, pending);
                pending.reset();
                prev = node;
            }
        }
        if (p.nodes.empty()) fail("empty pattern");
        if (!branches.empty() || !rings.empty() || pending) fail("unterminated pattern");
        return p;
    }

  private:
    [[noreturn]] void fail(const std::string& why) const {
        throw ParseError("pattern '" + std::string(text_) + "': " + why + " at offset " + std::to_string(pos_ + 1), pos_ + 1);
    }

    std::optional<AtomPredicate> read_element_symbol() {
        for (std::string_view two : {"Cl", "Br"})
            if (text_.substr(pos_, 2) == two) {
                pos_ += 2;
                return AtomPredicate::element(*element_from_symbol(two), false);
            }
        const char c = text_[pos_];
        if (std::isupper(static_cast<unsigned char>(c))) {
            if (auto e = element_from_symbol(std::string(1, c)); e && *e != Element::H) {
                ++pos_;
                return AtomPredicate::element(*e, false);
            }
        } else if (std::islower(static_cast<unsigned char>(c)) && c != 'a') {
            if (auto e = element_from_symbol(std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c))))); e && can_be_aromatic(*e)) {
                ++pos_;
                return AtomPredicate::element(*e, true);
            }
        }
        return std::nullopt;
    }

    int read_int() {
        int v = 0;
        bool any = false;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            v = v * 10 + (text_[pos_++] - '0');
            any = true;
        }
        return any ? v : -1;
    }

    AtomPredicate read_primitive() {
        using K = AtomPredicate::Primitive::Kind;
        if (pos_ >= text_.size()) fail("truncated atom expression");
        const char c = text_[pos_];
        AtomPredicate::Primitive prim;
        switch (c) {
        case '*': ++pos_; return AtomPredicate::any();
        case 'a': ++pos_; prim.kind = K::Aromatic; return AtomPredicate::primitive(prim);
        case 'A': ++pos_; prim.kind = K::Aliphatic; return AtomPredicate::primitive(prim);
        case 'R': ++pos_; prim.kind = K::InRing; return AtomPredicate::primitive(prim);
        case 'D': {
            ++pos_;
            prim.kind = K::Degree;
            const int v = read_int();
            prim.value = v < 0 ? 1 : v;
            return AtomPredicate::primitive(prim);
        }
        case 'H': {
            ++pos_;
            prim.kind = K::HCount;
            const int v = read_int();
            prim.value = v < 0 ? 1 : v;
            return AtomPredicate::primitive(prim);
        }
        case '#': {
            ++pos_;
            const int z = read_int();
            static constexpr std::pair<int, Element> numbers[] = {
                {5, Element::B}, {6, Element::C}, {7, Element::N}, {8, Element::O}, {9, Element::F},
                {15, Element::P}, {16, Element::S}, {17, Element::Cl}, {35, Element::Br}, {53, Element::I}};
            for (const auto& [num, e] : numbers)
                if (num == z) return AtomPredicate::element(e, std::nullopt);
            fail("unsupported atomic number");
        }
        default:
            if (auto e = read_element_symbol()) return *e;
            fail(std::string("unknown primitive '") + c + "'");
        }
    }

    AtomPredicate read_unary() {
        if (pos_ < text_.size() && text_[pos_] == '!') {
            ++pos_;
            return AtomPredicate::negate(read_unary());
        }
        return read_primitive();
    }

    // Precedence: implicit/& > , > ;
    AtomPredicate read_high_and() {
        std::vector<AtomPredicate> parts{read_unary()};
        while (pos_ < text_.size() && (text_[pos_] == '&' || (text_[pos_] != ',' && text_[pos_] != ';' && text_[pos_] != ']'))) {
            if (text_[pos_] == '&') ++pos_;
            parts.push_back(read_unary());
        }
        return parts.size() == 1 ? parts.front() : AtomPredicate::all_of(std::move(parts));
    }

    AtomPredicate read_or() {
        std::vector<AtomPredicate> parts{read_high_and()};
        while (pos_ < text_.size() && text_[pos_] == ',') {
            ++pos_;
            parts.push_back(read_high_and());
        }
        return parts.size() == 1 ? parts.front() : AtomPredicate::any_of(std::move(parts));
    }

    AtomPredicate read_low_and() {
        std::vector<AtomPredicate> parts{read_or()};
        while (pos_ < text_.size() && text_[pos_] == ';') {
            ++pos_;
            parts.push_back(read_or());
        }
        return parts.size() == 1 ? parts.front() : AtomPredicate::all_of(std::move(parts));
    }

    AtomPredicate read_atom() {
        if (text_[pos_] == '[') {
            ++pos_;
            auto pred = read_low_and();
            if (pos_ >= text_.size() || text_[pos_] != ']') fail("unterminated bracket expression");
            ++pos_;
            return pred;
        }
        if (text_[pos_] == '*') {
            ++pos_;
            return AtomPredicate::any();
        }
        using K = AtomPredicate::Primitive::Kind;
        if (text_[pos_] == 'a' || text_[pos_] == 'A') {
            AtomPredicate::Primitive prim;
            prim.kind = text_[pos_] == 'a' ? K::Aromatic : K::Aliphatic;
            ++pos_;
            return AtomPredicate::primitive(prim);
        }
        if (auto e = read_element_symbol()) return *e;
        fail(std::string("unknown atom '") + text_[pos_] + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline SubstructurePattern parse_pattern(std::string name, std::string_view text) {
    return detail::PatternParser(text).parse(std::move(name));
}

/// Precomputed atom facts for repeated matching against one graph.
class MatchTarget {
  public:
    explicit MatchTarget(const MolecularGraph& g) : g_(g) {
        const auto ring = detail::cycle_bonds(g, [](const Bond&) { return true; });
        std::vector<bool> ring_atom(g.size(), false);
        for (std::size_t b = 0; b < g.bond_count(); ++b)
            if (ring[b]) {
                ring_atom[static_cast<std::size_t>(g.bond(static_cast<int>(b)).a)] = true;
                ring_atom[static_cast<std::size_t>(g.bond(static_cast<int>(b)).b)] = true;
            }
        facts_.reserve(g.size());
        for (std::size_t v = 0; v < g.size(); ++v) {
            const auto& a = g.atom(static_cast<int>(v));
            facts_.push_back({a.element, a.aromatic, ring_atom[v], a.implicit_h, g.degree(static_cast<int>(v))});
        }
    }

    // the target keeps a reference to the graph
    explicit MatchTarget(MolecularGraph&&) = delete;

    [[nodiscard]] const MolecularGraph& graph() const noexcept { return g_; }
    [[nodiscard]] const AtomFacts& facts(int v) const { return facts_[static_cast<std::size_t>(v)]; }

  private:
    const MolecularGraph& g_;
    std::vector<AtomFacts> facts_;
};

namespace detail {

class Embedder {
  public:
    Embedder(const MatchTarget& t, const SubstructurePattern& p) : t_(t), p_(p) {
        const auto n = p.size();
        adj_.resize(n);
        for (std::size_t e = 0; e < p.edges.size(); ++e) {
            adj_[static_cast<std::size_t>(p.edges[e].a)].push_back(static_cast<int>(e));
            adj_[static_cast<std::size_t>(p.edges[e].b)].push_back(static_cast<int>(e));
        }
        // DFS order over the pattern; each node after the first has a mapped anchor.
        std::vector<bool> seen(n, false);
        order_.push_back(0);
        anchor_.push_back(-1);
        seen[0] = true;
        for (std::size_t i = 0; i < order_.size(); ++i) {
            const int u = order_[i];
            for (int e : adj_[static_cast<std::size_t>(u)]) {
                const int w = p.edges[static_cast<std::size_t>(e)].a == u ? p.edges[static_cast<std::size_t>(e)].b : p.edges[static_cast<std::size_t>(e)].a;
                if (seen[static_cast<std::size_t>(w)]) continue;
                seen[static_cast<std::size_t>(w)] = true;
                order_.push_back(w);
                anchor_.push_back(u);
            }
        }
        connected_ = order_.size() == n;
        image_.assign(n, -1);
        used_.assign(t.graph().size(), false);
    }

    bool find() {
        if (!connected_ || p_.size() > t_.graph().size()) return false;
        return extend(0);
    }

  private:
    bool consistent(int u, int v) const {
        if (!p_.nodes[static_cast<std::size_t>(u)].test(t_.facts(v))) return false;
        for (int e : adj_[static_cast<std::size_t>(u)]) {
            const auto& edge = p_.edges[static_cast<std::size_t>(e)];
            const int w = edge.a == u ? edge.b : edge.a;
            const int img = w == u ? v : image_[static_cast<std::size_t>(w)];
            if (img < 0) continue;
            const auto bond = t_.graph().bond_between(v, img);
            if (!bond || !bond_matches(edge.predicate, t_.graph().bond(*bond).order)) return false;
        }
        return true;
    }

    bool try_map(std::size_t depth, int u, int v) {
        if (used_[static_cast<std::size_t>(v)] || !consistent(u, v)) return false;
        image_[static_cast<std::size_t>(u)] = v;
        used_[static_cast<std::size_t>(v)] = true;
        if (extend(depth + 1)) return true;
        image_[static_cast<std::size_t>(u)] = -1;
        used_[static_cast<std::size_t>(v)] = false;
        return false;
    }

    bool extend(std::size_t depth) {
        if (depth == order_.size()) return true;
        const int u = order_[depth];
        const int anchor = anchor_[depth];
        if (anchor < 0) {
            for (std::size_t v = 0; v < t_.graph().size(); ++v)
                if (try_map(depth, u, static_cast<int>(v))) return true;
            return false;
        }
        for (const auto& adj : t_.graph().neighbors(image_[static_cast<std::size_t>(anchor)]))
            if (try_map(depth, u, adj.atom)) return true;
        return false;
    }

    const MatchTarget& t_;
    const SubstructurePattern& p_;
    std::vector<std::vector<int>> adj_;
    std::vector<int> order_, anchor_, image_;
    std::vector<bool> used_;
    bool connected_ = false;
};

} // namespace detail

inline bool matches(const MatchTarget& target, const SubstructurePattern& p) {
    return detail::Embedder(target, p).find();
}

/// True iff `p` has an embedding in `g` satisfying all node and edge predicates.
inline bool matches(const MolecularGraph& g, const SubstructurePattern& p) {
    return matches(MatchTarget(g), p);
}

} // namespace molevo
