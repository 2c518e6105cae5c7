#pragma once

/// @file selfies.hpp
/// @brief SELFIES symbols, alphabets and derivation of molecular graphs.
///
/// Token spellings follow the early SELFIES dialect: atoms `[C]`, `[=O]`,
/// `[#N]`, aromatic atoms `[c]`, branches `[Branch{L}_{P}]`, rings
/// `[Ring{L}]`, plus the composed `[Benzene]` symbol.
///
/// Derivation keeps a remaining-valence budget per atom:
///  - an atom symbol bonds to the current atom with order
///    min(prefix, budget of current atom, capacity of new atom); two aromatic
///    atoms are joined by an aromatic bond costing one unit each. Aromatic
///    atoms reserve one unit of valence for their Kekule double bond;
///  - a chain ends once its current atom has no budget left;
///  - `[RingL]` reads the next L symbols as a base-16 index Q and bonds the
///    current atom to the atom Q+2 positions earlier (clamped to the first);
///  - `[BranchL_P]` reads Q the same way and derives the next Q+1 symbols as
///    a side chain whose first bond is capped at min(P, budget - 1);
///  - `[Benzene]` appends a six-membered aromatic ring attached by a single
///    bond and continues from the ring atom ortho to the attachment;
///  - ring and branch symbols that cannot apply are skipped, index and body
///    reads past the end are truncated.
/// The graph is sanitized afterwards, so every string yields a valid molecule.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "molevo/error.hpp"
#include "molevo/molgraph.hpp"

namespace molevo {

inline constexpr std::size_t kDefaultMaxTokens = 80;

class SelfiesSymbol {
  public:
    enum class Kind : std::uint8_t { Atom, Branch, Ring, Benzene };

    static SelfiesSymbol atom(Element e, int bond_order = 1, bool aromatic = false) {
        if (bond_order < 1 || bond_order > 3) throw ArgumentError("bond-order prefix must be 1..3");
        if (aromatic && (!can_be_aromatic(e) || bond_order != 1)) throw ArgumentError("invalid aromatic atom symbol");
        SelfiesSymbol s;
        s.kind_ = Kind::Atom;
        s.element_ = e;
        s.bond_order_ = static_cast<std::uint8_t>(bond_order);
        s.aromatic_ = aromatic;
        return s;
    }
    static SelfiesSymbol branch(int length_class, int bond_order) {
        if (length_class < 1 || length_class > 3 || bond_order < 1 || bond_order > 3)
            throw ArgumentError("branch classes must be 1..3");
        SelfiesSymbol s;
        s.kind_ = Kind::Branch;
        s.length_class_ = static_cast<std::uint8_t>(length_class);
        s.bond_order_ = static_cast<std::uint8_t>(bond_order);
        return s;
    }
    static SelfiesSymbol ring(int length_class) {
        if (length_class < 1 || length_class > 3) throw ArgumentError("ring length class must be 1..3");
        SelfiesSymbol s;
        s.kind_ = Kind::Ring;
        s.length_class_ = static_cast<std::uint8_t>(length_class);
        return s;
    }
    static SelfiesSymbol benzene() {
        SelfiesSymbol s;
        s.kind_ = Kind::Benzene;
        return s;
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] Element element() const noexcept { return element_; }
    [[nodiscard]] int bond_order() const noexcept { return bond_order_; }
    [[nodiscard]] bool aromatic() const noexcept { return aromatic_; }
    [[nodiscard]] int length_class() const noexcept { return length_class_; }

    [[nodiscard]] std::string spelling() const {
        switch (kind_) {
        case Kind::Atom: {
            std::string sym(symbol(element_));
            if (aromatic_) sym[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(sym[0])));
            const char* prefix = bond_order_ == 2 ? "=" : bond_order_ == 3 ? "#" : "";
            return "[" + std::string(prefix) + sym + "]";
        }
        case Kind::Branch: return "[Branch" + std::to_string(length_class_) + "_" + std::to_string(bond_order_) + "]";
        case Kind::Ring: return "[Ring" + std::to_string(length_class_) + "]";
        case Kind::Benzene: return "[Benzene]";
        }
        return "";
    }

    /// Parses a single bracketed token such as "[=C]"; nullopt if unknown.
    static std::optional<SelfiesSymbol> from_spelling(std::string_view tok) {
        if (tok.size() < 3 || tok.front() != '[' || tok.back() != ']') return std::nullopt;
        std::string_view body = tok.substr(1, tok.size() - 2);
        if (body == "Benzene") return benzene();
        if (body.size() == 5 && body.substr(0, 4) == "Ring" && body[4] >= '1' && body[4] <= '3') return ring(body[4] - '0');
        if (body.size() == 9 && body.substr(0, 6) == "Branch" && body[6] >= '1' && body[6] <= '3' && body[7] == '_' &&
            body[8] >= '1' && body[8] <= '3')
            return branch(body[6] - '0', body[8] - '0');
        int order = 1;
        if (!body.empty() && (body[0] == '=' || body[0] == '#')) {
            order = body[0] == '=' ? 2 : 3;
            body.remove_prefix(1);
        }
        if (body.empty()) return std::nullopt;
        bool aromatic = false;
        std::string name(body);
        if (std::islower(static_cast<unsigned char>(name[0]))) {
            if (name.size() != 1) return std::nullopt;
            aromatic = true;
            name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
        }
        auto e = element_from_symbol(name);
        if (!e || *e == Element::H) return std::nullopt;
        if (aromatic && (!can_be_aromatic(*e) || order != 1)) return std::nullopt;
        return atom(*e, order, aromatic);
    }

    friend bool operator==(const SelfiesSymbol&, const SelfiesSymbol&) = default;
    friend auto operator<=>(const SelfiesSymbol& l, const SelfiesSymbol& r) { return l.spelling() <=> r.spelling(); }

  private:
    Kind kind_ = Kind::Atom;
    Element element_ = Element::C;
    std::uint8_t bond_order_ = 1;
    bool aromatic_ = false;
    std::uint8_t length_class_ = 0;
};

/// Index value of a symbol when read as a branch/ring length digit.
inline int index_value(const SelfiesSymbol& s) {
    static const std::array<std::string, 16> order = {"[C]", "[Ring1]", "[Ring2]", "[Branch1_1]", "[Branch1_2]", "[Branch1_3]",
                                                      "[Branch2_1]", "[Branch2_2]", "[Branch2_3]", "[O]", "[N]", "[=N]",
                                                      "[=C]", "[#C]", "[S]", "[P]"};
    const auto sp = s.spelling();
    for (std::size_t i = 0; i < order.size(); ++i)
        if (order[i] == sp) return static_cast<int>(i);
    return 0;
}

class SelfiesString {
  public:
    explicit SelfiesString(std::vector<SelfiesSymbol> symbols) : symbols_(std::move(symbols)) {
        if (symbols_.empty()) throw ArgumentError("SELFIES string must contain at least one symbol");
    }

    [[nodiscard]] std::size_t length() const noexcept { return symbols_.size(); }
    [[nodiscard]] std::span<const SelfiesSymbol> symbols() const noexcept { return symbols_; }
    [[nodiscard]] const SelfiesSymbol& operator[](std::size_t i) const { return symbols_.at(i); }

    friend bool operator==(const SelfiesString&, const SelfiesString&) = default;

  private:
    std::vector<SelfiesSymbol> symbols_;
};

inline std::string render(const SelfiesString& s) {
    std::string out;
    for (const auto& sym : s.symbols()) out += sym.spelling();
    return out;
}

/// Splits bracketed tokens. Errors name the offending token and its 1-based position.
inline SelfiesString parse_symbols(std::string_view text, std::size_t max_tokens = kDefaultMaxTokens) {
    std::vector<SelfiesSymbol> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const std::size_t position = out.size() + 1;
        if (text[i] != '[') throw ParseError("SELFIES: expected '[' at token " + std::to_string(position), position);
        const auto close = text.find(']', i);
        if (close == std::string_view::npos)
            throw ParseError("SELFIES: unterminated token '" + std::string(text.substr(i)) + "' at position " + std::to_string(position), position);
        const auto tok = text.substr(i, close - i + 1);
        auto sym = SelfiesSymbol::from_spelling(tok);
        if (!sym) throw ParseError("SELFIES: unknown token '" + std::string(tok) + "' at position " + std::to_string(position), position);
        out.push_back(*sym);
        i = close + 1;
    }
    if (out.empty()) throw ParseError("SELFIES: empty string", 1);
    if (out.size() > max_tokens)
        throw ParseError("SELFIES: " + std::to_string(out.size()) + " tokens exceed the limit of " + std::to_string(max_tokens), max_tokens + 1);
    return SelfiesString(std::move(out));
}

// ---------------------------------------------------------------------------
// Alphabet
// ---------------------------------------------------------------------------

struct AlphabetEntry {
    SelfiesSymbol symbol;
    double weight;
};

class Alphabet {
  public:
    explicit Alphabet(std::vector<AlphabetEntry> entries) : entries_(std::move(entries)) {
        double total = 0.0;
        for (const auto& e : entries_) {
            if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) throw ArgumentError("alphabet weights must be finite and nonnegative");
            total += e.weight;
            cumulative_.push_back(total);
        }
        if (!(total > 0.0)) throw ArgumentError("alphabet needs at least one positive weight");
        for (auto& c : cumulative_) c /= total;
    }

    [[nodiscard]] std::span<const AlphabetEntry> entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

    /// Normalized sampling probability of entry i.
    [[nodiscard]] double probability(std::size_t i) const {
        return cumulative_.at(i) - (i == 0 ? 0.0 : cumulative_[i - 1]);
    }

    /// Weighted draw; zero-weight entries are never returned.
    template <class Rng>
    [[nodiscard]] const SelfiesSymbol& draw(Rng& rng) const {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) it = std::prev(cumulative_.end());
        auto idx = static_cast<std::size_t>(it - cumulative_.begin());
        while (entries_[idx].weight <= 0.0) --idx; // only when u hits a boundary exactly
        return entries_[idx].symbol;
    }

    /// Default alphabet, weighted toward [C].
    static const Alphabet& standard() {
        static const Alphabet a = [] {
            const std::vector<std::pair<std::string, double>> weights = {
                {"[C]", 10.0},  {"[c]", 3.0},  {"[N]", 2.0},  {"[n]", 1.0},  {"[O]", 2.0},         {"[o]", 0.5},
                {"[F]", 1.0},   {"[S]", 0.5},  {"[s]", 0.5},  {"[=C]", 2.0}, {"[=N]", 1.0},        {"[=O]", 1.0},
                {"[#C]", 0.5},  {"[#N]", 0.5}, {"[Branch1_1]", 1.5},        {"[Branch1_2]", 0.75}, {"[Ring1]", 1.5},
                {"[Ring2]", 0.5}, {"[Benzene]", 1.0},
            };
            return from_weights(weights);
        }();
        return a;
    }

    static Alphabet from_weights(const std::vector<std::pair<std::string, double>>& weights) {
        std::vector<AlphabetEntry> entries;
        for (const auto& [tok, w] : weights) {
            auto sym = SelfiesSymbol::from_spelling(tok);
            if (!sym) throw ConfigError("alphabet: unknown token '" + tok + "'");
            entries.push_back({*sym, w});
        }
        return Alphabet(std::move(entries));
    }

    /// JSON object mapping token spelling to weight, e.g. {"[C]": 10, "[O]": 2}.
    static Alphabet from_json(const nlohmann::json& j) {
        if (!j.is_object()) throw ConfigError("alphabet must be a JSON object {token: weight}");
        std::vector<std::pair<std::string, double>> weights;
        for (const auto& [tok, w] : j.items()) {
            if (!w.is_number()) throw ConfigError("alphabet weight for '" + tok + "' must be a number");
            weights.emplace_back(tok, w.get<double>());
        }
        try {
            return from_weights(weights);
        } catch (const ArgumentError& e) {
            throw ConfigError(std::string("alphabet: ") + e.what());
        }
    }

    static Alphabet load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open alphabet file: " + path);
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("alphabet file " + path + ": " + e.what());
        }
    }

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& e : entries_) j[e.symbol.spelling()] = e.weight;
        return j;
    }

  private:
    std::vector<AlphabetEntry> entries_;
    std::vector<double> cumulative_;
};

template <class Rng>
SelfiesString random_string(std::size_t length, const Alphabet& alphabet, Rng& rng) {
    if (length == 0) throw ArgumentError("random_string: length must be >= 1");
    std::vector<SelfiesSymbol> out;
    out.reserve(length);
    for (std::size_t i = 0; i < length; ++i) out.push_back(alphabet.draw(rng));
    return SelfiesString(std::move(out));
}

// ---------------------------------------------------------------------------
// Derivation
// ---------------------------------------------------------------------------

namespace detail {

class Deriver {
  public:
    explicit Deriver(std::span<const SelfiesSymbol> symbols) : syms_(symbols) {}

    MolecularGraph run() {
        derive(0, syms_.size(), -1, 3);
        sanitize(graph_);
        return std::move(graph_);
    }

  private:
    static int capacity(const SelfiesSymbol& s) {
        const int v = max_valence(s.element());
        return s.aromatic() ? v - (s.element() == Element::C || s.element() == Element::B ? 1 : 0) : v;
    }

    int new_atom(Element e, bool aromatic, int budget) {
        const int id = graph_.add_atom(e, aromatic);
        remaining_.push_back(budget);
        return id;
    }

    void bond(int a, int b, int order) {
        const bool aro = graph_.atom(a).aromatic && graph_.atom(b).aromatic && order == 0;
        graph_.add_bond(a, b, aro ? BondOrder::Aromatic : static_cast<BondOrder>(std::max(order, 1)));
        const int cost = std::max(order, 1);
        remaining_[static_cast<std::size_t>(a)] -= cost;
        remaining_[static_cast<std::size_t>(b)] -= cost;
    }

    /// Reads `count` symbols from `pos` as base-16 digits; truncated at `end`.
    int read_index(std::size_t pos, std::size_t count, std::size_t end) const {
        int q = 0;
        for (std::size_t k = 0; k < count && pos + k < end; ++k) q = q * 16 + index_value(syms_[pos + k]);
        return q;
    }

    /// Derives syms_[begin, end) as a chain hanging off `prev`; the first bond
    /// is capped at `first_cap`.
    void derive(std::size_t begin, std::size_t end, int prev, int first_cap) {
        int cur = prev;
        bool first = true;
        std::size_t i = begin;
        while (i < end) {
            if (cur >= 0 && remaining_[static_cast<std::size_t>(cur)] <= 0) break;
            const auto& sym = syms_[i];
            switch (sym.kind()) {
            case SelfiesSymbol::Kind::Atom: {
                const int cap = capacity(sym);
                if (cur < 0) {
                    cur = new_atom(sym.element(), sym.aromatic(), cap);
                } else {
                    const int a = new_atom(sym.element(), sym.aromatic(), cap);
                    if (sym.aromatic() && graph_.atom(cur).aromatic) {
                        bond(cur, a, 0);
                    } else {
                        int order = std::min({sym.bond_order(), remaining_[static_cast<std::size_t>(cur)], cap});
                        if (first) order = std::min(order, first_cap);
                        bond(cur, a, std::max(order, 1));
                    }
                    cur = a;
                }
                first = false;
                ++i;
                break;
            }
            case SelfiesSymbol::Kind::Benzene: {
                std::array<int, 6> ring{};
                for (auto& r : ring) r = new_atom(Element::C, true, 3);
                for (std::size_t k = 0; k < 6; ++k) bond(ring[k], ring[(k + 1) % 6], 0);
                if (cur >= 0) bond(cur, ring[0], 1);
                cur = ring[5];
                first = false;
                ++i;
                break;
            }
            case SelfiesSymbol::Kind::Ring: {
                if (cur < 0) {
                    ++i;
                    break;
                }
                const auto L = static_cast<std::size_t>(sym.length_class());
                const int q = read_index(i + 1, L, end);
                const int target = std::max(0, cur - (q + 2));
                if (target != cur && remaining_[static_cast<std::size_t>(cur)] >= 1 &&
                    remaining_[static_cast<std::size_t>(target)] >= 1 && !graph_.bond_between(cur, target)) {
                    const bool aro = graph_.atom(cur).aromatic && graph_.atom(target).aromatic;
                    bond(cur, target, aro ? 0 : 1);
                }
                i = std::min(end, i + 1 + L);
                break;
            }
            case SelfiesSymbol::Kind::Branch: {
                if (cur < 0 || remaining_[static_cast<std::size_t>(cur)] <= 1) {
                    ++i;
                    break;
                }
                const auto L = static_cast<std::size_t>(sym.length_class());
                const int q = read_index(i + 1, L, end);
                const std::size_t body_begin = std::min(end, i + 1 + L);
                const std::size_t body_end = std::min(end, body_begin + static_cast<std::size_t>(q) + 1);
                const int cap = std::min(sym.bond_order(), remaining_[static_cast<std::size_t>(cur)] - 1);
                derive(body_begin, body_end, cur, cap);
                i = body_end;
                break;
            }
            }
        }
    }

    std::span<const SelfiesSymbol> syms_;
    MolecularGraph graph_;
    std::vector<int> remaining_;
};

} // namespace detail

/// Total: every string yields a valence-valid (possibly empty) graph.
inline MolecularGraph decode(const SelfiesString& s) { return detail::Deriver(s.symbols()).run(); }

} // namespace molevo
