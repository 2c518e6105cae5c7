#pragma once

/// @file molgraph.hpp
/// @brief Molecular graph model: atoms, bonds, adjacency and ring perception.
///
/// Graphs are plain values. Builders (`add_atom`, `add_bond`) do not check
/// chemistry; `sanitize()` derives aromaticity, Kekule orders and implicit
/// hydrogens, and `validate()` (validate.hpp) reports what is still wrong.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "molevo/element.hpp"
#include "molevo/error.hpp"

namespace molevo {

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

struct Atom {
    Element element = Element::C;
    bool aromatic = false;
    int implicit_h = 0;
    /// Hydrogen count was given explicitly (e.g. `[nH]`) and must not be recomputed.
    bool h_fixed = false;

    friend bool operator==(const Atom&, const Atom&) = default;
};

struct Bond {
    int a = 0;
    int b = 0;
    BondOrder order = BondOrder::Single;
    /// Kekule order (1 or 2) of an aromatic bond; ignored otherwise.
    int kekule = 1;

    [[nodiscard]] int other(int atom) const noexcept { return atom == a ? b : a; }

    /// Contribution to each endpoint's valence.
    [[nodiscard]] int valence() const noexcept {
        return order == BondOrder::Aromatic ? kekule : static_cast<int>(order);
    }

    /// Contribution counted as a sigma/localized bond (aromatic bonds count 1).
    [[nodiscard]] int sigma_valence() const noexcept {
        return order == BondOrder::Aromatic ? 1 : static_cast<int>(order);
    }

    friend bool operator==(const Bond&, const Bond&) = default;
};

struct Adjacent {
    int atom;
    int bond;
};

class MolecularGraph {
  public:
    int add_atom(Element e, bool aromatic = false) {
        atoms_.push_back(Atom{e, aromatic, 0, false});
        adjacency_.emplace_back();
        return static_cast<int>(atoms_.size()) - 1;
    }

    int add_atom(const Atom& atom) {
        atoms_.push_back(atom);
        adjacency_.emplace_back();
        return static_cast<int>(atoms_.size()) - 1;
    }

    /// Appends a bond. Only index range is checked; self-loops and duplicates
    /// are accepted so that invalid graphs can be represented and reported.
    int add_bond(int a, int b, BondOrder order) {
        const auto n = static_cast<int>(atoms_.size());
        if (a < 0 || b < 0 || a >= n || b >= n)
            throw ArgumentError("add_bond: atom index out of range");
        bonds_.push_back(Bond{a, b, order, 1});
        const int id = static_cast<int>(bonds_.size()) - 1;
        adjacency_[a].push_back({b, id});
        if (a != b) adjacency_[b].push_back({a, id});
        return id;
    }

    [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }
    [[nodiscard]] bool empty() const noexcept { return atoms_.empty(); }
    [[nodiscard]] std::size_t bond_count() const noexcept { return bonds_.size(); }

    [[nodiscard]] std::span<const Atom> atoms() const noexcept { return atoms_; }
    [[nodiscard]] std::span<const Bond> bonds() const noexcept { return bonds_; }
    [[nodiscard]] const Atom& atom(int i) const { return atoms_.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] Atom& atom(int i) { return atoms_.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] const Bond& bond(int i) const { return bonds_.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] Bond& bond(int i) { return bonds_.at(static_cast<std::size_t>(i)); }

    [[nodiscard]] std::span<const Adjacent> neighbors(int i) const {
        return adjacency_.at(static_cast<std::size_t>(i));
    }

    [[nodiscard]] std::optional<int> bond_between(int a, int b) const {
        for (const auto& adj : neighbors(a))
            if (adj.atom == b) return adj.bond;
        return std::nullopt;
    }

    [[nodiscard]] int degree(int i) const { return static_cast<int>(neighbors(i).size()); }

    /// Sum of bond valences at atom `i` (Kekule orders for aromatic bonds).
    [[nodiscard]] int bond_valence(int i) const {
        int sum = 0;
        for (const auto& adj : neighbors(i)) sum += bonds_[adj.bond].valence();
        return sum;
    }

    [[nodiscard]] int sigma_valence(int i) const {
        int sum = 0;
        for (const auto& adj : neighbors(i)) sum += bonds_[adj.bond].sigma_valence();
        return sum;
    }

    /// Returns a copy with atoms reordered: new index of old atom i is perm[i].
    [[nodiscard]] MolecularGraph permuted(std::span<const int> perm) const {
        if (perm.size() != atoms_.size()) throw ArgumentError("permuted: size mismatch");
        std::vector<int> inverse(perm.size());
        for (std::size_t i = 0; i < perm.size(); ++i) inverse[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
        MolecularGraph out;
        for (int old : inverse) out.add_atom(atoms_[static_cast<std::size_t>(old)]);
        for (const auto& b : bonds_) {
            const int id = out.add_bond(perm[static_cast<std::size_t>(b.a)], perm[static_cast<std::size_t>(b.b)], b.order);
            out.bonds_[static_cast<std::size_t>(id)].kekule = b.kekule;
        }
        return out;
    }

  private:
    std::vector<Atom> atoms_;
    std::vector<Bond> bonds_;
    std::vector<std::vector<Adjacent>> adjacency_;
};

// ---------------------------------------------------------------------------
// Ring perception
// ---------------------------------------------------------------------------

namespace detail {

/// Marks bonds that lie on a cycle among those accepted by `keep`.
/// Bridge finding by iterative Tarjan low-link.
template <class KeepBond>
std::vector<bool> cycle_bonds(const MolecularGraph& g, KeepBond keep) {
    const auto n = g.size();
    std::vector<bool> on_cycle(g.bond_count(), false);
    std::vector<int> disc(n, -1), low(n, 0);
    int timer = 0;
    struct Frame {
        int atom;
        int parent_bond;
        std::size_t next;
    };
    std::vector<Frame> stack;
    std::vector<bool> is_bridge(g.bond_count(), false);
    for (std::size_t root = 0; root < n; ++root) {
        if (disc[root] != -1) continue;
        stack.push_back({static_cast<int>(root), -1, 0});
        disc[root] = low[root] = timer++;
        while (!stack.empty()) {
            auto& f = stack.back();
            const auto nbrs = g.neighbors(f.atom);
            if (f.next < nbrs.size()) {
                const auto adj = nbrs[f.next++];
                if (adj.bond == f.parent_bond || !keep(g.bond(adj.bond)) || adj.atom == f.atom) continue;
                if (disc[static_cast<std::size_t>(adj.atom)] == -1) {
                    disc[static_cast<std::size_t>(adj.atom)] = low[static_cast<std::size_t>(adj.atom)] = timer++;
                    stack.push_back({adj.atom, adj.bond, 0});
                } else {
                    low[static_cast<std::size_t>(f.atom)] =
                        std::min(low[static_cast<std::size_t>(f.atom)], disc[static_cast<std::size_t>(adj.atom)]);
                }
            } else {
                const Frame done = f;
                stack.pop_back();
                if (!stack.empty()) {
                    auto& parent = stack.back();
                    low[static_cast<std::size_t>(parent.atom)] =
                        std::min(low[static_cast<std::size_t>(parent.atom)], low[static_cast<std::size_t>(done.atom)]);
                    if (low[static_cast<std::size_t>(done.atom)] > disc[static_cast<std::size_t>(parent.atom)])
                        is_bridge[static_cast<std::size_t>(done.parent_bond)] = true;
                }
            }
        }
    }
    for (std::size_t b = 0; b < g.bond_count(); ++b) {
        const auto& bond = g.bond(static_cast<int>(b));
        on_cycle[b] = keep(bond) && bond.a != bond.b && !is_bridge[b];
    }
    return on_cycle;
}

} // namespace detail

/// Ring membership and a smallest set of smallest rings.
struct RingInfo {
    std::vector<bool> ring_bond;
    std::vector<bool> ring_atom;
    /// Each ring as its bond indices.
    std::vector<std::vector<int>> ring_bonds;
    /// Each ring as its atom indices (unordered).
    std::vector<std::vector<int>> ring_atoms;

    [[nodiscard]] std::size_t ring_count() const noexcept { return ring_bonds.size(); }

    /// Number of SSSR rings containing atom i.
    [[nodiscard]] int rings_containing(int atom) const {
        int c = 0;
        for (const auto& r : ring_atoms)
            if (std::find(r.begin(), r.end(), atom) != r.end()) ++c;
        return c;
    }
};

/// Ring perception restricted to cycle bonds. The ring set is a minimum cycle
/// basis: candidate cycles (shortest path pairs closed by an edge) are sorted
/// by length and kept when independent over GF(2).
inline RingInfo perceive_rings(const MolecularGraph& g) {
    RingInfo info;
    info.ring_bond = detail::cycle_bonds(g, [](const Bond&) { return true; });
    info.ring_atom.assign(g.size(), false);
    std::vector<int> ring_edges;
    for (std::size_t b = 0; b < g.bond_count(); ++b) {
        if (!info.ring_bond[b]) continue;
        ring_edges.push_back(static_cast<int>(b));
        info.ring_atom[static_cast<std::size_t>(g.bond(static_cast<int>(b)).a)] = true;
        info.ring_atom[static_cast<std::size_t>(g.bond(static_cast<int>(b)).b)] = true;
    }
    if (ring_edges.empty()) return info;

    // Local indexing of ring edges for bitset arithmetic.
    std::vector<int> local(g.bond_count(), -1);
    for (std::size_t i = 0; i < ring_edges.size(); ++i) local[static_cast<std::size_t>(ring_edges[i])] = static_cast<int>(i);
    const std::size_t words = (ring_edges.size() + 63) / 64;
    using Bits = std::vector<std::uint64_t>;

    int ring_atoms_n = 0, components = 0;
    {
        std::vector<int> comp(g.size(), -1);
        for (std::size_t s = 0; s < g.size(); ++s) {
            if (!info.ring_atom[s] || comp[s] != -1) continue;
            ++components;
            std::vector<int> todo{static_cast<int>(s)};
            comp[s] = components;
            while (!todo.empty()) {
                const int v = todo.back();
                todo.pop_back();
                ++ring_atoms_n;
                for (const auto& adj : g.neighbors(v))
                    if (info.ring_bond[static_cast<std::size_t>(adj.bond)] && comp[static_cast<std::size_t>(adj.atom)] == -1) {
                        comp[static_cast<std::size_t>(adj.atom)] = components;
                        todo.push_back(adj.atom);
                    }
            }
        }
    }
    const std::size_t target = ring_edges.size() - static_cast<std::size_t>(ring_atoms_n) + static_cast<std::size_t>(components);

    struct Candidate {
        std::size_t length;
        Bits bits;
    };
    std::vector<Candidate> candidates;
    const auto n = g.size();
    for (std::size_t root = 0; root < n; ++root) {
        if (!info.ring_atom[root]) continue;
        // BFS tree over ring bonds.
        std::vector<int> dist(n, -1), parent_bond(n, -1);
        std::vector<int> queue{static_cast<int>(root)};
        dist[root] = 0;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const int v = queue[qi];
            for (const auto& adj : g.neighbors(v)) {
                if (!info.ring_bond[static_cast<std::size_t>(adj.bond)] || dist[static_cast<std::size_t>(adj.atom)] != -1) continue;
                dist[static_cast<std::size_t>(adj.atom)] = dist[static_cast<std::size_t>(v)] + 1;
                parent_bond[static_cast<std::size_t>(adj.atom)] = adj.bond;
                queue.push_back(adj.atom);
            }
        }
        auto path_bits = [&](int v, Bits& bits, std::vector<int>& visited) {
            while (v != static_cast<int>(root)) {
                const int pb = parent_bond[static_cast<std::size_t>(v)];
                const auto li = static_cast<std::size_t>(local[static_cast<std::size_t>(pb)]);
                bits[li / 64] ^= (std::uint64_t{1} << (li % 64));
                visited.push_back(v);
                v = g.bond(pb).other(v);
            }
        };
        for (int e : ring_edges) {
            const auto& bond = g.bond(e);
            const int x = bond.a, y = bond.b;
            if (dist[static_cast<std::size_t>(x)] < 0 || dist[static_cast<std::size_t>(y)] < 0) continue;
            if (parent_bond[static_cast<std::size_t>(x)] == e || parent_bond[static_cast<std::size_t>(y)] == e) continue;
            Bits bits(words, 0);
            std::vector<int> vx, vy;
            path_bits(x, bits, vx);
            path_bits(y, bits, vy);
            // Paths must be disjoint apart from the root.
            bool disjoint = true;
            for (int a : vx)
                if (std::find(vy.begin(), vy.end(), a) != vy.end()) { disjoint = false; break; }
            if (!disjoint) continue;
            const auto le = static_cast<std::size_t>(local[static_cast<std::size_t>(e)]);
            bits[le / 64] ^= (std::uint64_t{1} << (le % 64));
            candidates.push_back({vx.size() + vy.size() + 1, std::move(bits)});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& l, const Candidate& r) {
                         if (l.length != r.length) return l.length < r.length;
                         return l.bits < r.bits;
                     });

    // Gaussian elimination over GF(2), pivot = lowest set bit.
    std::vector<std::pair<std::size_t, Bits>> basis; // (pivot, reduced vector)
    auto lowest_bit = [&](const Bits& b) -> std::optional<std::size_t> {
        for (std::size_t w = 0; w < words; ++w)
            if (b[w] != 0) return w * 64 + static_cast<std::size_t>(__builtin_ctzll(b[w]));
        return std::nullopt;
    };
    for (const auto& cand : candidates) {
        if (basis.size() == target) break;
        Bits reduced = cand.bits;
        bool changed = true;
        while (changed) {
            changed = false;
            const auto piv = lowest_bit(reduced);
            if (!piv) break;
            for (const auto& [p, vec] : basis)
                if (p == *piv) {
                    for (std::size_t w = 0; w < words; ++w) reduced[w] ^= vec[w];
                    changed = true;
                    break;
                }
        }
        const auto piv = lowest_bit(reduced);
        if (!piv) continue;
        basis.emplace_back(*piv, std::move(reduced));
        std::vector<int> rb, ra;
        for (std::size_t li = 0; li < ring_edges.size(); ++li)
            if (cand.bits[li / 64] >> (li % 64) & 1U) {
                const int e = ring_edges[li];
                rb.push_back(e);
                ra.push_back(g.bond(e).a);
                ra.push_back(g.bond(e).b);
            }
        std::sort(ra.begin(), ra.end());
        ra.erase(std::unique(ra.begin(), ra.end()), ra.end());
        info.ring_bonds.push_back(std::move(rb));
        info.ring_atoms.push_back(std::move(ra));
    }
    return info;
}

// ---------------------------------------------------------------------------
// Sanitization: aromaticity cleanup, kekulization, implicit hydrogens
// ---------------------------------------------------------------------------

namespace detail {

/// Perfect matching of `required` atoms along aromatic bonds, by backtracking
/// on the most constrained atom first. `mate[v]` is the partner bond or -1.
class KekuleMatcher {
  public:
    KekuleMatcher(const MolecularGraph& g, const std::vector<int>& members, const std::vector<bool>& can_pi,
                  const std::vector<bool>& required)
        : g_(g), members_(members), can_pi_(can_pi), required_(required), mate_(g.size(), -1) {}

    bool solve() { return search(); }
    [[nodiscard]] const std::vector<int>& mates() const noexcept { return mate_; }

  private:
    static constexpr long kStepBudget = 200000;

    int options(int v, int* only = nullptr) const {
        int count = 0;
        for (const auto& adj : g_.neighbors(v)) {
            if (g_.bond(adj.bond).order != BondOrder::Aromatic) continue;
            if (!can_pi_[static_cast<std::size_t>(adj.atom)] || mate_[static_cast<std::size_t>(adj.atom)] != -1) continue;
            ++count;
            if (only) *only = adj.bond;
        }
        return count;
    }

    bool search() {
        if (++steps_ > kStepBudget) return false;
        int best = -1, best_options = 1 << 30;
        for (int v : members_) {
            if (!required_[static_cast<std::size_t>(v)] || mate_[static_cast<std::size_t>(v)] != -1) continue;
            const int o = options(v);
            if (o < best_options) {
                best_options = o;
                best = v;
                if (o <= 1) break;
            }
        }
        if (best == -1) return true;
        if (best_options == 0) return false;
        for (const auto& adj : g_.neighbors(best)) {
            if (g_.bond(adj.bond).order != BondOrder::Aromatic) continue;
            if (!can_pi_[static_cast<std::size_t>(adj.atom)] || mate_[static_cast<std::size_t>(adj.atom)] != -1) continue;
            mate_[static_cast<std::size_t>(best)] = adj.bond;
            mate_[static_cast<std::size_t>(adj.atom)] = adj.bond;
            if (search()) return true;
            mate_[static_cast<std::size_t>(best)] = -1;
            mate_[static_cast<std::size_t>(adj.atom)] = -1;
            if (steps_ > kStepBudget) return false;
        }
        return false;
    }

    const MolecularGraph& g_;
    const std::vector<int>& members_;
    const std::vector<bool>& can_pi_;
    const std::vector<bool>& required_;
    std::vector<int> mate_;
    long steps_ = 0;
};

} // namespace detail

/// Normalizes aromaticity and hydrogens in place:
///  1. aromatic bonds need two aromatic endpoints and must lie on a cycle of
///     aromatic bonds, otherwise they become single bonds;
///  2. aromatic atoms without aromatic bonds lose the flag;
///  3. every aromatic system is kekulized. Aromatic C and N with spare valence
///     must receive exactly one double bond; O, S, substituted N and [nH]
///     donate no double bond. Systems without a Kekule structure are
///     dearomatized to single bonds;
///  4. implicit hydrogens fill remaining valence unless `h_fixed`.
inline void sanitize(MolecularGraph& g) {
    const auto n = g.size();
    for (std::size_t b = 0; b < g.bond_count(); ++b) {
        auto& bond = g.bond(static_cast<int>(b));
        if (bond.order != BondOrder::Aromatic) continue;
        if (bond.a == bond.b || !g.atom(bond.a).aromatic || !g.atom(bond.b).aromatic) bond.order = BondOrder::Single;
    }
    const auto cyc = detail::cycle_bonds(g, [](const Bond& b) { return b.order == BondOrder::Aromatic; });
    for (std::size_t b = 0; b < g.bond_count(); ++b) {
        auto& bond = g.bond(static_cast<int>(b));
        if (bond.order == BondOrder::Aromatic && !cyc[b]) bond.order = BondOrder::Single;
    }
    auto has_aromatic_bond = [&](int v) {
        for (const auto& adj : g.neighbors(v))
            if (g.bond(adj.bond).order == BondOrder::Aromatic) return true;
        return false;
    };
    for (std::size_t v = 0; v < n; ++v) {
        auto& atom = g.atom(static_cast<int>(v));
        if (atom.aromatic && !has_aromatic_bond(static_cast<int>(v))) atom.aromatic = false;
    }

    // Aromatic systems = components of the aromatic-bond subgraph.
    std::vector<int> system(n, -1);
    std::vector<bool> can_pi(n, false), required(n, false);
    int systems = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (!g.atom(static_cast<int>(s)).aromatic || system[s] != -1) continue;
        std::vector<int> members{static_cast<int>(s)};
        system[s] = systems;
        for (std::size_t i = 0; i < members.size(); ++i)
            for (const auto& adj : g.neighbors(members[i]))
                if (g.bond(adj.bond).order == BondOrder::Aromatic && system[static_cast<std::size_t>(adj.atom)] == -1) {
                    system[static_cast<std::size_t>(adj.atom)] = systems;
                    members.push_back(adj.atom);
                }
        ++systems;

        bool feasible = true;
        for (int v : members) {
            const auto& atom = g.atom(v);
            const int fixed_h = atom.h_fixed ? atom.implicit_h : 0;
            const int spare = max_valence(atom.element) - g.sigma_valence(v) - fixed_h;
            const bool donor_type = atom.element == Element::C || atom.element == Element::N ||
                                    atom.element == Element::B || atom.element == Element::P;
            can_pi[static_cast<std::size_t>(v)] = donor_type && spare >= 1;
            required[static_cast<std::size_t>(v)] = can_pi[static_cast<std::size_t>(v)];
            if (atom.element == Element::C && spare < 1) feasible = false;
        }
        detail::KekuleMatcher matcher(g, members, can_pi, required);
        if (feasible && matcher.solve()) {
            const auto& mate = matcher.mates();
            for (int v : members)
                for (const auto& adj : g.neighbors(v)) {
                    auto& bond = g.bond(adj.bond);
                    if (bond.order == BondOrder::Aromatic) bond.kekule = (mate[static_cast<std::size_t>(v)] == adj.bond) ? 2 : 1;
                }
        } else {
            for (int v : members) {
                g.atom(v).aromatic = false;
                for (const auto& adj : g.neighbors(v)) {
                    auto& bond = g.bond(adj.bond);
                    if (bond.order == BondOrder::Aromatic) {
                        bond.order = BondOrder::Single;
                        bond.kekule = 1;
                    }
                }
            }
        }
    }

    for (std::size_t v = 0; v < n; ++v) {
        auto& atom = g.atom(static_cast<int>(v));
        if (atom.h_fixed) continue;
        atom.implicit_h = std::max(0, max_valence(atom.element) - g.bond_valence(static_cast<int>(v)));
    }
}

/// Number of heavy-atom neighbours (all graph atoms are heavy atoms).
inline int heavy_degree(const MolecularGraph& g, int atom) { return g.degree(atom); }

inline int total_hydrogens(const MolecularGraph& g) {
    int h = 0;
    for (const auto& a : g.atoms()) h += a.implicit_h;
    return h;
}

} // namespace molevo
