#pragma once

/// @file moea.hpp
/// @brief Pareto dominance, non-dominated sorting, crowding distance,
/// NSGA-II environmental selection and exact hypervolume.
///
/// All objectives are minimized. Point types only need `size()` and
/// `operator[]` returning something convertible to double.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "molevo/error.hpp"

namespace molevo {

using Point = std::vector<double>;

template <class A, class B>
bool dominates(const A& a, const B& b) {
    if (a.size() != b.size())
        throw ArgumentError("dominates: dimension mismatch (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i], y = b[i];
        if (x > y) return false;
        if (x < y) strict = true;
    }
    return strict;
}

/// Members of one non-domination level (indices into the input) and their
/// crowding distances once computed.
struct Front {
    std::vector<std::size_t> members;
    std::vector<double> crowding;
};

/// Fast non-dominated sort. Front members keep ascending input order.
template <class P>
std::vector<Front> non_dominated_sort(const std::vector<P>& pts) {
    const std::size_t n = pts.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    std::vector<Front> fronts;
    Front current;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(pts[i], pts[j])) {
                dominated[i].push_back(j);
                ++count[j];
            } else if (dominates(pts[j], pts[i])) {
                dominated[j].push_back(i);
                ++count[i];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (count[i] == 0) current.members.push_back(i);
    while (!current.members.empty()) {
        Front next;
        for (std::size_t i : current.members)
            for (std::size_t j : dominated[i])
                if (--count[j] == 0) next.members.push_back(j);
        std::sort(next.members.begin(), next.members.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

/// Rank (front index) of every point.
template <class P>
std::vector<std::size_t> pareto_ranks(const std::vector<P>& pts) {
    std::vector<std::size_t> rank(pts.size(), 0);
    const auto fronts = non_dominated_sort(pts);
    for (std::size_t f = 0; f < fronts.size(); ++f)
        for (std::size_t i : fronts[f].members) rank[i] = f;
    return rank;
}

/// Crowding distance of each member of `members`, in the same order.
/// Per objective: boundaries are infinite and interior members add
/// (next - prev) / (max - min); objectives with zero range add nothing.
/// Ties within an objective keep the order of `members`.
template <class P>
std::vector<double> crowding_distance(const std::vector<P>& pts, const std::vector<std::size_t>& members) {
    const std::size_t n = members.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    const std::size_t m = pts[members[0]].size();
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < m; ++k) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return pts[members[x]][k] < pts[members[y]][k]; });
        const double lo = pts[members[order.front()]][k];
        const double hi = pts[members[order.back()]][k];
        if (!(hi > lo)) continue;
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        for (std::size_t r = 1; r + 1 < n; ++r) {
            if (std::isinf(dist[order[r]])) continue;
            dist[order[r]] += (pts[members[order[r + 1]]][k] - pts[members[order[r - 1]]][k]) / (hi - lo);
        }
    }
    return dist;
}

/// NSGA-II environmental selection. Returns `mu` indices into `pts` ordered
/// by rank, then descending crowding distance, then key. The input is first
/// put into a canonical order (by key, then objective values) so the result
/// does not depend on candidate order.
template <class P>
std::vector<std::size_t> nsga2_select(const std::vector<P>& pts, const std::vector<std::string>& keys, std::size_t mu) {
    if (keys.size() != pts.size()) throw ArgumentError("nsga2_select: keys and points differ in length");
    if (mu > pts.size()) throw ArgumentError("nsga2_select: mu exceeds candidate count");
    std::vector<std::size_t> canon(pts.size());
    std::iota(canon.begin(), canon.end(), 0);
    std::stable_sort(canon.begin(), canon.end(), [&](std::size_t a, std::size_t b) {
        if (keys[a] != keys[b]) return keys[a] < keys[b];
        for (std::size_t k = 0; k < pts[a].size(); ++k)
            if (pts[a][k] != pts[b][k]) return pts[a][k] < pts[b][k];
        return false;
    });
    std::vector<P> sorted;
    sorted.reserve(pts.size());
    for (std::size_t i : canon) sorted.push_back(pts[i]);

    std::vector<std::size_t> out;
    out.reserve(mu);
    for (auto& front : non_dominated_sort(sorted)) {
        if (out.size() >= mu) break;
        const auto cd = crowding_distance(sorted, front.members);
        std::vector<std::size_t> order(front.members.size());
        std::iota(order.begin(), order.end(), 0);
        // members are ascending canonical positions, so index order is key order
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cd[a] > cd[b]; });
        for (std::size_t r : order) {
            if (out.size() >= mu) break;
            out.push_back(canon[front.members[r]]);
        }
    }
    return out;
}

namespace detail {

inline double hv_recursive(std::vector<Point> pts, const Point& ref, std::size_t dim) {
    if (pts.empty()) return 0.0;
    if (dim == 1) {
        double best = ref[0];
        for (const auto& p : pts) best = std::min(best, p[0]);
        return ref[0] - best;
    }
    const std::size_t k = dim - 1;
    std::sort(pts.begin(), pts.end(), [&](const Point& a, const Point& b) { return a[k] < b[k]; });
    if (dim == 2) {
        double area = 0, best_x = ref[0];
        for (std::size_t i = 0; i < pts.size(); ++i) {
            best_x = std::min(best_x, pts[i][0]);
            const double top = i + 1 < pts.size() ? pts[i + 1][1] : ref[1];
            area += (ref[0] - best_x) * (top - pts[i][1]);
        }
        return area;
    }
    double vol = 0;
    std::vector<Point> slab;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        slab.push_back(pts[i]);
        const double top = i + 1 < pts.size() ? pts[i + 1][k] : ref[k];
        const double h = top - pts[i][k];
        if (h <= 0) continue;
        // drop points dominated in the remaining dimensions
        std::vector<Point> nd;
        for (std::size_t a = 0; a < slab.size(); ++a) {
            bool dominated = false;
            for (std::size_t b = 0; b < slab.size() && !dominated; ++b) {
                if (a == b) continue;
                bool weak = true, strict = false;
                for (std::size_t d = 0; d < k; ++d) {
                    if (slab[b][d] > slab[a][d]) weak = false;
                    if (slab[b][d] < slab[a][d]) strict = true;
                }
                dominated = weak && (strict || b < a);
            }
            if (!dominated) nd.push_back(slab[a]);
        }
        slab = nd;
        vol += h * hv_recursive(slab, ref, k);
    }
    return vol;
}

} // namespace detail

/// Exact dominated hypervolume with respect to `ref` by recursive slicing
/// along the last objective. Coordinates beyond the reference are clipped
/// to it, so such points contribute nothing along that axis.
template <class P>
double hypervolume(const std::vector<P>& pts, const Point& ref) {
    if (pts.empty()) return 0.0;
    const std::size_t m = ref.size();
    std::vector<Point> clipped;
    clipped.reserve(pts.size());
    for (const auto& p : pts) {
        if (p.size() != m) throw ArgumentError("hypervolume: point dimension differs from reference");
        Point q(m);
        for (std::size_t i = 0; i < m; ++i) q[i] = std::min(static_cast<double>(p[i]), ref[i]);
        clipped.push_back(std::move(q));
    }
    return detail::hv_recursive(std::move(clipped), ref, m);
}

template <class P>
double hypervolume(const std::vector<P>& pts) {
    if (pts.empty()) return 0.0;
    return hypervolume(pts, Point(pts.front().size(), 1.0));
}

} // namespace molevo
