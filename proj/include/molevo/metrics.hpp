#pragma once

/// @file metrics.hpp
/// @brief The five objectives, each normalized to [0,1] with 0 best, and
/// their weighted-sum scalarization.
///
/// Affine maps to the unified scale:
///   docking  t = (e - min)/(max - min), then soft clip
///   SA       (raw - 1) / 9,  raw in [1,10]
///   QED      1 - geometric mean of desirabilities
///   NP       (5 - raw) / 10, raw in [-5,5]
///   filters  0 if no alert matches, else 1

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "molevo/descriptors.hpp"
#include "molevo/fragments.hpp"
#include "molevo/np_reference.hpp"
#include "molevo/smiles.hpp"

namespace molevo {

inline constexpr std::size_t kObjectiveCount = 5;
inline constexpr std::array<const char*, kObjectiveCount> kObjectiveNames = {"docking", "sa", "qed", "np", "filters"};

/// Five unit scores in the order docking, SA, QED, NP, filters.
class ObjectiveVector {
public:
    ObjectiveVector() = default;
    explicit ObjectiveVector(const std::array<double, kObjectiveCount>& v) : v_(v) {
        for (std::size_t i = 0; i < kObjectiveCount; ++i)
            if (!(v_[i] >= 0.0 && v_[i] <= 1.0))
                throw ArgumentError(std::string("objective '") + kObjectiveNames[i] + "' outside [0,1]: " + std::to_string(v_[i]));
    }
    ObjectiveVector(double docking, double sa, double qed, double np, double filters)
        : ObjectiveVector(std::array<double, kObjectiveCount>{docking, sa, qed, np, filters}) {}

    /// All objectives at their worst value.
    static ObjectiveVector worst() { return ObjectiveVector(1, 1, 1, 1, 1); }

    [[nodiscard]] double docking() const noexcept { return v_[0]; }
    [[nodiscard]] double sa() const noexcept { return v_[1]; }
    [[nodiscard]] double qed() const noexcept { return v_[2]; }
    [[nodiscard]] double np() const noexcept { return v_[3]; }
    [[nodiscard]] double filters() const noexcept { return v_[4]; }

    [[nodiscard]] double operator[](std::size_t i) const { return v_.at(i); }
    [[nodiscard]] std::size_t size() const noexcept { return kObjectiveCount; }
    [[nodiscard]] const std::array<double, kObjectiveCount>& values() const noexcept { return v_; }
    [[nodiscard]] auto begin() const noexcept { return v_.begin(); }
    [[nodiscard]] auto end() const noexcept { return v_.end(); }

    bool operator==(const ObjectiveVector&) const = default;

private:
    std::array<double, kObjectiveCount> v_{1, 1, 1, 1, 1};
};

struct MetricConfig {
    std::array<double, kObjectiveCount> weights{0.4, 0.15, 0.15, 0.15, 0.15};
    double docking_min = -15.0; // kcal/mol
    double docking_max = 1.0;   // kcal/mol
    double softclip_sharpness = 50.0;

    void validate() const {
        double s = 0;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("metric weights must be nonnegative");
            s += w;
        }
        if (std::abs(s - 1.0) > 1e-9) throw ConfigError("metric weights must sum to 1, got " + std::to_string(s));
        if (!(docking_min < docking_max)) throw ConfigError("docking_min must be below docking_max");
        if (!(softclip_sharpness > 0.0) || !std::isfinite(softclip_sharpness)) throw ConfigError("softclip_sharpness must be positive");
    }
};

inline void to_json(nlohmann::json& j, const MetricConfig& c) {
    j = {{"weights", c.weights}, {"docking_min", c.docking_min}, {"docking_max", c.docking_max},
         {"softclip_sharpness", c.softclip_sharpness}};
}

inline void from_json(const nlohmann::json& j, MetricConfig& c) {
    c = MetricConfig{};
    if (j.contains("weights")) c.weights = j.at("weights").get<std::array<double, kObjectiveCount>>();
    if (j.contains("docking_min")) c.docking_min = j.at("docking_min").get<double>();
    if (j.contains("docking_max")) c.docking_max = j.at("docking_max").get<double>();
    if (j.contains("softclip_sharpness")) c.softclip_sharpness = j.at("softclip_sharpness").get<double>();
    c.validate();
}

namespace detail {
/// ln(1 + e^x) without overflow.
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
} // namespace detail

/// sc(t) = (1/a) ln[(1 + e^{at}) / (1 + e^{a(t-1)})]. Evaluated from the
/// nearer end so that sc(1 - t) = 1 - sc(t) holds to rounding, and kept
/// strictly inside (0,1).
inline double soft_clip(double t, double a) {
    double r;
    if (t <= 0.5) r = (detail::softplus(a * t) - detail::softplus(a * (t - 1.0))) / a;
    else r = 1.0 - (detail::softplus(a * (1.0 - t)) - detail::softplus(-a * t)) / a;
    const double lo = std::numeric_limits<double>::denorm_min();
    return std::clamp(r, lo, std::nextafter(1.0, 0.0));
}

inline double normalize_docking(double e, const MetricConfig& cfg = {}) {
    if (!std::isfinite(e)) throw ArgumentError("normalize_docking: non-finite docking score");
    const double t = (e - cfg.docking_min) / (cfg.docking_max - cfg.docking_min);
    return soft_clip(t, cfg.softclip_sharpness);
}

// ---------------------------------------------------------------------------
// QED

inline constexpr std::size_t kDesirabilityCount = 8;
inline constexpr std::array<const char*, kDesirabilityCount> kDesirabilityNames = {"MW", "ALOGP", "HBA", "HBD",
                                                                                   "PSA", "ROTB", "AROM", "ALERTS"};

/// Asymmetric double sigmoid
///   ads(x) = (a + b / (1 + e^{-(x - c + d/2)/e}) * (1 - 1/(1 + e^{-(x - c - d/2)/f}))) / dmax
/// clamped into (0,1]. `weight` is the exponent in the weighted geometric mean.
struct Desirability {
    double a = 0, b = 1, c = 0, d = 1, e = 1, f = 1, dmax = 1;
    double weight = 1;

    [[nodiscard]] double operator()(double x) const {
        const double rise = 1.0 / (1.0 + std::exp(-(x - c + d / 2.0) / e));
        const double fall = 1.0 - 1.0 / (1.0 + std::exp(-(x - c - d / 2.0) / f));
        const double v = (a + b * rise * fall) / dmax;
        if (!(v > 0.0)) return std::numeric_limits<double>::min();
        return std::min(v, 1.0);
    }
};

inline void to_json(nlohmann::json& j, const Desirability& d) {
    j = {{"a", d.a}, {"b", d.b}, {"c", d.c}, {"d", d.d}, {"e", d.e}, {"f", d.f}, {"dmax", d.dmax}, {"weight", d.weight}};
}

inline void from_json(const nlohmann::json& j, Desirability& d) {
    d.a = j.at("a").get<double>();
    d.b = j.at("b").get<double>();
    d.c = j.at("c").get<double>();
    d.d = j.at("d").get<double>();
    d.e = j.at("e").get<double>();
    d.f = j.at("f").get<double>();
    d.dmax = j.at("dmax").get<double>();
    d.weight = j.value("weight", 1.0);
    if (!(d.dmax > 0) || !(d.e != 0) || !(d.f != 0) || !(d.weight >= 0))
        throw ConfigError("desirability parameters: dmax > 0, e != 0, f != 0, weight >= 0 required");
}

struct DesirabilityParams {
    std::array<Desirability, kDesirabilityCount> fns;

    static DesirabilityParams defaults() {
        DesirabilityParams p;
        p.fns = {{
            {2.817065973, 392.5754953, 290.7489764, 2.419764353, 49.22325677, 65.37051707, 104.9805561, 1},
            {3.172690585, 137.8624751, 2.534937431, 4.581497897, 0.822739154, 0.576295591, 131.3186604, 1},
            {2.948620388, 160.4605972, 3.615294657, 4.435986202, 0.290141953, 1.300669958, 148.7763046, 1},
            {1.618662227, 1010.051101, 0.985094388, 0.000000001, 0.713820843, 0.920922555, 258.1632616, 1},
            {1.876861559, 125.2232657, 62.90773554, 87.83366614, 12.01999824, 28.51324732, 104.5686167, 1},
            {0.010000000, 272.4121427, 2.558379970, 1.565547684, 1.271567166, 2.758063707, 105.4420403, 1},
            {3.217788970, 957.7374108, 2.274627939, 0.000000001, 1.317690384, 0.375760881, 312.3372610, 1},
            {0.010000000, 1199.094025, -0.09002883, 0.000000001, 0.185904477, 0.875193782, 417.7253140, 1},
        }};
        return p;
    }

    /// Desirabilities in the order MW, ALOGP, HBA, HBD, PSA, ROTB, AROM, ALERTS.
    [[nodiscard]] std::array<double, kDesirabilityCount> evaluate(const DescriptorSet& d) const {
        const std::array<double, kDesirabilityCount> x = {d.mw, d.alogp, double(d.hba), double(d.hbd),
                                                          d.psa, double(d.rotb), double(d.arom), double(d.alerts)};
        std::array<double, kDesirabilityCount> out{};
        for (std::size_t i = 0; i < kDesirabilityCount; ++i) out[i] = fns[i](x[i]);
        return out;
    }

    [[nodiscard]] std::array<double, kDesirabilityCount> weights() const {
        std::array<double, kDesirabilityCount> w{};
        for (std::size_t i = 0; i < kDesirabilityCount; ++i) w[i] = fns[i].weight;
        return w;
    }

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (std::size_t i = 0; i < kDesirabilityCount; ++i) j[kDesirabilityNames[i]] = fns[i];
        return j;
    }

    static DesirabilityParams from_json(const nlohmann::json& j) {
        DesirabilityParams p = defaults();
        for (std::size_t i = 0; i < kDesirabilityCount; ++i)
            if (j.contains(kDesirabilityNames[i])) p.fns[i] = j.at(kDesirabilityNames[i]).get<Desirability>();
        return p;
    }

    static DesirabilityParams load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open desirability parameters: " + path);
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("desirability parameters " + path + ": " + e.what());
        }
    }
};

/// Weighted geometric mean of desirabilities; equal weights give the plain mean.
inline double geometric_mean(std::span<const double> d, std::span<const double> w) {
    if (d.size() != w.size() || d.empty()) throw ArgumentError("geometric_mean: size mismatch");
    double num = 0, den = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        num += w[i] * std::log(d[i]);
        den += w[i];
    }
    if (!(den > 0)) throw ArgumentError("geometric_mean: weights sum to zero");
    return std::exp(num / den);
}

/// Unit QED score (0 best) from desirabilities with unit weights.
inline double qed_from_desirabilities(std::span<const double> d) {
    const std::vector<double> w(d.size(), 1.0);
    return std::clamp(1.0 - geometric_mean(d, w), 0.0, 1.0);
}

inline double qed(const DescriptorSet& d, const DesirabilityParams& p = DesirabilityParams::defaults()) {
    const auto des = p.evaluate(d);
    const auto w = p.weights();
    return std::clamp(1.0 - geometric_mean(des, w), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Synthetic accessibility

struct RingComplexity {
    int spiro = 0;
    int bridgehead = 0;
    bool macrocycle = false; // any ring of >= 8 atoms
};

/// Spiro atoms are shared by two rings meeting in exactly one atom. Bridgeheads
/// are shared atoms of two rings meeting in three or more atoms, taken where
/// the shared path ends (a neighbour in each ring outside the shared set).
inline RingComplexity ring_complexity(const MolecularGraph& g, const RingInfo& rings) {
    RingComplexity rc;
    const std::size_t n = rings.ring_count();
    std::vector<bool> spiro(g.size(), false), bridge(g.size(), false);
    std::vector<std::vector<bool>> member(n, std::vector<bool>(g.size(), false));
    for (std::size_t r = 0; r < n; ++r) {
        for (int a : rings.ring_atoms[r]) member[r][static_cast<std::size_t>(a)] = true;
        if (rings.ring_atoms[r].size() >= 8) rc.macrocycle = true;
    }
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = r + 1; s < n; ++s) {
            std::vector<int> shared;
            for (int a : rings.ring_atoms[r])
                if (member[s][static_cast<std::size_t>(a)]) shared.push_back(a);
            if (shared.size() == 1) spiro[static_cast<std::size_t>(shared[0])] = true;
            if (shared.size() < 3) continue;
            for (int a : shared) {
                bool in_r = false, in_s = false;
                for (const auto& adj : g.neighbors(a)) {
                    const auto b = static_cast<std::size_t>(adj.atom);
                    if (member[r][b] && !member[s][b]) in_r = true;
                    if (member[s][b] && !member[r][b]) in_s = true;
                }
                if (in_r && in_s) bridge[static_cast<std::size_t>(a)] = true;
            }
        }
    for (std::size_t i = 0; i < g.size(); ++i) {
        rc.spiro += spiro[i] ? 1 : 0;
        rc.bridgehead += bridge[i] ? 1 : 0;
    }
    return rc;
}

/// Raw SA score in [1,10] (1 easiest): mean fragment contribution minus
/// size, ring-complexity and macrocycle penalties, mapped onto [1,10].
inline double sa_raw(const MolecularGraph& g, const RingInfo& rings, const FragmentTable& fragments) {
    if (g.empty()) return 1.0;
    const double n = static_cast<double>(g.size());
    const auto rc = ring_complexity(g, rings);
    const double size_penalty = std::pow(n, 1.005) - n;
    const double ring_penalty = std::log10(rc.spiro + 1.0) + std::log10(rc.bridgehead + 1.0);
    const double macro_penalty = rc.macrocycle ? std::log10(2.0) : 0.0;
    const double s = fragments.mean_score(g) - size_penalty - ring_penalty - macro_penalty;
    double raw = 11.0 - (s + 4.0 + 1.0) / 6.5 * 9.0;
    if (raw > 8.0) raw = 8.0 + std::log(raw + 1.0 - 9.0);
    return std::clamp(raw, 1.0, 10.0);
}

inline double normalize_sa(double raw) { return std::clamp((raw - 1.0) / 9.0, 0.0, 1.0); }

inline const FragmentTable& default_sa_table() {
    static const FragmentTable t{};
    return t;
}

inline double sa_score(const MolecularGraph& g, const FragmentTable& fragments = default_sa_table()) {
    return normalize_sa(sa_raw(g, perceive_rings(g), fragments));
}

// ---------------------------------------------------------------------------
// Natural-product likeness

inline const FragmentTable& default_np_table() {
    static const FragmentTable t = [] {
        std::vector<MolecularGraph> np, syn;
        for (auto s : kNaturalProductReference) np.push_back(parse_smiles(s));
        for (auto s : kSyntheticReference) syn.push_back(parse_smiles(s));
        return build_log_odds_table(np, syn);
    }();
    return t;
}

/// Raw score in [-5,5]: mean fragment contribution, log-damped beyond +-4.
inline double np_raw(const MolecularGraph& g, const FragmentTable& fragments) {
    double s = fragments.mean_score(g);
    if (s > 4.0) s = 4.0 + std::log(s - 4.0 + 1.0);
    else if (s < -4.0) s = -4.0 - std::log(-s - 4.0 + 1.0);
    return std::clamp(s, -5.0, 5.0);
}

inline double normalize_np(double raw) { return std::clamp((5.0 - raw) / 10.0, 0.0, 1.0); }

inline double np_score(const MolecularGraph& g, const FragmentTable& fragments = default_np_table()) {
    return normalize_np(np_raw(g, fragments));
}

// ---------------------------------------------------------------------------
// Filters and scalarization

inline double filters(const MatchTarget& target, const std::vector<SubstructurePattern>& patterns) {
    for (const auto& p : patterns)
        if (matches(target, p)) return 1.0;
    return 0.0;
}

inline double filters(const MolecularGraph& g, const std::vector<SubstructurePattern>& patterns = default_alerts()) {
    return filters(MatchTarget(g), patterns);
}

inline double scalarize(const ObjectiveVector& v, const MetricConfig& cfg = {}) {
    double s = 0;
    for (std::size_t i = 0; i < kObjectiveCount; ++i) s += cfg.weights[i] * v[i];
    return std::clamp(s, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Full property evaluation

/// Data-driven scoring models; each part can be replaced from a file.
struct MetricModels {
    DesirabilityParams desirability = DesirabilityParams::defaults();
    FragmentTable sa_fragments = default_sa_table();
    FragmentTable np_fragments = default_np_table();
    DescriptorTables descriptor_tables = default_descriptor_tables();
    std::vector<SubstructurePattern> filter_patterns = default_alerts();
};

/// Raw values on their native scales, kept for reporting.
struct PropertyReport {
    DescriptorSet descriptors;
    double sa_raw = 1;
    double qed_value = 0; // geometric mean, 1 best
    double np_raw = 0;
    bool passes_filters = true;
};

inline PropertyReport evaluate_properties(const MolecularGraph& g, const MetricModels& m = {}) {
    PropertyReport r;
    const auto rings = perceive_rings(g);
    r.descriptors = descriptors(g, rings, m.descriptor_tables);
    r.sa_raw = sa_raw(g, rings, m.sa_fragments);
    r.qed_value = 1.0 - qed(r.descriptors, m.desirability);
    r.np_raw = np_raw(g, m.np_fragments);
    r.passes_filters = filters(g, m.filter_patterns) == 0.0;
    return r;
}

inline ObjectiveVector objectives(const PropertyReport& r, double docking_kcal, const MetricConfig& cfg = {}) {
    return ObjectiveVector(normalize_docking(docking_kcal, cfg), normalize_sa(r.sa_raw),
                           std::clamp(1.0 - r.qed_value, 0.0, 1.0), normalize_np(r.np_raw), r.passes_filters ? 0.0 : 1.0);
}

} // namespace molevo
