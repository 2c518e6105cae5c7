#pragma once

/// @file alerts.hpp
/// @brief Built-in structural alert patterns and loading of alert files.
///
/// The default set is a compact medicinal-chemistry alert list in the
/// spirit of MCF/PAINS-style filters. Alert files are JSON objects mapping
/// a pattern name to its pattern text.

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "molevo/error.hpp"
#include "molevo/substructure.hpp"

namespace molevo {

inline const std::vector<std::pair<std::string, std::string>>& default_alert_sources() {
    static const std::vector<std::pair<std::string, std::string>> sources = {
        {"nitro_nitroso_aromatic", "cN=O"},
        {"peroxide", "O-O"},
        {"hypohalite", "O-[F,Cl,Br,I]"},
        {"acyl_halide", "C(=O)[F,Cl,Br,I]"},
        {"michael_acceptor_carbonyl", "C=C-C=O"},
        {"michael_acceptor_nitrile", "C=C-C#N"},
        {"aldehyde", "[CH1;!R]=O"},
        {"azo", "N=N"},
        {"hydrazine", "[N;!a]-[N;!a]"},
        {"n_o_single", "[N;!a]-[O;!a]"},
        {"isocyanate", "N=C=O"},
        {"cumulene", "*=C=*"},
        {"thiol", "[SH1]"},
        {"polyene", "[C;!R]=[C;!R]-[C;!R]=[C;!R]"},
        {"long_aliphatic_chain", "[C;!R]-[C;!R]-[C;!R]-[C;!R]-[C;!R]-[C;!R]-[C;!R]-[C;!R]"},
    };
    return sources;
}

inline std::vector<SubstructurePattern> compile_patterns(const std::vector<std::pair<std::string, std::string>>& sources) {
    std::vector<SubstructurePattern> out;
    out.reserve(sources.size());
    for (const auto& [name, text] : sources) out.push_back(parse_pattern(name, text));
    return out;
}

inline const std::vector<SubstructurePattern>& default_alerts() {
    static const std::vector<SubstructurePattern> patterns = compile_patterns(default_alert_sources());
    return patterns;
}

inline std::vector<SubstructurePattern> load_alerts(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open alert file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("alert file " + path + ": " + e.what());
    }
    if (!j.is_object() || j.empty()) throw ConfigError("alert file " + path + " must be a non-empty object");
    std::vector<std::pair<std::string, std::string>> sources;
    for (const auto& [name, text] : j.items()) {
        if (!text.is_string()) throw ConfigError("alert '" + name + "' must be a string pattern");
        sources.emplace_back(name, text.get<std::string>());
    }
    return compile_patterns(sources);
}

/// Number of patterns with at least one embedding.
inline int count_alerts(const MatchTarget& target, const std::vector<SubstructurePattern>& patterns) {
    int n = 0;
    for (const auto& p : patterns) n += matches(target, p) ? 1 : 0;
    return n;
}

} // namespace molevo
