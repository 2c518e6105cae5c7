#pragma once

/// @file element.hpp
/// @brief Element table: symbols, standard valences and atomic masses.

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace molevo {

enum class Element : std::uint8_t { H, B, C, N, O, F, P, S, Cl, Br, I };

inline constexpr std::size_t kElementCount = 11;

struct ElementInfo {
    std::string_view symbol;
    int max_valence;
    double mass; // standard atomic weight, Da
};

inline constexpr std::array<ElementInfo, kElementCount> kElementTable{{
    {"H", 1, 1.008},
    {"B", 3, 10.81},
    {"C", 4, 12.011},
    {"N", 3, 14.007},
    {"O", 2, 15.999},
    {"F", 1, 18.998},
    {"P", 3, 30.974},
    {"S", 2, 32.06},
    {"Cl", 1, 35.45},
    {"Br", 1, 79.904},
    {"I", 1, 126.904},
}};

inline constexpr const ElementInfo& info(Element e) noexcept {
    return kElementTable[static_cast<std::size_t>(e)];
}

inline constexpr std::string_view symbol(Element e) noexcept { return info(e).symbol; }
inline constexpr int max_valence(Element e) noexcept { return info(e).max_valence; }
inline constexpr double atomic_mass(Element e) noexcept { return info(e).mass; }

/// Case-sensitive lookup ("Cl", not "CL").
inline std::optional<Element> element_from_symbol(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kElementCount; ++i)
        if (kElementTable[i].symbol == s) return static_cast<Element>(i);
    return std::nullopt;
}

/// Elements that may carry the aromatic flag (lowercase in SMILES).
inline constexpr bool can_be_aromatic(Element e) noexcept {
    return e == Element::C || e == Element::N || e == Element::O || e == Element::S ||
           e == Element::P || e == Element::B;
}

} // namespace molevo
