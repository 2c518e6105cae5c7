#pragma once

/// @file log.hpp
/// @brief Process-wide warning sink. Defaults to stderr; tests may capture it.

#include <functional>
#include <iostream>
#include <mutex>
#include <string>

namespace molevo {

using WarningSink = std::function<void(const std::string&)>;

namespace detail {
inline std::mutex& warning_mutex() {
    static std::mutex m;
    return m;
}
inline WarningSink& warning_sink() {
    static WarningSink sink = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    return sink;
}
} // namespace detail

/// Installs `sink` and returns the previous one.
inline WarningSink set_warning_sink(WarningSink sink) {
    std::lock_guard lock(detail::warning_mutex());
    std::swap(detail::warning_sink(), sink);
    return sink;
}

inline void warn(const std::string& msg) {
    std::lock_guard lock(detail::warning_mutex());
    if (detail::warning_sink()) detail::warning_sink()(msg);
}

} // namespace molevo
