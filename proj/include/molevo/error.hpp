#pragma once

/// @file error.hpp
/// @brief Exception hierarchy shared by all molevo components.

#include <cstddef>
#include <stdexcept>
#include <string>

namespace molevo {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed textual input. `position` is 1-based (token index or character offset).
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what), position_(position) {}
    [[nodiscard]] std::size_t position() const noexcept { return position_; }

  private:
    std::size_t position_;
};

class ArgumentError : public Error {
  public:
    using Error::Error;
};

/// A documented precondition was violated by the caller.
class ContractViolation : public Error {
  public:
    using Error::Error;
};

class InitializationError : public Error {
  public:
    using Error::Error;
};

class MutationError : public Error {
  public:
    using Error::Error;
};

class GatewayError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

} // namespace molevo
