#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssiter {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vector/matrix dimensions disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A matrix fails normalized diagonal dominance, or has a zero diagonal entry.
class NotDominantError : public Error {
public:
    NotDominantError(const std::string& what, std::size_t row) : Error(what), row_(row) {}
    [[nodiscard]] std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// Malformed text input (edge files, CSV).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line) : Error(what), line_(line) {}
    /// 1-based line number, 0 when the error is not tied to a line.
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Invalid run/experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace ssiter
