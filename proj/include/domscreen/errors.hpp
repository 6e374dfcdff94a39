#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace domscreen {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented range or precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Caller asked for something the configuration does not define (unknown feature kind, bad grid).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A file or payload could not be parsed. Carries the 1-based line or 0-based byte offset when known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what,
                        std::optional<std::size_t> line = std::nullopt,
                        std::optional<std::size_t> byte_offset = std::nullopt)
        : Error(what), line_(line), byte_offset_(byte_offset) {}

    std::optional<std::size_t> line() const { return line_; }
    std::optional<std::size_t> byte_offset() const { return byte_offset_; }

private:
    std::optional<std::size_t> line_;
    std::optional<std::size_t> byte_offset_;
};

/// Transient upstream failure (network, timeout, non-200). Safe to retry.
class RetryableError : public Error {
public:
    RetryableError(const std::string& provider, const std::string& what)
        : Error(provider + ": " + what), provider_(provider) {}

    const std::string& provider() const { return provider_; }

private:
    std::string provider_;
};

}  // namespace domscreen
