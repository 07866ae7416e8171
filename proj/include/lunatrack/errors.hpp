#pragma once

#include <stdexcept>
#include <string>

namespace lunatrack {

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Invalid or inconsistent configuration (lens, radar, platform).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Scenario, config or log file that cannot be parsed.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A request would exceed a configured resource budget.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// I/O failure; the message carries the offending path.
struct FileError : std::runtime_error {
    FileError(const std::string& what, std::string path)
        : std::runtime_error(what + ": " + path), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Caller broke an operation's precondition (dimensions, empty windows).
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Integration produced a non-finite state.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lunatrack
