#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sar {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file (mask, frames); message names the offending field/line.
struct FormatError : Error {
    using Error::Error;
};

/// Precondition violation on operation inputs (empty counts, empty survey set, ...).
struct DomainError : Error {
    using Error::Error;
};

/// Cross-reference failure, e.g. a waypoint id with no known position.
struct ConsistencyError : Error {
    using Error::Error;
};

/// API misuse (calling an operation outside its contract).
struct ContractError : Error {
    using Error::Error;
};

/// Planner output that cannot be decoded into a structured plan.
struct ParseError : Error {
    using Error::Error;
};

/// Network-level failure talking to a remote planner (after retries).
struct TransportError : Error {
    using Error::Error;
};

/// Remote planner returned a non-success status; carries status and body excerpt.
struct ServiceError : Error {
    ServiceError(int status_code, const std::string& what) : Error(what), status(status_code) {}
    int status;
};

/// Missing or invalid configuration; collects every issue found, not just the first.
struct ConfigError : Error {
    explicit ConfigError(std::vector<std::string> problems)
        : Error(join(problems)), issues(std::move(problems)) {}
    explicit ConfigError(const std::string& problem) : ConfigError(std::vector<std::string>{problem}) {}

    std::vector<std::string> issues;

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out;
        for (const auto& s : v) {
            if (!out.empty()) out += "; ";
            out += s;
        }
        return out;
    }
};

} // namespace sar
