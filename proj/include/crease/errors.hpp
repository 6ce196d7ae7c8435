#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crease {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
    ok = 0,
    usage = 1,
    parse = 2,
    sampler = 3,
    io = 4,
    internal = 5,
};

/// Malformed score file. Carries the 1-based line number of the offending record.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Parameter vector length does not match the career it is applied to.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Covariance matrix could not be factorized even after jitter escalation.
class FactorizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Nested sampling could not make progress (likelihood plateau or step-size pathology).
class SamplerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Posterior weights too concentrated to resample from.
class DegenerateWeightsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fit archive is unreadable, truncated, or of an unsupported version.
class ArchiveError : public IoError {
public:
    using IoError::IoError;
};

}  // namespace crease
