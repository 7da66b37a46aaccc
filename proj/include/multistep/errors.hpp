#pragma once

#include <stdexcept>
#include <string>

namespace multistep {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor or vector dimensions do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Non-finite value where a finite one is required.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or argument value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input file could not be read or validated. Carries the 1-based row when known;
/// with a file name the message reads "file:row: what".
class IngestError : public Error {
public:
    IngestError(const std::string& what, std::size_t row = 0, const std::string& file = {})
        : Error(format(what, row, file)), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    static std::string format(const std::string& what, std::size_t row, const std::string& file) {
        if (!row) return what;
        if (file.empty()) return what + " (row " + std::to_string(row) + ")";
        return file + ":" + std::to_string(row) + ": " + what;
    }

    std::size_t row_;
};

/// Caller violated an operation contract (wrong model kind, empty candidate list).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Rollout trajectories do not line up with their source windows.
class AlignmentError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

} // namespace multistep
