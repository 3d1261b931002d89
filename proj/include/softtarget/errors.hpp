#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace softtarget {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimension / shape contract violation (e.g. inner dimensions of a product differ).
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Domain contract violation on values (e.g. a label out of range, a row that is
/// not a probability distribution, an invalid configuration field).
class ValueError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `kind()` distinguishes the failure modes so callers and
/// tests can tell a bad magic number from a truncated payload.
class ParseError : public Error {
public:
    enum class Kind { BadMagic, Truncated, CountMismatch, BadFormat };

    ParseError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Training produced a non-finite loss. Carries the epoch for diagnostics.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t epoch, const std::string& message)
        : Error(message), epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

/// File-system level failure (missing file, failed write).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace softtarget
