#pragma once

#include <stdexcept>
#include <string>

namespace dscex {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidChain : public Error {
public:
    using Error::Error;
};

class InvalidSpace : public Error {
public:
    using Error::Error;
};

class MismatchedSpaces : public Error {
public:
    using Error::Error;
};

class IndexOverflow : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Construction failures on the base space.
class ConstructionError : public Error {
public:
    using Error::Error;
};

class NoZ0Found : public ConstructionError {
public:
    using ConstructionError::ConstructionError;
};

class ComplementTooLarge : public ConstructionError {
public:
    using ConstructionError::ConstructionError;
};

class MisalignedCellMeasure : public ConstructionError {
public:
    using ConstructionError::ConstructionError;
};

class MisalignedFunction : public Error {
public:
    using Error::Error;
};

// Residuality probe preconditions.
class NormTooLarge : public Error {
public:
    using Error::Error;
};

class SplitNotFound : public Error {
public:
    using Error::Error;
};

}  // namespace dscex
