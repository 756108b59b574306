#pragma once

#include <stdexcept>
#include <string>

namespace embrec {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// Malformed input file (bad header, bad row, unbalanced quote, ...).
class FormatError : public Error {
public:
    using Error::Error;
};

/// An argument violates a documented precondition.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A user, movie, or token is not present where it must be.
class LookupError : public Error {
public:
    using Error::Error;
};

/// An index is outside the addressed container.
class IndexError : public Error {
public:
    using Error::Error;
};

/// A model file fails validation (tag, version, or shape).
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// A path cannot be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace embrec
