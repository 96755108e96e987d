#pragma once

#include <stdexcept>
#include <string>

namespace liteshield {

// Base of every error the library raises. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad invocation or configuration (unknown key, out-of-range parameter).
class UsageError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent input data (CSV, schema, labels, feature values).
class DataError : public Error {
public:
    using Error::Error;
};

// Model file decoding failures, distinguished by kind.
class FormatError : public Error {
public:
    enum class Kind { bad_magic, unsupported_version, truncated, corrupt };

    FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace liteshield
