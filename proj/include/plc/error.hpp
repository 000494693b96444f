#pragma once

#include <stdexcept>
#include <string>

namespace plc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A robot-description document does not match the expected schema.
class SchemaError : public Error {
public:
    SchemaError(const std::string& field, const std::string& what)
        : Error("field '" + field + "': " + what), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A value is well-formed but violates a model constraint.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// An operation was asked to do something the model cannot do.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Reading or writing a file failed, or a binary file is malformed.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace plc
