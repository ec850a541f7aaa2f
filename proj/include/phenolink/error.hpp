#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phenolink {

// Base for every error the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed annotation line. `line` is 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EncodingError : public ParseError {
public:
    using ParseError::ParseError;
};

// A row has fewer fields than the column spec asks for.
class ColumnError : public ParseError {
public:
    using ParseError::ParseError;
};

// Caller handed in data that violates an operation's precondition.
class InputError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Numerical trouble during training (non-finite values).
class TrainingError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

// A metric that has no value for the given labels (e.g. AUROC with one class).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

}  // namespace phenolink
