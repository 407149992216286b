#pragma once

#include <stdexcept>
#include <string>

namespace survsynth {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad schema, bad CSV content, bad configuration. Exit code 2.
class SchemaError : public Error {
public:
    using Error::Error;
};

// A fitted model or plan that breaks a contract downstream code relies on
// (non-monotone cumulative hazard, legend mismatch). Exit code 3.
class ModelContractError : public Error {
public:
    using Error::Error;
};

// Optimisation or linear algebra that failed to produce a usable answer.
// Exit code 4.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularDesignError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace survsynth
