#pragma once

#include <stdexcept>
#include <string>

namespace idle_energy {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input parameters outside their documented domain (negative power, bad grid, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Argument outside a function's domain, e.g. a negative idle length.
class DomainError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class GraphError : public Error {
public:
    using Error::Error;
};

/// A model cannot be built for the given instance or energy function.
class ModelError : public Error {
public:
    using Error::Error;
};

/// Solution vectors do not match the instance they are checked against.
class StructuralError : public Error {
public:
    using Error::Error;
};

class FeasibilityError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

/// The exact oracle refuses instances above its configured size.
class SizeError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace idle_energy
