#pragma once

#include <stdexcept>
#include <string>

namespace spikegrid {

// Base class for every error the library raises on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor shapes do not line up for the requested operation.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Input violates a mathematical precondition (e.g. non-symmetric matrix).
class DomainError : public Error {
public:
    using Error::Error;
};

// An iterative routine exhausted its iteration budget.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// A layer/network specification is internally inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Dataset contents violate a contract (empty class, label out of range, ...).
class DataError : public Error {
public:
    using Error::Error;
};

// Training produced a state it cannot continue from (non-finite gradient).
class TrainingError : public Error {
public:
    using Error::Error;
};

// A numeric kernel produced NaN/Inf.
class NumericError : public Error {
public:
    using Error::Error;
};

// File format / serialization problems.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace spikegrid
