#pragma once

#include <stdexcept>
#include <string>

namespace qgs {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Operand shapes do not conform.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A cross-check that should hold for valid inputs failed (e.g. a result
// that must be unitary is not, or two algebraic routes disagree).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

// Graph file could not be parsed or violates the schema.
class ParseError : public Error {
public:
    using Error::Error;
};

// Star decomposition or multiway composition precondition violated
// (potential support crossing a cut point, self-link, ...).
class DecompositionError : public Error {
public:
    using Error::Error;
};

// The boundary-value system is singular at this momentum.
class DegenerateSystemError : public Error {
public:
    DegenerateSystemError(const std::string& what, double sigma_min)
        : Error(what), sigma_min_(sigma_min) {}
    double sigma_min() const { return sigma_min_; }

private:
    double sigma_min_;
};

// The link block of the composition formula is singular ("condition A"),
// which signals an eigenvalue embedded in the continuous spectrum.
class ConditionAError : public Error {
public:
    ConditionAError(const std::string& what, double sigma_min)
        : Error(what), sigma_min_(sigma_min) {}
    double sigma_min() const { return sigma_min_; }

private:
    double sigma_min_;
};

} // namespace qgs
