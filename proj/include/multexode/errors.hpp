#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace multexode {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input that can never be valid (bad grid, bad config, malformed tables).
class InputError : public Error {
public:
    using Error::Error;
};

class InvalidGrid : public InputError {
public:
    using InputError::InputError;
};

/// A pointwise division (or negative power) met a value with |g| below the floor.
/// `x` is the offending node closest to 0.
class DivisorTooSmall : public Error {
public:
    DivisorTooSmall(double x, std::string what_divided);
    double x;
};

/// A sampled value became non-finite; `x` is the offending node closest to 0.
class Overflow : public Error {
public:
    Overflow(double x, std::string context);
    double x;
};

class SyntaxError : public InputError {
public:
    SyntaxError(std::size_t offset, std::vector<std::string> expected, std::string found);
    std::size_t offset;
    std::vector<std::string> expected;
};

class NonDifferentiable : public InputError {
public:
    using InputError::InputError;
};

class UnboundCoefficient : public InputError {
public:
    explicit UnboundCoefficient(std::string name);
    std::string name;
};

/// The leading coefficient of an auxiliary equation vanishes at 0, or the
/// equation has lower order than the construction requires.
class DegenerateLeading : public Error {
public:
    using Error::Error;
};

/// Shrinking the validity interval left fewer than the minimum number of cells.
class ValidityCollapsed : public Error {
public:
    using Error::Error;
};

class NonMonotoneAbscissae : public InputError {
public:
    using InputError::InputError;
};

class CoverageGap : public InputError {
public:
    using InputError::InputError;
};

}  // namespace multexode
