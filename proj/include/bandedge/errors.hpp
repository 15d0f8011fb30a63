#pragma once

#include <stdexcept>
#include <string>

namespace bandedge {

/// Invalid arguments or parameters that violate a documented precondition.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation would exceed its configured size budget.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine failed (non-convergence, residual check, symmetry check).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An enumerated object has a shape that the combinatorics says is impossible.
class StructuralError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace bandedge
