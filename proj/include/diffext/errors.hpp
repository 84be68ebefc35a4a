#pragma once

#include <stdexcept>
#include <string>

namespace diffext {

// Inputs whose shapes or grids do not line up.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A value left the domain where an operation is defined (ln of a zero crossing,
// a singular matrix, a non-regular diffeomorphism).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// An iterative solver ran out of steps.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Broken internal invariant, e.g. a coefficient array that lost Hermitian symmetry.
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace diffext
