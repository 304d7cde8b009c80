#pragma once

#include <stdexcept>
#include <string>

namespace isac {

/// Malformed or invariant-violating problem instance / model file.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameters outside the feasible region (e.g. a distortion target below
/// the smallest achievable expected distortion).
class InfeasibleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace isac
