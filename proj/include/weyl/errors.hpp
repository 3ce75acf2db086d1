#pragma once

#include <stdexcept>
#include <string>

namespace weyl {

// Bad or unreadable input: malformed JSON, missing files, invalid parameters.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A mathematical hypothesis of the model is not met (non-degeneracy fails,
// sector outside the trusted window, broken ellipticity, ...).
class HypothesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Eigensolver or quadrature did not reach its certified accuracy.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace weyl
