#pragma once

#include <stdexcept>
#include <string>

namespace wavepacket {

/// Invalid parameter combination or malformed input. Maps to CLI exit code 2.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation left the representable domain (overflowing envelope argument,
/// gamma pole, feature outside the window). Maps to CLI exit code 3.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Linear-algebra or solver failure (singular tridiagonal pivot). Exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wavepacket
