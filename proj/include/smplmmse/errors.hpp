#pragma once

#include <stdexcept>
#include <string>

namespace smplmmse {

/// Invalid user-supplied configuration or arguments (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. snr <= 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Factorization failure or non-positive variance met mid-computation (CLI exit code 2).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace smplmmse
