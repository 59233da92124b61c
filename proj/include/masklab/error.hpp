#pragma once

#include <stdexcept>
#include <string>

namespace masklab {

// Shape/dimension mismatches between tensors.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Parameter outside its legal range (drop rate, sigma, division by zero, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Caller violated an API precondition (non-scalar backward root, missing
// sample ids in fixed mode, ...).
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

// Bad experiment configuration; maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace masklab
