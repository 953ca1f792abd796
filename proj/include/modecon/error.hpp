#pragma once

#include <stdexcept>
#include <string>

namespace modecon {

// Bad arguments or violated preconditions. The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Dimension mismatches between matrices, vectors, networks and datasets.
class DimensionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Numerical failure at run time (non-finite values, divergence). Exit code 2.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed files. Exit code 2.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace modecon
