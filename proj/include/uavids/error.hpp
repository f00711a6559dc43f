#pragma once

#include <stdexcept>
#include <string>

namespace uavids {

// Bad or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed, missing or inconsistent data (CLI exit code 3).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite loss or gradient during training (CLI exit code 4).
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor/layer shape mismatch. Treated as a data error by the CLI.
class ShapeError : public DataError {
public:
    using DataError::DataError;
};

}  // namespace uavids
