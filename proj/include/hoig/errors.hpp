#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace hoig {

/// Invalid parameters or usage. CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent data and files. CLI maps this to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shape mismatch between matrices, naming expected vs actual dimensions.
struct ShapeError : DataError {
    using DataError::DataError;
};

inline std::string shape_string(std::size_t rows, std::size_t cols) {
    std::ostringstream os;
    os << rows << "x" << cols;
    return os.str();
}

inline void require_shape(const std::string& op, const std::string& what,
                          std::size_t expected_rows, std::size_t expected_cols,
                          std::size_t actual_rows, std::size_t actual_cols) {
    if (expected_rows != actual_rows || expected_cols != actual_cols) {
        throw ShapeError(op + ": " + what + " expected " +
                         shape_string(expected_rows, expected_cols) + ", got " +
                         shape_string(actual_rows, actual_cols));
    }
}

}  // namespace hoig
