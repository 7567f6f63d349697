#pragma once

#include <stdexcept>
#include <string>

namespace rehabkit {

/// Raised when an input file or recording fails validation.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised on model file corruption, version or schema mismatches.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace rehabkit
