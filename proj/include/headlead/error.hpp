#pragma once

#include <stdexcept>
#include <string>

namespace headlead {

/// Error categories surfaced across the library and mapped onto the
/// C API status codes.
enum class ErrorKind {
    invalid_argument,
    parse,
    degenerate_orientation,
    numeric_degeneracy,
    degenerate_sample,
    config,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace headlead
