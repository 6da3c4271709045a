#pragma once

#include <stdexcept>
#include <string>

namespace mvpr {

// Base for everything this library throws.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad files, bad flags, violated preconditions on user-supplied data. CLI exit 2.
struct InputError : Error {
    explicit InputError(const std::string& msg) : Error(msg) {}
};

// Non-finite losses, degenerate configurations discovered mid-computation. CLI exit 3.
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Raised by the renderer when no face survives near-plane culling.
struct BehindCameraError : NumericError {
    explicit BehindCameraError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace mvpr
