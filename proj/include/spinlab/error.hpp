#pragma once

#include <stdexcept>
#include <string>

namespace spinlab {

// Validation and domain errors carry a stable kind string so that the CLI can
// emit machine-readable error objects.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

// Raised when a computation would exceed a size guard.
class ResourceError : public Error {
public:
    using Error::Error;
};

}  // namespace spinlab
