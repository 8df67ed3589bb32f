#pragma once

#include <stdexcept>
#include <string>

namespace robin {

/// Requested certainty could not be reached at the permitted precision.
class PrecisionError : public std::runtime_error {
public:
    explicit PrecisionError(const std::string& what) : std::runtime_error(what) {}
};

/// A configured resource cap refused the operation.
class CapacityError : public std::runtime_error {
public:
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// Checkpoint I/O failed; the computation itself is unaffected.
class CheckpointError : public std::runtime_error {
public:
    explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace robin
