#pragma once

#include <stdexcept>
#include <string>

namespace pwl {

// Invalid or inconsistent input data.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A configured resource cap was exceeded.
struct CapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An internal invariant failed to hold.
struct InternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TooFewVertices : InputError {
    using InputError::InputError;
};
struct NonPlanar : InputError {
    using InputError::InputError;
};
struct Degenerate : InputError {
    using InputError::InputError;
};
struct LengthMismatch : InputError {
    using InputError::InputError;
};
struct DimMismatch : InputError {
    using InputError::InputError;
};
struct UnsupportedLayer : InputError {
    using InputError::InputError;
};
struct InvalidWeightId : InputError {
    using InputError::InputError;
};
struct OutsideDomain : InputError {
    using InputError::InputError;
};
struct DegeneratePartition : InputError {
    using InputError::InputError;
};
struct EmptyInterval : InputError {
    using InputError::InputError;
};
struct ActivationChanged : InputError {
    using InputError::InputError;
};
struct PartitionCapExceeded : CapError {
    using CapError::CapError;
};
struct FrontierCapExceeded : CapError {
    using CapError::CapError;
};

}  // namespace pwl
