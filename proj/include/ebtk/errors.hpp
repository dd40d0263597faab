// errors.hpp — exception taxonomy shared by all ebtk modules
#pragma once

#include <stdexcept>
#include <string>

namespace ebtk {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonHermitianInput : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct BadShape : Error { using Error::Error; };
struct BadPermutation : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct DimensionCap : Error { using Error::Error; };
struct NotTracePreserving : Error { using Error::Error; };
struct InvalidHolevoForm : Error { using Error::Error; };
struct InconsistentConstraints : Error { using Error::Error; };
struct NotAValidDecomposition : Error { using Error::Error; };
struct InvalidDocument : Error { using Error::Error; };

}  // namespace ebtk
