// tolerances.hpp — single source of truth for numeric thresholds
#pragma once

namespace ebtk {

// Shared across modules and mirrored verbatim by test assertions.
struct Tolerances {
    double herm = 1e-12;   // per-entry Hermiticity slack, absolute
    double psd = 1e-9;     // allowed negative eigenvalue on "PSD" matrices
    double recon = 1e-10;  // relative eigendecomposition reconstruction error
};

inline constexpr Tolerances tol{};

}  // namespace ebtk
