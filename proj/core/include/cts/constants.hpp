#pragma once

namespace cts {

// Shared numerical constants.  All quantities SI unless noted.

// Lengths below this are treated as degenerate (m).
inline constexpr double kLengthEpsilon = 1e-12;

// Singular values below this fraction of the largest one count as zero when
// measuring the null space of the equilibrium matrix.
inline constexpr double kSvdRelTol = 1e-8;

// Static equilibrium residual tolerance (N).
inline constexpr double kResidualTol = 1e-6;

// Relative tolerance for member-force comparisons.
inline constexpr double kForceRelTol = 1e-8;

// Smallest tangent-stiffness eigenvalue above which a prestressed state is
// declared stable (N/m).
inline constexpr double kStabilityTol = 1e-6;

// Default number of vibration modes reported.
inline constexpr int kDefaultModeCount = 10;

// Standard gravity (m/s^2).
inline constexpr double kGravity = 9.80665;

}  // namespace cts
