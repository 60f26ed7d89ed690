#pragma once

namespace heis::tol {

// Algebraic identities in double precision.
inline constexpr double kAlgebraic = 1e-12;
// Symmetry check for user-supplied metrics.
inline constexpr double kSymmetry = 1e-12;
// U^dagger U = I check for unitary_act.
inline constexpr double kUnitary = 1e-10;
// Refuse to solve the comparison PDE below this ellipticity constant.
inline constexpr double kMinEllipticity = 1e-10;
// Hessian sup-norm where the graph-plane chart stops controlling tilt.
inline constexpr double kConvexityGuard = 0.9;

}  // namespace heis::tol

namespace heis {

inline constexpr const char* kSchemaVersion = "1.0.0";

}  // namespace heis
