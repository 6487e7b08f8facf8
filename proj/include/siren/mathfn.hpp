#pragma once

namespace siren {

/// -1/e, the left end of the principal real branch.
inline constexpr double kBranchPoint = -0.36787944117144233;

/// Tolerance below -1/e that is still accepted as the branch point.
inline constexpr double kLambertDomainTolerance = 1e-15;

/// Principal real branch of the Lambert W function, w * exp(w) = x, w >= -1.
///
/// Halley iteration away from the branch point, a square-root series in
/// p = sqrt(2(e x + 1)) just above it. Inputs within rounding of -1/e return
/// exactly -1. Throws std::domain_error for x < -1/e - 1e-15 and for NaN.
double lambert_w0(double x);

}  // namespace siren
