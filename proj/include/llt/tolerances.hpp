#pragma once

// Numerical tolerances for law fitting, all in one place.

namespace llt::tol {

/// Jacobi stops when the off-diagonal Frobenius norm drops below this fraction of ||C||_F.
inline constexpr double kJacobiOffDiagonal = 1e-12;
inline constexpr int kJacobiMaxSweeps = 100;

/// Required eigen-residual ||Cw - lambda w|| relative to max(1, ||C||_F).
inline constexpr double kEigenResidual = 1e-9;

/// Law coefficients must have unit norm to this tolerance (checked on load).
inline constexpr double kUnitNorm = 1e-9;

/// Training variance of the law residual must equal lambda to this relative tolerance.
inline constexpr double kVarianceIdentity = 1e-10;

/// Eigenvalues within this fraction of trace(C) of each other (or of zero) are numerically equal.
inline constexpr double kNumericZero = 1e-12;

/// PSD check: smallest eigenvalue >= -kPsd * trace(C).
inline constexpr double kPsd = 1e-10;

/// Components below this magnitude are skipped when fixing the eigenvector sign.
inline constexpr double kSignComponent = 1e-9;

}  // namespace llt::tol
