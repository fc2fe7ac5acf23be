#pragma once

#include "ringcal/util.hpp"

#include <string>

namespace ringcal {

/// Coordinates recovered by an embedding, centered at the origin. The metric
/// below is invariant to rigid transforms, so no canonical orientation is
/// imposed on coords.
struct PositionEstimate {
  Matrix coords;  // n x eta, meters
  std::string source;
  // Set when one of the top eta eigenvalues of the doubly centered Gram
  // matrix was negative beyond -1e-8 * sigma_1 (non-Euclidean input).
  bool negative_spectrum = false;
  // Magnitude of the largest negative eigenvalue clamped to zero.
  double clamped = 0.0;
};

/// L = I - (1/n) 1 1^T: symmetric, idempotent, rank n-1, L 1 = 0.
Matrix centering_matrix(int n);

/// Classical metric MDS: eigendecomposition of -0.5 * L * Db * L, keeping the
/// eta largest eigenvalues (clamped at zero) and returning U_eta *
/// Sigma_eta^(1/2). Exact distance matrices are recovered exactly up to a
/// rigid transform.
PositionEstimate classical_mds(const Matrix& sq_distances, int eta);

/// (1/n) * ||L X X^T L - L Xh Xh^T L||_F in meters^2; zero iff the two
/// configurations agree up to rotation, reflection and translation.
double position_distance(const Matrix& x, const Matrix& xh);

/// Rigid transform (rotation/reflection + translation, no scaling) of
/// `estimate` minimizing the Frobenius distance to `reference`.
Matrix procrustes_align(const Matrix& reference, const Matrix& estimate);

}  // namespace ringcal
