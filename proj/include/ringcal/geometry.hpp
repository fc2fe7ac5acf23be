#pragma once

#include "ringcal/util.hpp"

#include <cstdint>

namespace ringcal {

/// Planar sensor positions scattered over an annulus of central radius r0
/// and width a, i.e. every radius lies in [r0 - a/2, r0 + a/2]. Units are
/// meters throughout.
struct SensorLayout {
  Eigen::Matrix<double, Eigen::Dynamic, 2> positions;
  double r0 = 0.0;
  double a = 0.0;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(positions.rows()); }
};

/// Draws n sensors area-uniformly over the annulus. Angles are uniform on
/// [0, 2*pi); the radial offset rho in [-a/2, a/2] has density
/// (r0 + rho) / (r0 * a) and is sampled through its closed-form inverse CDF,
///   rho = -r0 + sqrt((r0 - a/2)^2 + 2*r0*a*u),  u ~ U[0, 1),
/// so a layout is fully determined by the seed.
/// Throws std::invalid_argument unless n >= 1, r0 > 0 and 0 <= a < 2*r0.
SensorLayout generate_ring_layout(int n, double r0, double a,
                                  std::uint64_t seed);

/// Euclidean distances between all sensor pairs. Each unordered pair is
/// computed once and mirrored, so the result is bit-exactly symmetric with a
/// zero diagonal.
Matrix pairwise_distance_matrix(const SensorLayout& layout);

/// Elementwise square of a distance matrix.
Matrix squared_distance_matrix(const Matrix& distances);

struct RankCertificate {
  int numeric_rank = 0;
  Vector singular_values;
  int expected_rank = 0;  // 3 for sensors on an exact circle, 4 otherwise
  bool conforms = false;  // numeric_rank <= expected_rank
};

/// Counts singular values above 1e-9 * sigma_1 and reports the spectrum.
/// Squared distance matrices of planar layouts have numeric rank at most 4,
/// exactly 3 when all sensors sit on one circle.
RankCertificate rank_certificate(const Matrix& sq_distances, bool on_circle);

}  // namespace ringcal
