#include "ringcal/geometry.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ringcal {

SensorLayout generate_ring_layout(int n, double r0, double a,
                                  std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_ring_layout: n must be >= 1");
  if (!(r0 > 0.0))
    throw std::invalid_argument("generate_ring_layout: r0 must be positive");
  if (a < 0.0 || a >= 2.0 * r0)
    throw std::invalid_argument("generate_ring_layout: require 0 <= a < 2*r0");

  SensorLayout layout;
  layout.positions.resize(n, 2);
  layout.r0 = r0;
  layout.a = a;
  layout.seed = seed;

  std::mt19937_64 rng(mix_seed(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r_inner = r0 - 0.5 * a;
  for (int i = 0; i < n; ++i) {
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    double radius = r0;
    if (a > 0.0) {
      const double u = unit(rng);
      radius = std::sqrt(r_inner * r_inner + 2.0 * r0 * a * u);
    }
    layout.positions(i, 0) = radius * std::cos(theta);
    layout.positions(i, 1) = radius * std::sin(theta);
  }
  return layout;
}

Matrix pairwise_distance_matrix(const SensorLayout& layout) {
  const int n = layout.size();
  Matrix d = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dist =
          (layout.positions.row(i) - layout.positions.row(j)).norm();
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return d;
}

Matrix squared_distance_matrix(const Matrix& distances) {
  return distances.array().square().matrix();
}

RankCertificate rank_certificate(const Matrix& sq_distances, bool on_circle) {
  RankCertificate cert;
  cert.expected_rank = on_circle ? 3 : 4;
  Eigen::BDCSVD<Matrix> svd(sq_distances);
  cert.singular_values = svd.singularValues();
  constexpr double kTol = 1e-9;
  const double top =
      cert.singular_values.size() > 0 ? cert.singular_values(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < cert.singular_values.size(); ++i) {
    if (cert.singular_values(i) > kTol * top) ++rank;
  }
  cert.numeric_rank = rank;
  cert.conforms = rank <= cert.expected_rank;
  return cert;
}

}  // namespace ringcal
