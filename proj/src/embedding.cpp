#include "ringcal/embedding.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace ringcal {
namespace {

Matrix centered(const Matrix& x) {
  return x.rowwise() - x.colwise().mean();
}

}  // namespace

Matrix centering_matrix(int n) {
  if (n < 1) throw std::invalid_argument("centering_matrix: n must be >= 1");
  return Matrix::Identity(n, n) -
         Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
}

PositionEstimate classical_mds(const Matrix& sq_distances, int eta) {
  const Eigen::Index n = sq_distances.rows();
  if (sq_distances.cols() != n)
    throw std::invalid_argument("classical_mds: matrix must be square");
  if (eta < 1) throw std::invalid_argument("classical_mds: eta must be >= 1");
  if (eta > n) throw std::invalid_argument("classical_mds: eta exceeds n");

  // -0.5 * L * Db * L via double centering; symmetrized so that completed
  // matrices that are symmetric only up to round-off stay admissible.
  const Vector row_mean = sq_distances.rowwise().mean();
  const Vector col_mean = sq_distances.colwise().mean();
  const double total_mean = sq_distances.mean();
  Matrix gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      gram(i, j) =
          -0.5 * (sq_distances(i, j) - row_mean(i) - col_mean(j) + total_mean);
    }
  }
  gram = 0.5 * (gram + gram.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("classical_mds: eigendecomposition failed");
  const Vector& lambda = eig.eigenvalues();  // ascending
  const double sigma1 =
      std::max(std::abs(lambda(0)), std::abs(lambda(n - 1)));

  PositionEstimate est;
  est.source = "mds";
  est.coords.resize(n, eta);
  for (int k = 0; k < eta; ++k) {
    const Eigen::Index idx = n - 1 - k;
    const double value = lambda(idx);
    if (value < 0.0) {
      est.clamped = std::max(est.clamped, -value);
      if (value < -1e-8 * sigma1) est.negative_spectrum = true;
    }
    est.coords.col(k) =
        eig.eigenvectors().col(idx) * std::sqrt(std::max(value, 0.0));
  }
  // eigenvectors of the doubly centered Gram matrix are orthogonal to the
  // all-ones vector up to round-off; make the centering exact
  est.coords = centered(est.coords);
  return est;
}

double position_distance(const Matrix& x, const Matrix& xh) {
  if (x.rows() != xh.rows() || x.cols() != xh.cols())
    throw std::invalid_argument("position_distance: dimension mismatch");
  const Matrix xc = centered(x);
  const Matrix yc = centered(xh);
  const Matrix diff = xc * xc.transpose() - yc * yc.transpose();
  return diff.norm() / static_cast<double>(x.rows());
}

Matrix procrustes_align(const Matrix& reference, const Matrix& estimate) {
  if (reference.rows() != estimate.rows() ||
      reference.cols() != estimate.cols())
    throw std::invalid_argument("procrustes_align: dimension mismatch");
  const Matrix refc = centered(reference);
  const Matrix estc = centered(estimate);
  const Matrix h = estc.transpose() * refc;
  Eigen::JacobiSVD<Matrix> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix rotation = svd.matrixU() * svd.matrixV().transpose();
  Matrix aligned = estc * rotation;
  aligned.rowwise() += reference.colwise().mean();
  return aligned;
}

}  // namespace ringcal
