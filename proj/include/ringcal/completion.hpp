#pragma once

#include "ringcal/observation.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace ringcal {

struct CompletionOptions {
  int rank = 4;
  int max_iters = 500;
  double rel_tol = 1e-9;           // on the relative cost decrease per step
  std::optional<double> p_hat;     // sampling rate; estimated when unset
  bool trimming = false;
  std::uint64_t seed = 0;          // randomness used by trimming only
  // Scale the gradient by the inverse Gauss-Newton row Hessian
  // (p_hat * S S^T); equalizes the factor spectrum so ill-conditioned
  // matrices converge in tens of steps instead of stalling.
  bool scaled_descent = true;
};

struct CompletionResult {
  Matrix estimate;  // X * S * Y^T
  Matrix X;         // n x q, orthonormal columns
  Matrix S;         // q x q
  Matrix Y;         // n x q, orthonormal columns
  std::vector<double> cost_trace;      // objective after each accepted step
  std::vector<double> gradient_trace;  // Frobenius norm of the step gradient
  int iterations = 0;                  // accepted descent steps
  bool converged = false;              // false only when max_iters ran out
  double p_hat = 0.0;
  // Rows/columns with no off-diagonal samples; their completed entries are
  // unconstrained by the data.
  std::vector<int> unreliable_rows;
  std::vector<int> unreliable_cols;
};

/// Caps every over-represented row and column (more samples than twice the
/// mean count) at ceil(2 * mean) by dropping random entries. A no-op for the
/// near-uniform masks this pipeline produces.
std::pair<Matrix, PairMask> trim(const Matrix& values, const PairMask& observed,
                                 std::uint64_t seed);

struct RankProjection {
  Matrix value;
  Vector singular_values;
  bool rank_deficient = false;  // sigma_q < 1e-12 * sigma_1
};

/// Best rank-q approximation of the zero-filled observed matrix, rescaled by
/// 1/p_hat to compensate the sampling.
RankProjection rank_q_projection(const Matrix& values, const PairMask& observed,
                                 int q, double p_hat);

/// 0.5 * sum over observed entries of (values - X S Y^T)^2.
double completion_cost(const Matrix& values, const PairMask& observed,
                       const Matrix& X, const Matrix& S, const Matrix& Y);

/// Gradient of completion_cost in (X, Y) at fixed S.
std::pair<Matrix, Matrix> completion_gradient(const Matrix& values,
                                              const PairMask& observed,
                                              const Matrix& X, const Matrix& S,
                                              const Matrix& Y);

/// Least-squares optimal q x q core S for fixed orthonormal factors.
Matrix solve_core(const Matrix& values, const PairMask& observed,
                  const Matrix& X, const Matrix& Y);

/// Low-rank completion: spectral initialization from the rank-q projection,
/// then descent on the orthonormal factor pair. Each iteration solves the
/// core S exactly, takes a gradient step on (X, Y) re-orthonormalized by thin
/// QR, and backtracks until the cost decreases. Stops when the relative cost
/// decrease falls below rel_tol or max_iters is reached.
CompletionResult optspace_complete(const Matrix& values,
                                   const PairMask& observed,
                                   const CompletionOptions& opts);

/// |E| / (n * (n - 1)), counting off-diagonal pairs only.
double estimate_sampling_rate(const PairMask& observed, int n);

}  // namespace ringcal
