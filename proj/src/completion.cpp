#include "ringcal/completion.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>

namespace ringcal {
namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<std::vector<int>> observed_columns_per_row(const PairMask& mask) {
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(mask.size()));
  mask.for_each([&](int i, int j) { rows[static_cast<std::size_t>(i)].push_back(j); });
  return rows;
}

// Thin Q factor with a positive R diagonal, so the factor is continuous in
// the input and an orthonormal matrix maps to itself. Re-orthonormalizes a
// factor after a gradient step.
Matrix thin_q(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    if (qr.matrixQR()(k, k) < 0.0) q.col(k) = -q.col(k);
  }
  return q;
}

double masked_cost_impl(const RowMat& m_obs,
                        const std::vector<std::vector<int>>& rows,
                        const RowMat& x, const Matrix& s, const RowMat& y) {
  const int n = static_cast<int>(x.rows());
  const int q = static_cast<int>(x.cols());
  double cost = 0.0;
  Eigen::RowVectorXd xs(q);
  for (int i = 0; i < n; ++i) {
    const auto& cols = rows[static_cast<std::size_t>(i)];
    if (cols.empty()) continue;
    xs.noalias() = x.row(i) * s;
    for (int j : cols) {
      const double r = xs.dot(y.row(j)) - m_obs(i, j);
      cost += r * r;
    }
  }
  return 0.5 * cost;
}

void masked_gradient_impl(const RowMat& m_obs,
                          const std::vector<std::vector<int>>& rows,
                          const RowMat& x, const Matrix& s, const RowMat& y,
                          RowMat& gx, RowMat& gy) {
  const int n = static_cast<int>(x.rows());
  const int q = static_cast<int>(x.cols());
  RowMat xs = x * s;              // row i of the prediction factor
  RowMat ys = y * s.transpose();  // row j of the adjoint factor
  gx.setZero(n, q);
  gy.setZero(n, q);
  for (int i = 0; i < n; ++i) {
    const auto& cols = rows[static_cast<std::size_t>(i)];
    if (cols.empty()) continue;
    for (int j : cols) {
      const double r = xs.row(i).dot(y.row(j)) - m_obs(i, j);
      gx.row(i).noalias() += r * ys.row(j);
      gy.row(j).noalias() += r * xs.row(i);
    }
  }
}

// Exact least squares for the q x q core: the normal equations in the q^2
// unknowns factor as sum_i kron(x_i x_i^T, W_i) with W_i = sum_j y_j y_j^T
// over the observed columns of row i.
Matrix solve_core_impl(const RowMat& m_obs,
                       const std::vector<std::vector<int>>& rows,
                       const RowMat& x, const RowMat& y) {
  const int n = static_cast<int>(x.rows());
  const int q = static_cast<int>(x.cols());
  Matrix a = Matrix::Zero(q * q, q * q);
  Matrix w(q, q);
  for (int i = 0; i < n; ++i) {
    const auto& cols = rows[static_cast<std::size_t>(i)];
    if (cols.empty()) continue;
    w.setZero();
    for (int j : cols) w.noalias() += y.row(j).transpose() * y.row(j);
    for (int ai = 0; ai < q; ++ai) {
      for (int ci = 0; ci < q; ++ci) {
        a.block(ai * q, ci * q, q, q).noalias() += (x(i, ai) * x(i, ci)) * w;
      }
    }
  }
  Matrix rhs_m = x.transpose() * (m_obs * y);  // q x q
  Vector rhs(q * q);
  for (int ai = 0; ai < q; ++ai)
    for (int bi = 0; bi < q; ++bi) rhs(ai * q + bi) = rhs_m(ai, bi);
  // tiny ridge keeps degenerate masks solvable without moving the optimum
  const double ridge = 1e-14 * (a.trace() / (q * q) + 1.0);
  a.diagonal().array() += ridge;
  const Vector sol = a.ldlt().solve(rhs);
  Matrix s(q, q);
  for (int ai = 0; ai < q; ++ai)
    for (int bi = 0; bi < q; ++bi) s(ai, bi) = sol(ai * q + bi);
  return s;
}

}  // namespace

std::pair<Matrix, PairMask> trim(const Matrix& values, const PairMask& observed,
                                 std::uint64_t seed) {
  const int n = observed.size();
  if (values.rows() != n || values.cols() != n)
    throw std::invalid_argument("trim: shape mismatch");
  const std::size_t total = observed.count();
  if (total == 0) throw std::invalid_argument("trim: empty mask");
  const int cap =
      static_cast<int>(std::ceil(2.0 * static_cast<double>(total) / n));

  PairMask mask = observed;
  std::mt19937_64 rng(mix_seed(hash_combine(seed, "trim")));
  const auto trim_axis = [&](bool by_row) {
    std::vector<std::vector<int>> entries(static_cast<std::size_t>(n));
    mask.for_each([&](int i, int j) {
      entries[static_cast<std::size_t>(by_row ? i : j)].push_back(by_row ? j : i);
    });
    for (int k = 0; k < n; ++k) {
      auto& list = entries[static_cast<std::size_t>(k)];
      if (static_cast<int>(list.size()) <= cap) continue;
      std::shuffle(list.begin(), list.end(), rng);
      for (std::size_t t = static_cast<std::size_t>(cap); t < list.size(); ++t) {
        if (by_row)
          mask.erase(k, list[t]);
        else
          mask.erase(list[t], k);
      }
    }
  };
  trim_axis(true);
  trim_axis(false);
  return {apply_mask(values, mask), mask};
}

RankProjection rank_q_projection(const Matrix& values, const PairMask& observed,
                                 int q, double p_hat) {
  const int n = observed.size();
  if (values.rows() != n || values.cols() != n)
    throw std::invalid_argument("rank_q_projection: shape mismatch");
  if (q < 1 || q > n)
    throw std::invalid_argument("rank_q_projection: rank out of range");
  if (!(p_hat > 0.0))
    throw std::invalid_argument("rank_q_projection: p_hat must be positive");
  const Matrix m_obs = apply_mask(values, observed);
  Eigen::BDCSVD<Matrix> svd(m_obs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  RankProjection out;
  out.singular_values = svd.singularValues();
  out.rank_deficient =
      out.singular_values(q - 1) < 1e-12 * out.singular_values(0);
  out.value = svd.matrixU().leftCols(q) *
              (out.singular_values.head(q) / p_hat).asDiagonal() *
              svd.matrixV().leftCols(q).transpose();
  return out;
}

double completion_cost(const Matrix& values, const PairMask& observed,
                       const Matrix& X, const Matrix& S, const Matrix& Y) {
  const RowMat m_obs = apply_mask(values, observed);
  const RowMat x = X, y = Y;
  return masked_cost_impl(m_obs, observed_columns_per_row(observed), x, S, y);
}

std::pair<Matrix, Matrix> completion_gradient(const Matrix& values,
                                              const PairMask& observed,
                                              const Matrix& X, const Matrix& S,
                                              const Matrix& Y) {
  const RowMat m_obs = apply_mask(values, observed);
  const RowMat x = X, y = Y;
  RowMat gx, gy;
  masked_gradient_impl(m_obs, observed_columns_per_row(observed), x, S, y, gx,
                       gy);
  return {Matrix(gx), Matrix(gy)};
}

Matrix solve_core(const Matrix& values, const PairMask& observed,
                  const Matrix& X, const Matrix& Y) {
  const RowMat m_obs = apply_mask(values, observed);
  const RowMat x = X, y = Y;
  return solve_core_impl(m_obs, observed_columns_per_row(observed), x, y);
}

double estimate_sampling_rate(const PairMask& observed, int n) {
  if (n < 2) throw std::invalid_argument("estimate_sampling_rate: n must be >= 2");
  return static_cast<double>(observed.count_off_diagonal()) /
         (static_cast<double>(n) * (n - 1));
}

CompletionResult optspace_complete(const Matrix& values,
                                   const PairMask& observed,
                                   const CompletionOptions& opts) {
  const int n = observed.size();
  if (values.rows() != n || values.cols() != n)
    throw std::invalid_argument("optspace_complete: shape mismatch");
  if (opts.rank < 1 || opts.rank > n)
    throw std::invalid_argument("optspace_complete: rank out of range");
  if (!(opts.rel_tol > 0.0))
    throw std::invalid_argument("optspace_complete: rel_tol must be positive");

  Matrix vals = values;
  PairMask mask = observed;
  if (opts.trimming) std::tie(vals, mask) = trim(vals, mask, opts.seed);
  if (mask.count() == 0)
    throw std::invalid_argument("optspace_complete: empty mask");

  CompletionResult res;
  res.p_hat = opts.p_hat ? *opts.p_hat : estimate_sampling_rate(mask, n);
  if (!(res.p_hat > 0.0))
    throw std::invalid_argument(
        "optspace_complete: mask has no off-diagonal samples");

  const auto row_counts = mask.row_counts();
  const auto col_counts = mask.col_counts();
  for (int i = 0; i < n; ++i) {
    if (row_counts[static_cast<std::size_t>(i)] == 0)
      res.unreliable_rows.push_back(i);
    if (col_counts[static_cast<std::size_t>(i)] == 0)
      res.unreliable_cols.push_back(i);
  }

  const RowMat m_obs = apply_mask(vals, mask);
  const auto rows = observed_columns_per_row(mask);
  const int q = opts.rank;

  Eigen::BDCSVD<Matrix> svd(Matrix(m_obs),
                            Eigen::ComputeThinU | Eigen::ComputeThinV);
  RowMat x = svd.matrixU().leftCols(q);
  RowMat y = svd.matrixV().leftCols(q);

  Matrix s = solve_core_impl(m_obs, rows, x, y);
  double cost = masked_cost_impl(m_obs, rows, x, s, y);
  res.cost_trace.push_back(cost);
  const double cost_floor = 1e-26 * std::max(cost, 1.0);

  const auto tangent_project = [](const RowMat& basis, RowMat& dir) {
    const Matrix btd = basis.transpose() * dir;
    dir.noalias() -= basis * (0.5 * (btd + btd.transpose()));
  };

  RowMat gx, gy;
  res.converged = false;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    if (cost <= cost_floor) {
      res.converged = true;
      break;
    }

    masked_gradient_impl(m_obs, rows, x, s, y, gx, gy);
    tangent_project(x, gx);
    tangent_project(y, gy);
    const double grad_sq = gx.squaredNorm() + gy.squaredNorm();
    if (grad_sq <= 1e-32 * std::max(1.0, cost)) {
      res.converged = true;
      break;
    }

    RowMat dx, dy;
    double descent = 0.0;
    if (opts.scaled_descent) {
      // Gauss-Newton scaling: the Hessian block for a row of X is roughly
      // p_hat * S S^T, so dividing the gradient by it equalizes the factor
      // spectrum and keeps the descent fast on ill-conditioned matrices.
      const Matrix sst = s * s.transpose();
      const Matrix sts = s.transpose() * s;
      const double damping = 1e-12 * (sst.trace() / q) +
                             std::numeric_limits<double>::min();
      const Matrix precond_x =
          (sst + damping * Matrix::Identity(q, q)).ldlt().solve(
              Matrix::Identity(q, q)) /
          res.p_hat;
      const Matrix precond_y =
          (sts + damping * Matrix::Identity(q, q)).ldlt().solve(
              Matrix::Identity(q, q)) /
          res.p_hat;
      dx = gx * precond_x;
      dy = gy * precond_y;
      tangent_project(x, dx);
      tangent_project(y, dy);
      descent = gx.cwiseProduct(dx).sum() + gy.cwiseProduct(dy).sum();
    }
    if (!(descent > 0.0)) {  // plain gradient direction
      dx = gx;
      dy = gy;
      descent = grad_sq;
    }

    double step = opts.scaled_descent ? 1.0 : cost / descent;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      const RowMat xt = thin_q(Matrix(x - step * dx));
      const RowMat yt = thin_q(Matrix(y - step * dy));
      const double trial = masked_cost_impl(m_obs, rows, xt, s, yt);
      if (trial <= cost - 1e-4 * step * descent) {
        x = xt;
        y = yt;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {  // stationary within line-search resolution
      res.converged = true;
      break;
    }

    s = solve_core_impl(m_obs, rows, x, y);
    const double next = masked_cost_impl(m_obs, rows, x, s, y);
    res.gradient_trace.push_back(std::sqrt(grad_sq));
    res.cost_trace.push_back(next);
    const double rel =
        (cost - next) / std::max(cost, std::numeric_limits<double>::min());
    cost = next;
    if (rel < opts.rel_tol) {
      res.converged = true;
      break;
    }
  }

  res.iterations = static_cast<int>(res.cost_trace.size()) - 1;
  res.X = x;
  res.S = s;
  res.Y = y;
  res.estimate = res.X * res.S * res.Y.transpose();
  return res;
}

}  // namespace ringcal
