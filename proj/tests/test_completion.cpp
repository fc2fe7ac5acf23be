#include "ringcal/completion.hpp"

#include "ringcal/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ringcal;

namespace {

// Generic random low-rank matrix with incoherent factors.
Matrix random_low_rank(int n, int rank, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed));
  std::normal_distribution<double> gauss;
  Matrix a(n, rank), b(n, rank);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < rank; ++k) {
      a(i, k) = gauss(rng);
      b(i, k) = gauss(rng);
    }
  }
  return a * b.transpose();
}

// Mask over every entry (diagonal included), each kept with probability p.
PairMask dense_mask(int n, double p, std::uint64_t seed) {
  PairMask mask(n);
  std::mt19937_64 rng(mix_seed(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (unit(rng) < p) mask.insert(i, j);
    }
  }
  return mask;
}

PairMask full_mask(int n) {
  PairMask mask(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) mask.insert(i, j);
  return mask;
}

Matrix random_orthonormal(int n, int q, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed));
  std::normal_distribution<double> gauss;
  Matrix m(n, q);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < q; ++k) m(i, k) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ() * Matrix::Identity(n, q);
}

}  // namespace

TEST_CASE("trim leaves near-uniform masks untouched") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PairMask e = random_mask(200, 0.95, seed);
    const Matrix m = Matrix::Random(200, 200);
    const auto [values, mask] = trim(m, e, seed);
    CHECK(mask == e);
  }
}

TEST_CASE("trim reduces an over-represented row to the cap") {
  const int n = 50;
  PairMask e(n);
  for (int j = 1; j < n; ++j) e.insert(0, j);      // row 0 fully observed
  for (int i = 1; i < n; ++i) {
    for (int k = 1; k <= 5; ++k) e.insert(i, (i + k) % n);
  }
  const double mean = static_cast<double>(e.count()) / n;
  const int cap = static_cast<int>(std::ceil(2.0 * mean));
  REQUIRE(static_cast<int>(e.row_counts(false)[0]) > cap);

  const auto [values, mask] = trim(Matrix::Ones(n, n), e, 1);
  const auto rows = mask.row_counts(false);
  CHECK(rows[0] == cap);
  for (int i = 1; i < n; ++i) CHECK(rows[static_cast<std::size_t>(i)] == 5);
}

TEST_CASE("trim keeps a fully observed small matrix unchanged") {
  PairMask e(10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      if (i != j) e.insert(i, j);
  const auto [values, mask] = trim(Matrix::Ones(10, 10), e, 3);
  CHECK(mask == e);
}

TEST_CASE("rank_q_projection recovers exact low-rank matrices when fully observed") {
  const Matrix m = random_low_rank(40, 3, 7);
  const auto proj = rank_q_projection(m, full_mask(40), 3, 1.0);
  CHECK((proj.value - m).norm() / m.norm() < 1e-10);
  CHECK_FALSE(proj.rank_deficient);
}

TEST_CASE("rank_q_projection with q=n reproduces the input") {
  const Matrix m = Matrix::Random(25, 25);
  const auto proj = rank_q_projection(m, full_mask(25), 25, 1.0);
  CHECK((proj.value - m).norm() / m.norm() < 1e-10);
}

TEST_CASE("rank_q_projection approximates a rank-1 matrix from half the entries") {
  // incoherent factors: constant-magnitude entries with random signs
  const int n = 500;
  std::mt19937_64 rng(mix_seed(11));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector u(n), v(n);
  for (int i = 0; i < n; ++i) {
    u(i) = unit(rng) < 0.5 ? -1.0 : 1.0;
    v(i) = unit(rng) < 0.5 ? -1.0 : 1.0;
  }
  const Matrix m = u * v.transpose();
  const auto proj = rank_q_projection(m, dense_mask(n, 0.5, 13), 1, 0.5);
  CHECK((proj.value - m).norm() / m.norm() < 0.1);
}

TEST_CASE("completion gradient matches central finite differences") {
  const int n = 20, q = 2;
  const Matrix m = random_low_rank(n, q, 3) + 0.01 * Matrix::Random(n, n);
  const PairMask mask = dense_mask(n, 0.8, 5);
  const Matrix x = random_orthonormal(n, q, 7);
  const Matrix y = random_orthonormal(n, q, 9);
  Matrix s(q, q);
  s << 1.3, -0.4, 0.2, 2.1;

  const auto [gx, gy] = completion_gradient(m, mask, x, s, y);
  const double h = 1e-6;
  Matrix fd_x(n, q), fd_y(n, q);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < q; ++k) {
      Matrix xp = x, xm = x;
      xp(i, k) += h;
      xm(i, k) -= h;
      fd_x(i, k) = (completion_cost(m, mask, xp, s, y) -
                    completion_cost(m, mask, xm, s, y)) /
                   (2 * h);
      Matrix yp = y, ym = y;
      yp(i, k) += h;
      ym(i, k) -= h;
      fd_y(i, k) = (completion_cost(m, mask, x, s, yp) -
                    completion_cost(m, mask, x, s, ym)) /
                   (2 * h);
    }
  }
  CHECK((gx - fd_x).norm() / fd_x.norm() < 1e-5);
  CHECK((gy - fd_y).norm() / fd_y.norm() < 1e-5);
}

TEST_CASE("solve_core is stationary: random perturbations never decrease the cost") {
  const int n = 30, q = 3;
  const Matrix m = random_low_rank(n, q, 21) + 0.05 * Matrix::Random(n, n);
  const PairMask mask = dense_mask(n, 0.7, 23);
  const Matrix x = random_orthonormal(n, q, 25);
  const Matrix y = random_orthonormal(n, q, 27);
  const Matrix s = solve_core(m, mask, x, y);
  const double best = completion_cost(m, mask, x, s, y);

  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 20; ++rep) {
    Matrix delta(q, q);
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) delta(a, b) = gauss(rng);
    delta *= s.norm() / delta.norm();
    const double perturbed = completion_cost(m, mask, x, s + 1e-6 * delta, y);
    CHECK(perturbed >= best * (1.0 - 1e-9) - 1e-18);
  }
}

TEST_CASE("optspace recovers an exact rank-4 squared distance matrix from full data") {
  const auto layout = generate_ring_layout(80, 0.1, 0.01, 31);
  const Matrix sq = squared_distance_matrix(pairwise_distance_matrix(layout));
  CompletionOptions opts;
  const auto res = optspace_complete(sq, full_mask(80), opts);
  CHECK((res.estimate - sq).norm() / sq.norm() < 1e-8);
  CHECK(res.converged);
}

TEST_CASE("optspace factors stay orthonormal and the trace is monotone") {
  const auto layout = generate_ring_layout(60, 0.1, 0.01, 37);
  Matrix sq = squared_distance_matrix(pairwise_distance_matrix(layout));
  // perturb so the descent has real work to do
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1e-6);
  for (int i = 0; i < 60; ++i)
    for (int j = i + 1; j < 60; ++j) {
      const double z = gauss(rng);
      sq(i, j) += z;
      sq(j, i) += z;
    }
  const PairMask mask = random_mask(60, 0.9, 41).with_diagonal();
  CompletionOptions opts;
  const auto res = optspace_complete(apply_mask(sq, mask), mask, opts);

  const int q = opts.rank;
  CHECK((res.X.transpose() * res.X - Matrix::Identity(q, q)).norm() < 1e-10);
  CHECK((res.Y.transpose() * res.Y - Matrix::Identity(q, q)).norm() < 1e-10);
  REQUIRE(res.cost_trace.size() >= 2);
  for (std::size_t k = 1; k < res.cost_trace.size(); ++k) {
    CHECK(res.cost_trace[k] <= res.cost_trace[k - 1]);
  }
  CHECK(res.iterations == static_cast<int>(res.cost_trace.size()) - 1);
}

TEST_CASE("optspace completes a ring observation with structured and random missing") {
  // n = 200 ring, 5% random missing plus structured missing, noiseless
  const auto layout = generate_ring_layout(200, 0.1, 0.01, 43);
  ObservationParams params;
  params.delta = 1.0;
  params.p = 0.95;
  params.seed = 44;
  const auto obs = synthesize_observation(layout, params);
  const PairMask mask = obs.completion_mask();
  const Matrix sq_obs = obs.values.array().square().matrix();

  CompletionOptions opts;
  const auto res = optspace_complete(sq_obs, mask, opts);
  const Matrix truth = squared_distance_matrix(pairwise_distance_matrix(layout));
  CHECK((res.estimate - truth).norm() / 200.0 < 1e-6);
}

TEST_CASE("optspace flags empty rows as unreliable instead of failing") {
  const int n = 40;
  const Matrix m = random_low_rank(n, 2, 3);
  PairMask mask = dense_mask(n, 0.8, 9);
  for (int j = 0; j < n; ++j) mask.erase(5, j);
  CompletionOptions opts;
  opts.rank = 2;
  const auto res = optspace_complete(apply_mask(m, mask), mask, opts);
  REQUIRE(res.unreliable_rows.size() == 1);
  CHECK(res.unreliable_rows[0] == 5);
  CHECK(res.estimate.allFinite());
}

TEST_CASE("optspace rejects empty masks and bad options") {
  const Matrix m = Matrix::Zero(10, 10);
  CHECK_THROWS_AS(optspace_complete(m, PairMask(10), CompletionOptions{}),
                  std::invalid_argument);
  CompletionOptions bad_rank;
  bad_rank.rank = 11;
  CHECK_THROWS_AS(optspace_complete(m, full_mask(10), bad_rank),
                  std::invalid_argument);
}

TEST_CASE("exact recovery of random incoherent rank-4 matrices") {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const int n = 80;
    const Matrix m = random_low_rank(n, 4, hash_combine(seed, "m"));
    const PairMask mask = dense_mask(n, 0.9, hash_combine(seed, "mask"));
    CompletionOptions opts;
    const auto res = optspace_complete(apply_mask(m, mask), mask, opts);
    if ((res.estimate - m).norm() / m.norm() < 1e-6) ++hits;
  }
  CHECK(hits == 5);
}

TEST_CASE("estimate_sampling_rate") {
  const int n = 200;
  CHECK(estimate_sampling_rate(random_mask(n, 1.0, 1), n) == 1.0);
  CHECK(estimate_sampling_rate(PairMask(n), n) == 0.0);
  CHECK(std::abs(estimate_sampling_rate(random_mask(n, 0.95, 3), n) - 0.95) <
        0.02);
  CHECK_THROWS_AS(estimate_sampling_rate(PairMask(1), 1),
                  std::invalid_argument);
}
