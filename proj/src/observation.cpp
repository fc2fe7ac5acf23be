#include "ringcal/observation.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ringcal {

std::size_t PairMask::count() const {
  std::size_t total = 0;
  for (std::uint8_t b : bits_) total += b;
  return total;
}

std::size_t PairMask::count_off_diagonal() const {
  std::size_t total = count();
  for (int i = 0; i < n_; ++i) {
    if (contains(i, i)) --total;
  }
  return total;
}

std::vector<int> PairMask::row_counts(bool off_diagonal_only) const {
  std::vector<int> counts(static_cast<std::size_t>(n_), 0);
  for_each([&](int i, int j) {
    if (off_diagonal_only && i == j) return;
    ++counts[static_cast<std::size_t>(i)];
  });
  return counts;
}

std::vector<int> PairMask::col_counts(bool off_diagonal_only) const {
  std::vector<int> counts(static_cast<std::size_t>(n_), 0);
  for_each([&](int i, int j) {
    if (off_diagonal_only && i == j) return;
    ++counts[static_cast<std::size_t>(j)];
  });
  return counts;
}

PairMask PairMask::minus(const PairMask& other) const {
  PairMask out = *this;
  if (other.n_ != n_) throw std::invalid_argument("PairMask::minus: size mismatch");
  for (std::size_t k = 0; k < bits_.size(); ++k) {
    if (other.bits_[k]) out.bits_[k] = 0;
  }
  return out;
}

PairMask PairMask::with_diagonal() const {
  PairMask out = *this;
  for (int i = 0; i < n_; ++i) out.insert(i, i);
  return out;
}

Matrix apply_mask(const Matrix& m, const PairMask& mask) {
  if (m.rows() != mask.size() || m.cols() != mask.size())
    throw std::invalid_argument("apply_mask: shape mismatch");
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  mask.for_each([&](int i, int j) { out(i, j) = m(i, j); });
  return out;
}

PairMask ObservationSet::completion_mask() const {
  const PairMask& e = masks.observed;
  if (mode == StructuredMode::kPractical)
    return e.minus(masks.structured).with_diagonal();
  return e.with_diagonal();
}

double structured_threshold(double delta, double r0, int n) {
  if (n < 2) throw std::invalid_argument("structured_threshold: n must be >= 2");
  if (delta < 0.0)
    throw std::invalid_argument("structured_threshold: delta must be >= 0");
  return delta * r0 * std::sqrt(std::log(static_cast<double>(n)) / n);
}

PairMask structured_mask_abs(const SensorLayout& layout, double delta_n) {
  const int n = layout.size();
  PairMask s(n);
  if (delta_n < 0.0)
    throw std::invalid_argument("structured_mask_abs: threshold must be >= 0");
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d =
          (layout.positions.row(i) - layout.positions.row(j)).norm();
      if (d <= delta_n) {
        s.insert(i, j);
        s.insert(j, i);
      }
    }
  }
  return s;
}

PairMask structured_mask(const SensorLayout& layout, double delta) {
  return structured_mask_abs(
      layout, structured_threshold(delta, layout.r0, layout.size()));
}

PairMask random_mask(int n, double p, std::uint64_t seed) {
  if (!(p > 0.0) || p > 1.0)
    throw std::invalid_argument("random_mask: require 0 < p <= 1");
  PairMask e(n);
  std::mt19937_64 rng(mix_seed(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (unit(rng) < p) e.insert(i, j);
    }
  }
  return e;
}

ObservationSet synthesize_observation(const SensorLayout& layout,
                                      const ObservationParams& params) {
  if (params.sigma < 0.0)
    throw std::invalid_argument("synthesize_observation: sigma must be >= 0");
  if (params.d0 < 0.0)
    throw std::invalid_argument("synthesize_observation: d0 must be >= 0");

  const int n = layout.size();
  const Matrix d = pairwise_distance_matrix(layout);
  const double delta_n =
      params.delta_abs_m
          ? *params.delta_abs_m
          : structured_threshold(params.delta, layout.r0, n);

  ObservationSet obs;
  obs.masks.structured = structured_mask_abs(layout, delta_n);
  obs.masks.observed =
      random_mask(n, params.p, hash_combine(params.seed, "random-mask"));
  obs.d0_true = params.d0;
  obs.sigma = params.sigma;
  obs.c0 = params.c0;
  obs.mode = params.mode;

  // Noise drawn on its own stream so masks never perturb the draws.
  Matrix noise = Matrix::Zero(n, n);
  if (params.sigma > 0.0) {
    std::mt19937_64 rng(mix_seed(hash_combine(params.seed, "noise")));
    std::normal_distribution<double> gauss(0.0, params.sigma);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double z = gauss(rng);
        noise(i, j) = z;
        noise(j, i) = params.symmetric_noise ? z : gauss(rng);
      }
    }
  }

  obs.values = Matrix::Zero(n, n);
  obs.masks.observed.for_each([&](int i, int j) {
    if (obs.masks.structured.contains(i, j)) {
      if (params.mode == StructuredMode::kTheorem) {
        obs.values(i, j) = params.d0 + noise(i, j);
      }
      // practical mode: the entry is unknown, left at zero and excluded
      // from the completion mask
    } else {
      obs.values(i, j) = d(i, j) + params.d0 + noise(i, j);
    }
  });
  return obs;
}

double structured_noise_norm(const Matrix& sq_structured,
                             const PairMask& observed) {
  return spectral_norm(apply_mask(sq_structured, observed));
}

double effective_noise_norm(const Matrix& noise, const Matrix& distances_sbar,
                            const PairMask& observed) {
  if (noise.rows() != distances_sbar.rows() ||
      noise.cols() != distances_sbar.cols())
    throw std::invalid_argument("effective_noise_norm: shape mismatch");
  const Matrix y =
      (noise.array().square() + 2.0 * noise.array() * distances_sbar.array())
          .matrix();
  return spectral_norm(apply_mask(y, observed));
}

}  // namespace ringcal
