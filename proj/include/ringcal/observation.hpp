#pragma once

#include "ringcal/geometry.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ringcal {

/// Membership over ordered index pairs of an n x n matrix.
class PairMask {
 public:
  PairMask() = default;
  explicit PairMask(int n)
      : n_(n),
        bits_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {}

  int size() const { return n_; }
  bool contains(int i, int j) const { return bits_[index(i, j)] != 0; }
  void insert(int i, int j) { bits_[index(i, j)] = 1; }
  void erase(int i, int j) { bits_[index(i, j)] = 0; }

  std::size_t count() const;
  std::size_t count_off_diagonal() const;
  std::vector<int> row_counts(bool off_diagonal_only = true) const;
  std::vector<int> col_counts(bool off_diagonal_only = true) const;

  /// Set difference: pairs in this mask and not in `other`.
  PairMask minus(const PairMask& other) const;
  /// Copy with all diagonal pairs added.
  PairMask with_diagonal() const;

  template <typename F>
  void for_each(F&& f) const {
    for (int i = 0; i < n_; ++i) {
      const std::uint8_t* row = bits_.data() + index(i, 0);
      for (int j = 0; j < n_; ++j) {
        if (row[j]) f(i, j);
      }
    }
  }

  bool operator==(const PairMask&) const = default;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(j);
  }

  int n_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Zeroes every entry outside the mask.
Matrix apply_mask(const Matrix& m, const PairMask& mask);

/// Structured missing set S (close pairs, unmeasurable) and random
/// observation set E (pairs that survived random dropout). Diagonal pairs
/// belong to neither; the diagonal is known zero by definition.
struct MaskPair {
  PairMask structured;
  PairMask observed;
};

/// How entries of S are presented downstream. Practical: close-pair entries
/// are unknown, the completion mask is E minus S. Theorem: close-pair entries
/// stay in the observed set with the distance term removed, so the completion
/// sees them as (delay + noise) samples -- zeros in the noiseless, zero-delay
/// case.
enum class StructuredMode { kPractical, kTheorem };

struct ObservationParams {
  double delta = 1.0;                   // dimensionless threshold scale
  std::optional<double> delta_abs_m;    // absolute threshold override, meters
  double p = 0.95;                      // retention prob per ordered pair
  double sigma = 0.0;                   // noise std, meters
  double d0 = 0.0;                      // delay-induced offset, meters
  double c0 = 1500.0;                   // sound speed, m/s (metadata)
  std::uint64_t seed = 0;
  StructuredMode mode = StructuredMode::kPractical;
  bool symmetric_noise = true;          // one draw per unordered pair
};

/// Observed pairwise measurement matrix: zeros outside E, and for
/// (i,j) in E off the structured set, value = d_ij + d0 + Z_ij.
struct ObservationSet {
  Matrix values;  // meters
  MaskPair masks;
  double d0_true = 0.0;
  double sigma = 0.0;
  double c0 = 1500.0;
  StructuredMode mode = StructuredMode::kPractical;

  /// Entries a completion may trust: E minus S (practical) or E (theorem),
  /// plus the diagonal, which is known zero for any distance matrix.
  PairMask completion_mask() const;
};

/// delta_n = delta * r0 * sqrt(ln(n) / n).
double structured_threshold(double delta, double r0, int n);

/// S = {(i,j) : d_ij <= delta_n, i != j} with the scaled threshold above.
PairMask structured_mask(const SensorLayout& layout, double delta);
/// Same with an absolute threshold in meters.
PairMask structured_mask_abs(const SensorLayout& layout, double delta_n);

/// Keeps each ordered off-diagonal pair independently with probability p.
PairMask random_mask(int n, double p, std::uint64_t seed);

ObservationSet synthesize_observation(const SensorLayout& layout,
                                      const ObservationParams& params);

/// Spectral norm of the structured-missing part restricted to E,
/// || P_E(sq_structured) ||_2.
double structured_noise_norm(const Matrix& sq_structured,
                             const PairMask& observed);

/// Spectral norm of the effective noise on the squared matrix:
/// Y_ij = Z_ij^2 + 2 * Z_ij * d_ij, restricted to E. `noise` and
/// `distances_sbar` are the distance-domain noise and distances with
/// structured entries already zeroed.
double effective_noise_norm(const Matrix& noise, const Matrix& distances_sbar,
                            const PairMask& observed);

}  // namespace ringcal
