#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string_view>

namespace ringcal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// splitmix64 finalizer; turns correlated seeds into independent-looking ones.
std::uint64_t mix_seed(std::uint64_t x);

// Seed-derivation chain for labeled RNG streams and per-trial seeds.
std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v);
std::uint64_t hash_combine(std::uint64_t h, std::string_view s);
std::uint64_t hash_combine(std::uint64_t h, double v);

// Largest singular value. Exact SVD for small matrices, power iteration on
// M^T M above the cutoff where a full decomposition gets slow.
double spectral_norm(const Matrix& m);

// Runs body(i) for i in [begin, end) on up to `threads` workers (0 = all
// hardware threads). Exceptions from workers are rethrown on the caller.
void parallel_for(int begin, int end, const std::function<void(int)>& body,
                  int threads = 0);

}  // namespace ringcal
