#include "ringcal/util.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace ringcal {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return mix_seed(h ^ (mix_seed(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2)));
}

std::uint64_t hash_combine(std::uint64_t h, std::string_view s) {
  std::uint64_t fnv = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    fnv ^= c;
    fnv *= 0x100000001b3ull;
  }
  return hash_combine(h, fnv);
}

std::uint64_t hash_combine(std::uint64_t h, double v) {
  return hash_combine(h, std::bit_cast<std::uint64_t>(v));
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() <= 512 && m.cols() <= 512) {
    return Eigen::BDCSVD<Matrix>(m).singularValues()(0);
  }
  // Power iteration on M^T M; the Rayleigh quotient converges quadratically
  // in the singular-vector error, 1e-12 relative is plenty for diagnostics.
  std::mt19937_64 rng(0x5eedull);
  std::normal_distribution<double> gauss;
  Vector v(m.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
  v.normalize();
  double lambda = 0.0;
  for (int iter = 0; iter < 1000; ++iter) {
    Vector w = m * v;
    const double next = w.squaredNorm();  // v^T (M^T M) v
    if (next == 0.0) return 0.0;
    Vector u = m.transpose() * w;
    const double norm = u.norm();
    if (norm == 0.0) return std::sqrt(next);
    v = u / norm;
    if (iter > 4 && std::abs(next - lambda) <= 1e-12 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

void parallel_for(int begin, int end, const std::function<void(int)>& body,
                  int threads) {
  const int count = end - begin;
  if (count <= 0) return;
  if (threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw > 0 ? static_cast<int>(hw) : 1;
  }
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = begin; i < end; ++i) body(i);
    return;
  }
  std::atomic<int> next{begin};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= end) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ringcal
