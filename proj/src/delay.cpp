#include "ringcal/delay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ringcal {
namespace {

std::vector<double> uniform_grid(double lo, double hi, int count) {
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    grid[static_cast<std::size_t>(k)] =
        count == 1 ? lo : lo + (hi - lo) * k / (count - 1);
  }
  return grid;
}

struct CandidateOutcome {
  double cost = std::numeric_limits<double>::infinity();
  CompletionResult completion;
  PositionEstimate positions;
  bool ok = false;
};

CandidateOutcome evaluate_candidate(const ObservationSet& obs,
                                    const DelaySearchConfig& cfg,
                                    const PairMask& mask, double candidate,
                                    std::uint64_t candidate_seed) {
  CandidateOutcome out;
  const int n = static_cast<int>(obs.values.rows());
  Matrix shifted = Matrix::Zero(n, n);
  mask.for_each([&](int i, int j) {
    if (i != j) shifted(i, j) = obs.values(i, j) - candidate;
  });
  const Matrix squared = shifted.array().square().matrix();
  CompletionOptions opts = cfg.completion;
  opts.seed = candidate_seed;
  try {
    out.completion = optspace_complete(squared, mask, opts);
    out.positions = classical_mds(out.completion.estimate, cfg.eta);
    out.cost = delay_cost(candidate, out.positions, obs);
    out.ok = true;
  } catch (const std::exception&) {
    out.ok = false;
  }
  return out;
}

}  // namespace

double delay_cost(double candidate, const PositionEstimate& positions,
                  const ObservationSet& obs) {
  const Matrix& x = positions.coords;
  if (x.rows() != obs.values.rows())
    throw std::invalid_argument("delay_cost: positions do not match n");
  const PairMask scoring = obs.masks.observed.minus(obs.masks.structured);
  double cost = 0.0;
  scoring.for_each([&](int i, int j) {
    const double dist = (x.row(i) - x.row(j)).norm();
    const double r = candidate + dist - obs.values(i, j);
    cost += r * r;
  });
  return cost;
}

DelaySearchResult estimate_delay(const ObservationSet& obs,
                                 const DelaySearchConfig& cfg) {
  if (cfg.d_min > cfg.d_max)
    throw std::invalid_argument("estimate_delay: d_min must be <= d_max");
  if (cfg.grid_size < 2)
    throw std::invalid_argument("estimate_delay: grid size must be >= 2");
  const PairMask mask = obs.completion_mask();
  if (obs.masks.observed.minus(obs.masks.structured).count() == 0)
    throw std::invalid_argument("estimate_delay: no scorable observations");

  std::vector<double> candidates =
      uniform_grid(cfg.d_min, cfg.d_max, cfg.grid_size);
  const double coarse_step = cfg.grid_size > 1
                                 ? (cfg.d_max - cfg.d_min) / (cfg.grid_size - 1)
                                 : 0.0;

  DelaySearchResult result;
  std::size_t best = 0;
  bool any_ok = false;
  double best_cost = std::numeric_limits<double>::infinity();

  const auto run_pass = [&](const std::vector<double>& grid, int pass) {
    std::vector<CandidateOutcome> outcomes(grid.size());
    parallel_for(
        0, static_cast<int>(grid.size()),
        [&](int k) {
          const std::uint64_t seed = hash_combine(
              hash_combine(hash_combine(cfg.seed, "delay-candidate"),
                           static_cast<std::uint64_t>(pass)),
              static_cast<std::uint64_t>(k));
          outcomes[static_cast<std::size_t>(k)] =
              evaluate_candidate(obs, cfg, mask, grid[static_cast<std::size_t>(k)], seed);
        },
        cfg.threads);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      result.costs.push_back({grid[k], outcomes[k].cost});
      const bool better =
          outcomes[k].ok &&
          (outcomes[k].cost < best_cost ||
           (outcomes[k].cost == best_cost && grid[k] < result.costs[best].candidate));
      if (better) {
        best = result.costs.size() - 1;
        best_cost = outcomes[k].cost;
        result.best_completion = std::move(outcomes[k].completion);
        result.best_positions = std::move(outcomes[k].positions);
        any_ok = true;
      }
    }
  };

  run_pass(candidates, 0);
  if (!any_ok)
    throw std::runtime_error("estimate_delay: every candidate failed");

  if (cfg.refine && coarse_step > 0.0) {
    const double winner = result.costs[best].candidate;
    const double lo = std::max(cfg.d_min, winner - coarse_step);
    const double hi = std::min(cfg.d_max, winner + coarse_step);
    run_pass(uniform_grid(lo, hi, cfg.grid_size), 1);
  }

  result.d0_hat = result.costs[best].candidate;
  std::sort(result.costs.begin(), result.costs.end(),
            [](const CandidateScore& a, const CandidateScore& b) {
              return a.candidate < b.candidate;
            });
  return result;
}

}  // namespace ringcal
