#pragma once

#include "ringcal/completion.hpp"
#include "ringcal/embedding.hpp"
#include "ringcal/observation.hpp"

#include <vector>

namespace ringcal {

struct DelaySearchConfig {
  double d_min = 0.0;  // meters
  double d_max = 0.0;  // meters
  int grid_size = 101;
  bool refine = true;  // one extra pass between the winner's two neighbors
  CompletionOptions completion;
  int eta = 2;
  int threads = 1;  // candidates are independent; >1 evaluates them in parallel
  std::uint64_t seed = 0;
};

struct CandidateScore {
  double candidate = 0.0;  // meters
  double cost = 0.0;       // meters^2, +inf if the completion failed
};

struct DelaySearchResult {
  double d0_hat = 0.0;
  std::vector<CandidateScore> costs;  // sorted by candidate
  CompletionResult best_completion;
  PositionEstimate best_positions;
};

/// Consistency score of a delay candidate: sum over observed off-structured
/// pairs of (candidate + ||X_i - X_j|| - observed_ij)^2.
double delay_cost(double candidate, const PositionEstimate& positions,
                  const ObservationSet& obs);

/// Grid search for the unknown delay. Each candidate is subtracted from the
/// observed entries, the squared matrix is completed at the configured rank,
/// embedded with MDS, and scored with delay_cost against the raw
/// observations; the lowest-cost candidate wins (lowest value on ties).
/// Candidates whose completion throws score +inf; throws std::runtime_error
/// when every candidate fails.
DelaySearchResult estimate_delay(const ObservationSet& obs,
                                 const DelaySearchConfig& cfg);

}  // namespace ringcal
