#pragma once

#include "ringcal/completion.hpp"
#include "ringcal/delay.hpp"
#include "ringcal/geometry.hpp"
#include "ringcal/observation.hpp"

#include <string>

namespace ringcal {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

/// Layout/position CSV, columns: index,x_m,y_m. Round trips bit-exactly.
void write_layout_csv(const SensorLayout& layout, const std::string& path);
void write_positions_csv(const Matrix& coords, const std::string& path);
Eigen::Matrix<double, Eigen::Dynamic, 2> read_positions_csv(
    const std::string& path);

/// Observed values as a matrix-market coordinate file (one entry per pair in
/// E, 1-based indices) plus a JSON sidecar carrying both masks and the
/// metadata. Round trips bit-exactly.
void write_observation(const ObservationSet& obs, const std::string& matrix_path,
                       const std::string& sidecar_path);
ObservationSet read_observation(const std::string& matrix_path,
                                const std::string& sidecar_path);

/// Per-iteration convergence trace, columns: iteration,cost,grad_norm.
void write_trace_csv(const CompletionResult& result, const std::string& path);

/// Delay-search landscape, columns: candidate_m,cost.
void write_cost_curve_csv(const std::vector<CandidateScore>& costs,
                          const std::string& path);

}  // namespace ringcal
