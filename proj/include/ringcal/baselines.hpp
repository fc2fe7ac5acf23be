#pragma once

#include "ringcal/embedding.hpp"
#include "ringcal/observation.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace ringcal {

enum class BaselineTag { kMdsMap, kSvdReconstruct };

std::string to_string(BaselineTag tag);

struct DisconnectedGraphError : std::runtime_error {
  explicit DisconnectedGraphError(std::vector<std::vector<int>> comps);
  std::vector<std::vector<int>> components;
};

/// Shortest-path localizer: the graph of physically observed pairs is
/// completed with all-pairs shortest-path distances, squared, and embedded
/// with classical MDS. Throws DisconnectedGraphError (listing the components)
/// when the observation graph is not connected.
PositionEstimate mds_map(const ObservationSet& obs);

/// Direct spectral localizer: missing entries are zero-filled, observed
/// squared entries rescaled by the estimated sampling rate, then embedded
/// with classical MDS.
PositionEstimate svd_reconstruct(const ObservationSet& obs);

}  // namespace ringcal
