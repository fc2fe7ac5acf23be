#include "ringcal/baselines.hpp"

#include "ringcal/completion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ringcal {
namespace {

struct Edge {
  int to;
  double weight;
};

// Undirected observation graph over E minus S; when both orders of a pair
// were kept, the edge weight averages them.
std::vector<std::vector<Edge>> observation_graph(const ObservationSet& obs) {
  const int n = static_cast<int>(obs.values.rows());
  const PairMask phys = obs.masks.observed.minus(obs.masks.structured);
  std::vector<std::vector<Edge>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool fwd = phys.contains(i, j);
      const bool bwd = phys.contains(j, i);
      if (!fwd && !bwd) continue;
      double w = 0.0;
      if (fwd && bwd)
        w = 0.5 * (obs.values(i, j) + obs.values(j, i));
      else
        w = fwd ? obs.values(i, j) : obs.values(j, i);
      w = std::max(w, 0.0);  // heavy noise can push a measurement negative
      adj[static_cast<std::size_t>(i)].push_back({j, w});
      adj[static_cast<std::size_t>(j)].push_back({i, w});
    }
  }
  return adj;
}

std::vector<std::vector<int>> connected_components(
    const std::vector<std::vector<Edge>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<int>> comps;
  for (int start = 0; start < n; ++start) {
    if (label[static_cast<std::size_t>(start)] >= 0) continue;
    const int id = static_cast<int>(comps.size());
    comps.emplace_back();
    std::vector<int> stack{start};
    label[static_cast<std::size_t>(start)] = id;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      comps.back().push_back(v);
      for (const Edge& e : adj[static_cast<std::size_t>(v)]) {
        if (label[static_cast<std::size_t>(e.to)] < 0) {
          label[static_cast<std::size_t>(e.to)] = id;
          stack.push_back(e.to);
        }
      }
    }
    std::sort(comps.back().begin(), comps.back().end());
  }
  return comps;
}

// Dense Dijkstra, O(n^2) per source; the observation graph is nearly
// complete, so a heap would only add overhead.
void dijkstra(const std::vector<std::vector<Edge>>& adj, int source,
              std::vector<double>& dist) {
  const int n = static_cast<int>(adj.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  dist.assign(static_cast<std::size_t>(n), kInf);
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  dist[static_cast<std::size_t>(source)] = 0.0;
  for (int round = 0; round < n; ++round) {
    int v = -1;
    double best = kInf;
    for (int u = 0; u < n; ++u) {
      if (!done[static_cast<std::size_t>(u)] &&
          dist[static_cast<std::size_t>(u)] < best) {
        best = dist[static_cast<std::size_t>(u)];
        v = u;
      }
    }
    if (v < 0) break;
    done[static_cast<std::size_t>(v)] = 1;
    for (const Edge& e : adj[static_cast<std::size_t>(v)]) {
      const double alt = best + e.weight;
      if (alt < dist[static_cast<std::size_t>(e.to)])
        dist[static_cast<std::size_t>(e.to)] = alt;
    }
  }
}

}  // namespace

std::string to_string(BaselineTag tag) {
  switch (tag) {
    case BaselineTag::kMdsMap:
      return "mds-map";
    case BaselineTag::kSvdReconstruct:
      return "svd-reconstruct";
  }
  return "unknown";
}

DisconnectedGraphError::DisconnectedGraphError(
    std::vector<std::vector<int>> comps)
    : std::runtime_error([&comps] {
        std::ostringstream msg;
        msg << "mds_map: observation graph is disconnected into "
            << comps.size() << " components:";
        for (const auto& c : comps) {
          msg << " {";
          for (std::size_t k = 0; k < c.size() && k < 8; ++k) {
            if (k) msg << ",";
            msg << c[k];
          }
          if (c.size() > 8) msg << ",...";
          msg << "}";
        }
        return msg.str();
      }()),
      components(std::move(comps)) {}

PositionEstimate mds_map(const ObservationSet& obs) {
  const int n = static_cast<int>(obs.values.rows());
  const auto adj = observation_graph(obs);
  auto comps = connected_components(adj);
  if (comps.size() != 1) throw DisconnectedGraphError(std::move(comps));

  Matrix filled(n, n);
  std::vector<double> dist;
  for (int s = 0; s < n; ++s) {
    dijkstra(adj, s, dist);
    for (int j = 0; j < n; ++j)
      filled(s, j) = dist[static_cast<std::size_t>(j)];
  }
  // symmetric by construction for undirected weights; enforce it exactly
  filled = 0.5 * (filled + filled.transpose()).eval();

  PositionEstimate est = classical_mds(squared_distance_matrix(filled), 2);
  est.source = to_string(BaselineTag::kMdsMap);
  return est;
}

PositionEstimate svd_reconstruct(const ObservationSet& obs) {
  const int n = static_cast<int>(obs.values.rows());
  const PairMask phys = obs.masks.observed.minus(obs.masks.structured);
  if (phys.count() == 0)
    throw std::invalid_argument("svd_reconstruct: no observations");
  const double p_hat = estimate_sampling_rate(phys, n);

  Matrix scaled = Matrix::Zero(n, n);
  phys.for_each([&](int i, int j) {
    if (i != j)
      scaled(i, j) = obs.values(i, j) * obs.values(i, j) / p_hat;
  });
  PositionEstimate est = classical_mds(scaled, 2);
  est.source = to_string(BaselineTag::kSvdReconstruct);
  return est;
}

}  // namespace ringcal
