#pragma once

#include <functional>
#include <utility>

#include "mpp/pointproc.hpp"

namespace mpp {

// Finite interaction graph over the sites of a point configuration, together with
// per-site neighbourhood radii: modifying the configuration outside B_{radii[x]}(x)
// leaves the neighbour set of x unchanged.
struct InteractionGraph {
  std::vector<std::vector<int>> adj;  // sorted neighbour lists, symmetric, no loops
  std::vector<double> radii;          // integer-valued, >= 1

  int order() const { return static_cast<int>(adj.size()); }
  int degree(int v) const { return static_cast<int>(adj[v].size()); }
  bool has_edge(int u, int v) const;
  std::size_t edge_count() const;
  std::vector<std::pair<int, int>> edges() const;  // each pair with first < second
};

// Disc graph: edge iff |x - y| <= r. Radii are floor(1 + r) everywhere.
InteractionGraph build_gilbert(const PointConfig& cfg, double r);

// Symmetrised k-nearest-neighbour graph; distance ties broken by site index.
// Radii in d = 2 come from the six-sector occupancy construction; other dimensions
// fall back to ceil(diam(W)) + 1.
InteractionGraph build_knn(const PointConfig& cfg, int k);

// Delaunay graph, d = 2 only: edge iff some circumdisc through the two sites is
// empty. Cocircular ties are resolved by a deterministic symbolic perturbation
// ordered by site index. Sites must be pairwise distinct.
InteractionGraph build_delaunay(const PointConfig& cfg);

// Sphere-of-influence graph: edge iff the open nearest-neighbour balls intersect,
// |x - y| < r_x + r_y with r_x the nearest-neighbour distance of x.
InteractionGraph build_soi(const PointConfig& cfg);

// every edge satisfies |x - y| <= min(radii[x], radii[y])
bool check_edge_radii(const InteractionGraph& g, const PointConfig& cfg);

using GraphBuilder = std::function<InteractionGraph(const PointConfig&)>;

struct StoppingSetReport {
  int trials = 0;
  int violations = 0;
};

// For a Poisson(rho) input: resample everything outside B_{radii[x]}(x) with fresh
// Poisson points `trials` times and count how often the neighbour set of x changes.
StoppingSetReport verify_stopping_set(const GraphBuilder& build, const PointConfig& cfg,
                                      double rho, int x, int trials, SeedStream seed);

}  // namespace mpp
