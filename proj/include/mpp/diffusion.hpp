#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mpp/graphs.hpp"
#include "mpp/rng.hpp"

namespace mpp {

// Interacting diffusion on a graph. Each site carries a state in R^dp; the drift at
// a site is f1(own) plus the neighbour average of f2(own, other) (empty average is
// 0), the diffusion matrix sigma is constant. lip declares a Lipschitz bound for the
// coefficients on the horizon [0, t0]; it is informational, not enforced.
struct DiffusionSpec {
  int dp = 1;
  double t0 = 1.0;
  double lip = 1.0;
  std::function<void(const double*, double*)> f1;
  std::function<void(const double*, const double*, double*)> f2;  // (own, other)
  std::vector<double> sigma;  // dp x dp, row major

  int steps_for(double dt) const;  // validates that dt > 0 divides t0
};

// "ou:<rate>:<noise>"              f1 = -rate*m, no pair term, sigma = noise*I
// "coupled:<rate>:<c>:<noise>"     f1 = -rate*m, f2 = c*(other-own), sigma = noise*I
DiffusionSpec make_diffusion(const std::string& tag);

// Per-site, per-step Gaussian increments with variance dt, laid out by original
// site id so coupled runs on subgraphs can reuse the same noise.
struct BrownianStore {
  int dp = 0;
  int steps = 0;
  double dt = 0.0;
  std::vector<double> z;  // [(site * steps + step) * dp + comp]

  static BrownianStore generate(int sites, int dp, int steps, double dt, SeedStream seed);
  const double* at(int site, int step) const { return &z[(std::size_t(site) * steps + step) * dp]; }
};

// Discretized paths for a subset of sites; paths[i] belongs to sites[i] and holds
// (steps+1) states of dimension dp, starting from the supplied initial state.
struct PathEnsemble {
  int dp = 1;
  int steps = 0;
  double dt = 0.0;
  std::vector<int> sites;
  std::vector<std::vector<double>> paths;

  const double* at(int idx, int step) const { return &paths[idx][std::size_t(step) * dp]; }
  int index_of(int site) const;

  // one-dimensional path of a single component of one site
  std::vector<double> component(int idx, int comp) const;
};

// Euler-Maruyama, all sites stepped synchronously from time-t values. initial has
// order*dp entries; noise for site y is read from the store at id y.
PathEnsemble simulate(const DiffusionSpec& spec, const InteractionGraph& g,
                      const std::vector<double>& initial, double dt, const BrownianStore& store);

// Same scheme on the induced subgraph of the m-hop ball around x, coupled to the
// full run through the shared store.
PathEnsemble truncated_simulate(const DiffusionSpec& spec, const InteractionGraph& g, int x, int m,
                                const std::vector<double>& initial, double dt,
                                const BrownianStore& store);

struct ErrorEstimate {
  double mean = 0.0;
  double se = 0.0;
};

// Monte Carlo estimate of E sup_{t <= t0} |M(x,t) - M^[m](x,t)|^2 over coupled runs
// from zero initial states at the default grid dt = t0/1000.
ErrorEstimate l2_stabilization_error(const DiffusionSpec& spec, const InteractionGraph& g, int x,
                                     int m, int reps, SeedStream seed);

// tag in {sup_norm, terminal, time_average}; path is one-dimensional on a uniform
// grid with spacing dt (time_average is the trapezoidal mean).
double score_path(const std::string& tag, const std::vector<double>& path, double dt);

// Binary path dump: little-endian doubles, steps+1 rows of dp*|sites| columns, with
// a JSON sidecar describing the layout.
void dump_paths(const PathEnsemble& e, const std::string& matrix_path,
                const std::string& header_path);

}  // namespace mpp
