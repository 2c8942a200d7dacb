#pragma once

#include <functional>
#include <optional>
#include <string>

#include "mpp/graphs.hpp"
#include "mpp/rng.hpp"

namespace mpp {

// Nearest-neighbour Gibbs system on a finite graph. Unnormalised log density of a
// state vector v is beta * sum_edges psi(v_i, v_j) + gamma * sum_sites phi(v_i);
// -infinity from psi or phi encodes a hard constraint.
struct SpinModel {
  std::string name;            // hardcore | wr | ising | coloring | custom
  std::vector<double> states;  // value set K in increasing order
  double beta = 1.0;
  double gamma = 0.0;
  std::function<double(double, double)> psi;  // symmetric
  std::function<double(double)> phi;

  int k() const { return static_cast<int>(states.size()); }
};

// "hardcore:<lambda>", "wr:<lambda>", "ising:<beta>:<gamma>", "coloring:<k>"
SpinModel make_spin_model(const std::string& tag);

double log_weight(const SpinModel& m, const InteractionGraph& g, const std::vector<int>& cfg);

struct SpinDistribution {
  int order = 0;
  int k = 1;
  double log_z = 0.0;
  std::vector<double> prob;  // indexed by base-k code, site 0 least significant

  std::size_t code_of(const std::vector<int>& cfg) const;
  double prob_of(const std::vector<int>& cfg) const { return prob[code_of(cfg)]; }
  std::vector<std::vector<double>> marginals() const;  // [site][state index]
};

// Full enumeration; requires k^order <= 2^24.
SpinDistribution exact_distribution(const SpinModel& m, const InteractionGraph& g);

// Heat-bath single-site dynamics from the lexicographically minimal feasible state,
// sweeping sites in index order. Returns the state after `sweeps` full sweeps.
std::vector<int> glauber_sample(const SpinModel& m, const InteractionGraph& g, long sweeps,
                                SeedStream seed);

// Total variation between the conditional laws of the sites in `targets`, given the
// boundary sites `bound` pinned to v resp. z. Exact, by enumeration.
double conditional_tv(const SpinModel& m, const InteractionGraph& g,
                      const std::vector<int>& targets, const std::vector<int>& bound,
                      const std::vector<int>& v, const std::vector<int>& z);

// Worst-case single-site influence: max over sites of the total variation between
// conditional single-site laws under any two neighbour boundary conditions. Closed
// forms for hardcore (lambda/(1+lambda), any edge present) and Widom-Rowlinson
// (2*lambda/(1+2*lambda), some degree >= 2); everything else is enumerated.
double max_influence(const SpinModel& m, const InteractionGraph& g);
double max_influence_enumerated(const SpinModel& m, const InteractionGraph& g);

struct PercolationEstimate {
  double p = 0.0;
  double se = 0.0;
};

// Monte Carlo estimate of the probability that `inner` is connected to the external
// boundary of `region` through open sites: inner sites and sites outside the region
// are always open, remaining region sites are open independently with probability q.
// An empty external boundary gives exactly 0.
PercolationEstimate disagreement_percolation_prob(const InteractionGraph& g,
                                                  const std::vector<int>& inner,
                                                  const std::vector<int>& region, double q,
                                                  int reps, SeedStream seed);

// Hardcore uniqueness threshold Delta^Delta / (Delta-1)^(Delta+1); +infinity for
// Delta in [0, 1].
double critical_activity(double delta);

// sum over sites of state value times f(x / n^(1/d))
double total_spin(const std::vector<int>& cfg, const SpinModel& m, const PointConfig& pts,
                  const std::function<double(const Pt&)>& f);

}  // namespace mpp
