#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mpp/geom.hpp"
#include "mpp/ips.hpp"
#include "mpp/pointproc.hpp"
#include "mpp/rng.hpp"

namespace mpp {

// Everything a per-site score functional may look at: the site's state history on
// [0, t0] and the odometer increment accumulated for that site.
struct ScoreInput {
  const StateHistory* history = nullptr;
  double t0 = 0.0;
  double odometer = 0.0;
};

struct ScoreFn {
  std::string tag;
  std::function<double(const ScoreInput&)> eval;
};

// tag grammar (fields are ':'-separated, lists ','-separated):
//   s1:<values>:<times>    1 iff the state lies in the value set at every listed time
//   s2:<values>            occupation time of the value set on [0, t0]
//   s3:<values>:<t_min>    1 iff that occupation time is at least t_min
//   s4                     terminal state
//   s5:<times>:<combiner>  combiner in {sum, max, min, mean} of the sampled states
//   odometer               the site's odometer total
ScoreFn make_score(const std::string& tag);

// f: W_1 -> R by name; "one" and "left_half" ship as the standard test functions.
std::function<double(const Pt&)> make_test_function(const std::string& name);

// sum over sites of scores[i] * f(x_i / n^(1/d))
double linear_statistic(const PointConfig& pts, const std::vector<double>& scores,
                        const std::function<double(const Pt&)>& f);

struct ReplicationResult {
  double n = 0.0;                    // window volume the runs were made on
  std::vector<double> values;        // one statistic per replication
  std::vector<std::uint64_t> seeds;  // stream key handed to each replication
};

// R independent runs of `runner`, replication r fed the stream base.child(r); the
// result is deterministic in `base` and independent of `threads`, and value r never
// depends on R (prefix property).
ReplicationResult replicate(const std::function<double(SeedStream)>& runner, int R,
                            SeedStream base, int threads = 1);

struct AsymptoticsRow {
  double n = 0.0;
  double mean_per_n = 0.0;
  double mean_se = 0.0;
  double var_per_n = 0.0;
  double var_se = 0.0;
  double var_ratio = 0.0;  // var_per_n relative to the previous row; NaN on the first
};

struct AsymptoticsTable {
  double rho = 0.0;
  double tol = 0.0;
  std::vector<AsymptoticsRow> rows;
  // set only when there are at least two rows: all successive n^{-1} variance
  // ratios lie in [1-tol, 1+tol]
  std::optional<bool> converged;
};

AsymptoticsTable asymptotics_table(const std::vector<ReplicationResult>& results, double rho,
                                   double tol = 0.15);

struct PartitionSet {
  int p = 0;
  // each partition is a list of blocks, each block an increasing list of 0-based
  // element indices; blocks are ordered by smallest member
  std::vector<std::vector<std::vector<int>>> partitions;
};

// all set partitions of {0..p-1}; count is Bell(p), p <= 10
PartitionSet set_partitions(int p);

// moments keyed by subset bitmask over p elements (bit i = element i). Returns
// sum over partitions of (-1)^(|blocks|-1) (|blocks|-1)! prod_blocks m[block].
double ursell_from_moments(int p, const std::map<std::uint32_t, double>& moments);

// standard partition-sum conversions; round trip is the identity, p <= 10
std::vector<double> moments_to_cumulants(const std::vector<double>& moments);
std::vector<double> cumulants_to_moments(const std::vector<double>& cumulants);

// unbiased k-statistics k1..k4; needs >= 2 values (>= 3 for k3, >= 4 for k4,
// earlier entries are still exact when the later ones are unavailable and 0 there)
std::array<double, 4> k_statistics(const std::vector<double>& sample);

struct CumulantReport {
  double k1 = 0.0, k2 = 0.0, k3 = 0.0, k4 = 0.0;
  double skew = 0.0;    // k3 / k2^(3/2)
  double exkurt = 0.0;  // k4 / k2^2
  double ks = 0.0;      // sup distance of the standardized sample to the normal cdf
  bool degenerate = false;
};

// k-statistics plus normality diagnostics of the standardized sample; R >= 8. A
// zero-variance sample sets the degenerate flag instead of dividing.
CumulantReport normality_report(const ReplicationResult& result);

struct MixingPoint {
  double s = 0.0;
  double omega = 0.0;
  double se = 0.0;
};

// Runs the model on a Poisson sample with two extra sites inserted at the given
// indices and returns the pair of score values at those sites.
using PairRunner =
    std::function<std::pair<double, double>(const PointConfig&, int, int, SeedStream)>;

// Correlation-decay diagnostic: for each separation s, anchors at (-s/2, 0, ...)
// and (s/2, 0, ...) are inserted into a Poisson(rho) sample on W_n and
// |E[f g] - E[f] E[g]| is estimated, the joint term over all replications and the
// two marginals on independent halves. Only Poisson input is supported (insertion
// is exact there); process must be "poisson:<rho>".
std::vector<MixingPoint> mixing_curve(const std::string& process, double n, int dim,
                                      const PairRunner& runner,
                                      const std::function<double(double)>& f,
                                      const std::function<double(double)>& g,
                                      const std::vector<double>& seps, int reps, SeedStream seed,
                                      int threads = 1);

}  // namespace mpp
