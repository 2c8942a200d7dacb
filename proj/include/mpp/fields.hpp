#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mpp/geom.hpp"
#include "mpp/graphs.hpp"
#include "mpp/pointproc.hpp"
#include "mpp/rng.hpp"

namespace mpp {

// Random field driven by a covariate point process independent of the sampling
// process. Supported kinds: a constant field, a Gaussian-kernel shot noise
// M(x) = sum_y exp(-|x-y|^2), and a cell field carrying the i.i.d. U[0,1) value of
// the nearest covariate point.
struct FieldSpec {
  std::string kind;     // const | shotnoise | cellfield
  double c = 0.0;       // constant value
  double lambda = 1.0;  // covariate intensity
  double eps = 1e-8;    // tail budget: shot-noise truncation / cell coverage margin
};

// "const:<c>", "shotnoise:gauss:<lambda>", "cellfield:unif01:<lambda>"
FieldSpec make_field(const std::string& tag);

// Realized field on the window of volume n: covariates are sampled on the window
// dilated by the coverage margin so every evaluation inside the base window sees
// all relevant covariate points (up to the declared eps tail).
class FieldSample {
 public:
  static FieldSample draw(const FieldSpec& spec, double n, int dim, SeedStream seed);

  // deterministic given the realization; throws outside the base window
  double eval(const Pt& x) const;

  const FieldSpec& spec() const { return spec_; }
  const Window& window() const { return base_; }
  double margin() const { return margin_; }
  const PointConfig& covariates() const { return cov_; }

 private:
  FieldSpec spec_;
  Window base_;
  double margin_ = 0.0;
  PointConfig cov_;
  std::vector<double> values_;  // cell field marks
  std::unique_ptr<NeighborGrid> grid_;
};

// margin r with expected kernel mass (shot noise) or void probability (cell field)
// beyond r below eps
double coverage_margin(const FieldSpec& spec, int dim);

// sum over sites of zeta(x, M(x)) * f(x / n^(1/d))
double empirical_statistic(const PointConfig& pts, const FieldSample& field,
                           const std::function<double(const Pt&, double)>& zeta,
                           const std::function<double(const Pt&)>& f);

struct CovariogramEstimate {
  double value = 0.0;       // full-window sum normalized by n
  double bulk_value = 0.0;  // restricted to the window eroded by |h|+delta
  long pairs = 0;           // ordered pairs entering the full-window sum
};

// (4 theta_d delta^d)^{-1} sum over ordered pairs with y-x within delta of +h or -h
// of (M(x)-M(y))^2, per unit volume; requires 0 < delta < |h|
CovariogramEstimate covariogram_estimate(const PointConfig& pts, const FieldSample& field,
                                         const Pt& h, double delta);

// edge iff |x-y| <= clamp(M(x),[0,cap]) + clamp(M(y),[0,cap]); radii floor(1+2cap)
InteractionGraph build_geostat(const PointConfig& pts, const FieldSample& field, double cap);

struct EdgeLengthScores {
  std::vector<double> per_site;  // xi(x) = half the total length of incident edges
  double total = 0.0;            // equals the total edge length
};

EdgeLengthScores edge_length_scores(const InteractionGraph& g, const PointConfig& pts);

// mean of xi over sites in the window eroded by `erode`, per unit eroded volume
double bulk_mean_edge_length(const InteractionGraph& g, const PointConfig& pts, double erode);

}  // namespace mpp
