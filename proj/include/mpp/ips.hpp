#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mpp/graphs.hpp"
#include "mpp/pointproc.hpp"
#include "mpp/rng.hpp"

namespace mpp {

// Compact particle shape for deposition dynamics: a disc of radius r minus disc
// bites, represented by the cell centers it covers on a fixed 64x64 grid over
// [-r, r]^2. All shape predicates sample cell centers, so erosion and overlap are
// mutually consistent and fully deterministic.
struct Shape {
  static constexpr int kGrid = 64;
  double r = 0.0;
  std::array<std::uint64_t, kGrid> rows{};

  static Shape disc(double r);
  bool empty() const;
  int cells() const;
  double area() const;  // covered cells times cell area
  // remove the disc of radius br centered at local offset (dx, dy)
  void erode_disc(double dx, double dy, double br);
  // does the shape meet the disc of radius br centered at local offset (dx, dy)?
  bool meets_disc(double dx, double dy, double br) const;
};
using ShapePtr = std::shared_ptr<const Shape>;

// One clock ring: u drives the accept/choose decision of the update rule, aux
// drives auxiliary draws (deposition heights).
struct Ring {
  double t = 0.0;
  double u = 0.0;
  double aux = 0.0;
};

struct ClockSet {
  double rate = 1.0;
  double t0 = 1.0;
  std::vector<std::vector<Ring>> rings;  // per site, strictly increasing in t

  // marks must be "uniform": both mark components are independent U[0,1).
  static ClockSet generate(int sites, double rate, double t0, const std::string& marks,
                           SeedStream seed);
  long total() const;
};

// Per-site cadlag record: first event is (0, initial); later events are appended
// only when the recorded value actually changes, at times of the site's super-clock.
struct StateHistory {
  struct Event {
    double t;
    double v;
  };
  std::vector<Event> events;

  double at(double t) const;  // value of the last event with time <= t
  double initial() const { return events.front().v; }
  double last() const { return events.back().v; }
};

struct IpsContext {
  int site = 0;  // ringing site
  double u = 0.0;
  double aux = 0.0;
  const InteractionGraph* g = nullptr;
  const PointConfig* pts = nullptr;
  const std::vector<double>* value = nullptr;
  const std::vector<ShapePtr>* shape = nullptr;  // null entries mean the empty shape
};

// One modified site. The run layer appends a history event only when value differs
// from the current one; a non-null shape replaces the working shape.
struct SiteChange {
  int site = 0;
  double value = 0.0;
  ShapePtr shape;
};

// All randomness enters through the ring marks, so a rule is a deterministic
// function of (site, marks, neighbour states).
struct UpdateRule {
  std::string name;
  bool discrete_ok = false;
  bool uses_shapes = false;
  // continuous update at a ring; emits changes for the ringing site and possibly
  // its neighbours, returns the mass shipped out (sandpile odometer, else 0)
  std::function<double(const IpsContext&, std::vector<SiteChange>&)> apply;
  // synchronous update: the new value of ctx.site computed from round-start values
  std::function<double(const IpsContext&)> apply_discrete;
  // per-round odometer increment of ctx.site from round-start values
  std::function<double(const IpsContext&)> odometer_discrete;
};

// rsa | csa:<p0,p1,...> | sir:<bI>:<bR> | voter | majority | exclusion | sandpile |
// ballistic:unif:<a>:<b>:<r> | ballistic:exp:<mean>:<r>
UpdateRule make_rule(const std::string& tag);

struct RunResult {
  std::vector<StateHistory> histories;
  std::vector<double> odometer;  // zero except for sandpile runs
};

// Global event loop over all rings ordered by (time, site, ring index); at each
// ring the rule reads the pre-ring states and all its changes commit at once.
RunResult run_continuous(const PointConfig& pts, const InteractionGraph& g,
                         const std::vector<double>& initial, const ClockSet& clocks,
                         const UpdateRule& rule);

// J synchronous rounds at times 1..J; round j computes every site's new value from
// the round-(j-1) values, with marks drawn from seed.child(j).child(site).
RunResult run_discrete(const PointConfig& pts, const InteractionGraph& g,
                       const std::vector<double>& initial, int J, const UpdateRule& rule,
                       SeedStream seed);

struct SpaceTimeVertex {
  int site = 0;
  double t = 0.0;
};

// All space-time events from which the history of the anchor site up to the anchor
// time can be influenced, traced backward through shared super-clock rings.
struct BackwardCluster {
  int anchor_site = 0;
  double anchor_time = 0.0;
  std::vector<SpaceTimeVertex> members;  // grouped by site, increasing in time
  double diam = 0.0;                     // max |y - anchor| over member sites

  std::vector<int> sites() const;  // distinct member sites, increasing
};

BackwardCluster backward_cluster(int x, const ClockSet& clocks, const InteractionGraph& g,
                                 const PointConfig& pts, double t);

// Radius outside which resampling cannot affect the history at x: cluster diameter
// at the last super-clock time of x plus the largest graph radius in the cluster.
double stabilization_estimate(int x, const ClockSet& clocks, const InteractionGraph& g,
                              const PointConfig& pts);

// History dump: CSV rows (site, time, state).
void dump_histories(const RunResult& run, const std::string& path);

}  // namespace mpp
