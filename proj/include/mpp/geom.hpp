#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mpp/errors.hpp"

namespace mpp {

// Spatial dimension is 1, 2 or 3; coordinates beyond the active dimension are zero.
inline constexpr int kMaxDim = 3;
using Pt = std::array<double, kMaxDim>;

inline Pt make_pt(double x, double y = 0.0, double z = 0.0) { return Pt{x, y, z}; }

inline double dist2(const Pt& a, const Pt& b) {
  double s = 0.0;
  for (int k = 0; k < kMaxDim; ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

inline double dist(const Pt& a, const Pt& b) { return std::sqrt(dist2(a, b)); }

inline double norm(const Pt& a) {
  return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
}

// Cube of the given volume centred at the origin: [-side/2, side/2]^dim.
struct Window {
  int dim = 2;
  double side = 1.0;

  static Window cube(double volume, int dim) {
    if (dim < 1 || dim > kMaxDim) throw invalid_parameter("Window: dim must be 1, 2 or 3");
    if (!(volume > 0.0)) throw invalid_parameter("Window: volume must be positive");
    return Window{dim, std::pow(volume, 1.0 / dim)};
  }

  double volume() const { return std::pow(side, dim); }
  double diam() const { return side * std::sqrt(static_cast<double>(dim)); }

  // shrink > 0 tests membership in the eroded window [-side/2+shrink, side/2-shrink]^dim
  bool contains(const Pt& p, double shrink = 0.0) const {
    double h = side / 2.0 - shrink;
    for (int k = 0; k < dim; ++k)
      if (p[k] < -h || p[k] > h) return false;
    return true;
  }
};

// volume of the unit ball in R^dim
double unit_ball_volume(int dim);

// Uniform bucket grid for fixed-radius neighbour queries over a box
// [lo, lo+span]^dim. Purely an accelerator: callers do their own distance checks.
struct NeighborGrid {
  int dim = 2;
  double lo = 0.0;
  double cell = 1.0;
  int per_axis = 1;
  std::vector<std::vector<std::uint32_t>> buckets;

  NeighborGrid() = default;
  NeighborGrid(const std::vector<Pt>& pts, int dim, double lo, double span, double cell_hint);

  int axis_cell(double v) const {
    int c = static_cast<int>(std::floor((v - lo) / cell));
    if (c < 0) c = 0;
    if (c >= per_axis) c = per_axis - 1;
    return c;
  }

  std::size_t flat(int cx, int cy, int cz) const {
    return (static_cast<std::size_t>(cz) * per_axis + cy) * per_axis + cx;
  }

  // Visit indices of all points in cells touching the ball B_r(x). Superset of the
  // true r-neighbourhood; may include the query point itself.
  template <class F>
  void near(const Pt& x, double r, F&& f) const {
    int lo_c[3] = {0, 0, 0}, hi_c[3] = {0, 0, 0};
    for (int k = 0; k < dim; ++k) {
      lo_c[k] = axis_cell(x[k] - r);
      hi_c[k] = axis_cell(x[k] + r);
    }
    for (int cz = lo_c[2]; cz <= hi_c[2]; ++cz)
      for (int cy = lo_c[1]; cy <= hi_c[1]; ++cy)
        for (int cx = lo_c[0]; cx <= hi_c[0]; ++cx)
          for (std::uint32_t idx : buckets[flat(cx, cy, cz)]) f(static_cast<int>(idx));
  }
};

}  // namespace mpp
