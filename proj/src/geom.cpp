#include "mpp/geom.hpp"

#include <algorithm>
#include <numbers>

namespace mpp {

double unit_ball_volume(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: throw invalid_parameter("unit_ball_volume: dim must be 1, 2 or 3");
  }
}

NeighborGrid::NeighborGrid(const std::vector<Pt>& pts, int dim_, double lo_, double span,
                           double cell_hint) {
  dim = dim_;
  lo = lo_;
  if (!(span > 0.0)) span = 1.0;
  cell = std::max(cell_hint, span / 512.0);
  per_axis = std::max(1, static_cast<int>(std::ceil(span / cell)));
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) total *= static_cast<std::size_t>(per_axis);
  buckets.assign(total, {});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int cx = axis_cell(pts[i][0]);
    int cy = dim > 1 ? axis_cell(pts[i][1]) : 0;
    int cz = dim > 2 ? axis_cell(pts[i][2]) : 0;
    buckets[flat(cx, cy, cz)].push_back(static_cast<std::uint32_t>(i));
  }
}

}  // namespace mpp
