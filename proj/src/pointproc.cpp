#include "mpp/pointproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

namespace mpp {

namespace {

void check_domain(double n, int dim) {
  if (dim < 1 || dim > kMaxDim) throw invalid_parameter("point process: dim must be 1, 2 or 3");
  if (!(n > 0.0) || !std::isfinite(n)) throw invalid_parameter("point process: n must be positive");
}

Pt uniform_in_box(Rng& rng, int dim, double half) {
  Pt p{0.0, 0.0, 0.0};
  for (int k = 0; k < dim; ++k) p[k] = (2.0 * rng.u01() - 1.0) * half;
  return p;
}

// uniform in the ball B_R(0)
Pt uniform_in_ball(Rng& rng, int dim, double R) {
  Pt p{0.0, 0.0, 0.0};
  if (dim == 1) {
    p[0] = (2.0 * rng.u01() - 1.0) * R;
    return p;
  }
  if (dim == 2) {
    double r = R * std::sqrt(rng.u01());
    double th = 2.0 * std::numbers::pi * rng.u01();
    p[0] = r * std::cos(th);
    p[1] = r * std::sin(th);
    return p;
  }
  double r = R * std::cbrt(rng.u01());
  // isotropic direction from three normals
  for (;;) {
    double x = rng.normal(), y = rng.normal(), z = rng.normal();
    double nn = std::sqrt(x * x + y * y + z * z);
    if (nn > 1e-12) {
      p[0] = r * x / nn;
      p[1] = r * y / nn;
      p[2] = r * z / nn;
      return p;
    }
  }
}

}  // namespace

PointConfig sample_poisson(double rho, double n, int dim, SeedStream seed) {
  check_domain(n, dim);
  if (!(rho >= 0.0)) throw invalid_parameter("sample_poisson: rho must be >= 0");
  PointConfig cfg{dim, n, {}};
  Rng rng = seed.rng();
  std::uint64_t count = rng.poisson(rho * n);
  double half = cfg.window().side / 2.0;
  cfg.pts.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) cfg.pts.push_back(uniform_in_box(rng, dim, half));
  return cfg;
}

PointConfig sample_binomial(int m, double n, int dim, SeedStream seed) {
  check_domain(n, dim);
  if (m < 0) throw invalid_parameter("sample_binomial: m must be >= 0");
  PointConfig cfg{dim, n, {}};
  Rng rng = seed.rng();
  double half = cfg.window().side / 2.0;
  cfg.pts.reserve(m);
  for (int i = 0; i < m; ++i) cfg.pts.push_back(uniform_in_box(rng, dim, half));
  return cfg;
}

PointConfig sample_hardcore_thinned(double lambda, double h, double n, int dim, SeedStream seed) {
  check_domain(n, dim);
  if (!(lambda >= 0.0)) throw invalid_parameter("sample_hardcore_thinned: lambda must be >= 0");
  if (!(h >= 0.0)) throw invalid_parameter("sample_hardcore_thinned: h must be >= 0");
  PointConfig cfg{dim, n, {}};
  Window w = cfg.window();
  double half_dilated = w.side / 2.0 + h;
  double dilated_vol = std::pow(2.0 * half_dilated, dim);

  Rng rng = seed.rng();
  std::uint64_t count = rng.poisson(lambda * dilated_vol);
  std::vector<Pt> parents(count);
  std::vector<double> age(count);
  for (std::uint64_t i = 0; i < count; ++i) parents[i] = uniform_in_box(rng, dim, half_dilated);
  for (std::uint64_t i = 0; i < count; ++i) age[i] = rng.u01();

  NeighborGrid grid(parents, dim, -half_dilated, 2.0 * half_dilated, std::max(h, 1e-9));
  double h2 = h * h;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    if (!w.contains(parents[i])) continue;
    bool keep = true;
    grid.near(parents[i], h, [&](int j) {
      if (static_cast<std::size_t>(j) == i || !keep) return;
      if (dist2(parents[i], parents[j]) <= h2 &&
          (age[j] < age[i] || (age[j] == age[i] && static_cast<std::size_t>(j) < i)))
        keep = false;
    });
    if (keep) cfg.pts.push_back(parents[i]);
  }
  return cfg;
}

PointConfig sample_cluster(double lambda_p, double c, double R, double n, int dim,
                           SeedStream seed) {
  check_domain(n, dim);
  if (!(lambda_p >= 0.0) || !(c >= 0.0) || !(R >= 0.0))
    throw invalid_parameter("sample_cluster: need lambda_p >= 0, c >= 0, R >= 0");
  PointConfig cfg{dim, n, {}};
  Window w = cfg.window();
  double half_dilated = w.side / 2.0 + R;
  double dilated_vol = std::pow(2.0 * half_dilated, dim);

  Rng rng = seed.rng();
  std::uint64_t parents = rng.poisson(lambda_p * dilated_vol);
  for (std::uint64_t i = 0; i < parents; ++i) {
    Pt parent = uniform_in_box(rng, dim, half_dilated);
    std::uint64_t kids = rng.poisson(c);
    for (std::uint64_t j = 0; j < kids; ++j) {
      Pt off = R > 0.0 ? uniform_in_ball(rng, dim, R) : Pt{0.0, 0.0, 0.0};
      Pt p{parent[0] + off[0], parent[1] + off[1], parent[2] + off[2]};
      if (w.contains(p)) cfg.pts.push_back(p);
    }
  }

  // zero dispersion stacks siblings on their parent; configurations must stay
  // simple, so coincident sites are nudged apart by one representable step
  std::set<std::array<double, 3>> seen;
  std::size_t jittered = 0;
  for (Pt& p : cfg.pts) {
    while (seen.count(p)) {
      p[0] = std::nextafter(p[0], p[0] >= 0.0 ? -w.side : w.side);
      ++jittered;
    }
    seen.insert(p);
  }
  if (jittered > 0)
    std::fprintf(stderr, "sample_cluster: jittered %zu coincident sites\n", jittered);
  return cfg;
}

PointConfig palm_insert(const PointConfig& base, const std::vector<Pt>& sites) {
  PointConfig out = base;
  Window w = base.window();
  for (const Pt& s : sites) {
    if (!w.contains(s)) throw invalid_parameter("palm_insert: site outside the window");
    out.pts.push_back(s);
  }
  return out;
}

}  // namespace mpp
