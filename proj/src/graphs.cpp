#include "mpp/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "mpp/predicates.hpp"

namespace mpp {

bool InteractionGraph::has_edge(int u, int v) const {
  if (u < 0 || u >= order()) return false;
  return std::binary_search(adj[u].begin(), adj[u].end(), v);
}

std::size_t InteractionGraph::edge_count() const {
  std::size_t s = 0;
  for (const auto& a : adj) s += a.size();
  return s / 2;
}

std::vector<std::pair<int, int>> InteractionGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < order(); ++u)
    for (int v : adj[u])
      if (u < v) out.emplace_back(u, v);
  return out;
}

namespace {

InteractionGraph from_edges(int order, std::vector<std::pair<int, int>> es,
                            std::vector<double> radii) {
  InteractionGraph g;
  g.adj.assign(order, {});
  for (auto [u, v] : es) {
    if (u == v) continue;
    g.adj[u].push_back(v);
    g.adj[v].push_back(u);
  }
  for (auto& a : g.adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  g.radii = std::move(radii);
  return g;
}

// ---------------------------------------------------------------------------
// six-sector machinery (d = 2): sector j spans angles
// [pi/12 + j*pi/3, pi/12 + (j+1)*pi/3), boundaries inclined pi/12 to the axes
// ---------------------------------------------------------------------------

constexpr double kSectorBase = std::numbers::pi / 12.0;
constexpr double kSectorSpan = std::numbers::pi / 3.0;

int sector_of(double dx, double dy) {
  double ang = std::atan2(dy, dx);  // (-pi, pi]
  double rel = ang - kSectorBase;
  while (rel < 0.0) rel += 2.0 * std::numbers::pi;
  int j = static_cast<int>(rel / kSectorSpan);
  return j >= 6 ? 5 : j;
}

// farthest window point from x inside the closed cone of sector j: the cone-window
// intersection is a convex polygon, so the maximum sits at a vertex (a window corner
// inside the cone or the exit point of a boundary ray)
double saturation_radius(const Window& w, const Pt& x, int j) {
  double half = w.side / 2.0;
  double best = 0.0;

  auto ray_exit = [&](double ang) {
    double cx = std::cos(ang), cy = std::sin(ang);
    double t = std::numeric_limits<double>::infinity();
    if (cx > 1e-15) t = std::min(t, (half - x[0]) / cx);
    if (cx < -1e-15) t = std::min(t, (-half - x[0]) / cx);
    if (cy > 1e-15) t = std::min(t, (half - x[1]) / cy);
    if (cy < -1e-15) t = std::min(t, (-half - x[1]) / cy);
    return std::isfinite(t) ? std::max(t, 0.0) : 0.0;
  };
  double a0 = kSectorBase + j * kSectorSpan;
  double a1 = a0 + kSectorSpan;
  best = std::max(best, ray_exit(a0));
  best = std::max(best, ray_exit(a1));

  double r0x = std::cos(a0), r0y = std::sin(a0);
  double r1x = std::cos(a1), r1y = std::sin(a1);
  for (int cxs = -1; cxs <= 1; cxs += 2)
    for (int cys = -1; cys <= 1; cys += 2) {
      double vx = cxs * half - x[0], vy = cys * half - x[1];
      // inside the closed cone: between ray0 and ray1 (opening < pi)
      if (r0x * vy - r0y * vx >= -1e-12 && vx * r1y - vy * r1x >= -1e-12)
        best = std::max(best, std::hypot(vx, vy));
    }
  return best;
}

// distances to other sites, bucketed by sector, sorted ascending
struct SectorView {
  std::array<std::vector<double>, 6> dist;
  void build(const PointConfig& cfg, int i) {
    for (auto& v : dist) v.clear();
    for (int j = 0; j < cfg.size(); ++j) {
      if (j == i) continue;
      double dx = cfg.pts[j][0] - cfg.pts[i][0];
      double dy = cfg.pts[j][1] - cfg.pts[i][1];
      dist[sector_of(dx, dy)].push_back(std::hypot(dx, dy));
    }
    for (auto& v : dist) std::sort(v.begin(), v.end());
  }
};

enum class SectorRule { kNearest, kDelaunay, kSoi };

// per-site radii from the sector construction (d = 2); other dimensions use the
// coarse bound ceil(diam(W)) + 1
std::vector<double> sector_radii(const PointConfig& cfg, SectorRule rule, int k) {
  Window w = cfg.window();
  std::vector<double> out(cfg.size(), 1.0);
  if (cfg.dim != 2) {
    double r = std::ceil(w.diam()) + 1.0;
    std::fill(out.begin(), out.end(), std::max(1.0, r));
    return out;
  }
  SectorView view;
  for (int i = 0; i < cfg.size(); ++i) {
    view.build(cfg, i);
    double maxT = 0.0;
    bool cone_empty = false;
    for (int j = 0; j < 6; ++j) {
      double tsat = saturation_radius(w, cfg.pts[i], j);
      const auto& ds = view.dist[j];
      if (ds.empty()) cone_empty = true;
      double T;
      if (rule == SectorRule::kSoi) {
        // smallest integer radius with an occupied inner third and an occupied
        // outer (2k/3, k] annulus
        T = tsat;
        int kmax = static_cast<int>(std::floor(tsat));
        for (int kk = 1; kk <= kmax; ++kk) {
          bool inner = !ds.empty() && ds.front() <= kk / 3.0;
          bool outer = std::upper_bound(ds.begin(), ds.end(), kk) -
                           std::upper_bound(ds.begin(), ds.end(), 2.0 * kk / 3.0) >
                       0;
          if (inner && outer) {
            T = kk;
            break;
          }
        }
      } else {
        int need = (rule == SectorRule::kDelaunay) ? 1 : k;
        T = (static_cast<int>(ds.size()) >= need) ? ds[need - 1] : tsat;
      }
      maxT = std::max(maxT, T);
    }
    double r;
    switch (rule) {
      case SectorRule::kNearest: r = std::ceil(2.0 * maxT) + 1.0; break;
      case SectorRule::kDelaunay:
        // an empty cone admits arbitrarily large empty circumdiscs bulging
        // through it, so only the whole-window bound is safe for this site
        r = cone_empty ? std::ceil(w.diam()) + 1.0 : std::ceil(2.0 * maxT);
        break;
      case SectorRule::kSoi: r = std::ceil(maxT) + 1.0; break;
      default: r = std::ceil(w.diam()) + 1.0;
    }
    out[i] = std::max(1.0, r);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gilbert
// ---------------------------------------------------------------------------

InteractionGraph build_gilbert(const PointConfig& cfg, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw invalid_parameter("build_gilbert: r must be > 0");
  int n = cfg.size();
  std::vector<std::pair<int, int>> es;
  double r2 = r * r;
  if (n < 64) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (dist2(cfg.pts[i], cfg.pts[j]) <= r2) es.emplace_back(i, j);
  } else {
    Window w = cfg.window();
    double cell = std::max(r, std::pow(cfg.n / n, 1.0 / cfg.dim));
    NeighborGrid grid(cfg.pts, cfg.dim, -w.side / 2.0, w.side, cell);
    for (int i = 0; i < n; ++i)
      grid.near(cfg.pts[i], r, [&](int j) {
        if (j > i && dist2(cfg.pts[i], cfg.pts[j]) <= r2) es.emplace_back(i, j);
      });
  }
  return from_edges(n, std::move(es), std::vector<double>(n, std::floor(1.0 + r)));
}

// ---------------------------------------------------------------------------
// k nearest neighbours
// ---------------------------------------------------------------------------

InteractionGraph build_knn(const PointConfig& cfg, int k) {
  if (k < 1) throw invalid_parameter("build_knn: k must be >= 1");
  int n = cfg.size();
  if (k >= n) throw invalid_parameter("build_knn: need k < |points|");
  std::vector<std::pair<int, int>> es;
  std::vector<std::pair<double, int>> cand;
  for (int i = 0; i < n; ++i) {
    cand.clear();
    for (int j = 0; j < n; ++j)
      if (j != i) cand.emplace_back(dist2(cfg.pts[i], cfg.pts[j]), j);
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    for (int t = 0; t < k; ++t) es.emplace_back(i, cand[t].second);
  }
  return from_edges(n, std::move(es), sector_radii(cfg, SectorRule::kNearest, k));
}

// ---------------------------------------------------------------------------
// Delaunay (Bowyer-Watson over the full plane with a ghost vertex)
// ---------------------------------------------------------------------------

namespace {

constexpr int kGhost = -1;

struct Tri {
  int v[3];
  bool ghost() const { return v[2] == kGhost; }
};

bool ghost_conflict(const std::vector<Pt>& pts, int u, int v, int p) {
  int o = orient2d(pts[u], pts[v], pts[p]);
  if (o > 0) return true;
  if (o < 0) return false;
  // collinear with the hull edge: conflict only when p falls on the closed segment
  double ex = pts[v][0] - pts[u][0], ey = pts[v][1] - pts[u][1];
  double px = pts[p][0] - pts[u][0], py = pts[p][1] - pts[u][1];
  double t = px * ex + py * ey;
  return t >= 0.0 && t <= ex * ex + ey * ey;
}

bool in_conflict(const std::vector<Pt>& pts, const Tri& t, int p) {
  if (t.ghost()) return ghost_conflict(pts, t.v[0], t.v[1], p);
  return incircle(pts[t.v[0]], t.v[0], pts[t.v[1]], t.v[1], pts[t.v[2]], t.v[2],
                  pts[p], p) > 0;
}

std::vector<std::pair<int, int>> delaunay_edges(const std::vector<Pt>& pts) {
  int n = static_cast<int>(pts.size());
  if (n <= 1) return {};
  if (n == 2) return {{0, 1}};

  // collinear-set fallback: consecutive sites along the line
  int i2 = -1;
  for (int j = 2; j < n; ++j)
    if (orient2d(pts[0], pts[1], pts[j]) != 0) {
      i2 = j;
      break;
    }
  if (i2 < 0) {
    double ex = pts[1][0] - pts[0][0], ey = pts[1][1] - pts[0][1];
    std::vector<std::pair<double, int>> along(n);
    for (int j = 0; j < n; ++j)
      along[j] = {(pts[j][0] - pts[0][0]) * ex + (pts[j][1] - pts[0][1]) * ey, j};
    std::sort(along.begin(), along.end());
    std::vector<std::pair<int, int>> es;
    for (int j = 0; j + 1 < n; ++j) {
      int a = along[j].second, b = along[j + 1].second;
      es.emplace_back(std::min(a, b), std::max(a, b));
    }
    return es;
  }

  std::vector<Tri> tris;
  {
    int a = 0, b = 1, c = i2;
    if (orient2d(pts[a], pts[b], pts[c]) < 0) std::swap(b, c);
    tris.push_back({{a, b, c}});
    tris.push_back({{b, a, kGhost}});
    tris.push_back({{c, b, kGhost}});
    tris.push_back({{a, c, kGhost}});
  }

  std::vector<Tri> keep, bad;
  for (int p = 2; p < n; ++p) {
    if (p == i2) continue;
    keep.clear();
    bad.clear();
    for (const Tri& t : tris)
      (in_conflict(pts, t, p) ? bad : keep).push_back(t);
    if (bad.empty()) throw model_error("build_delaunay: empty conflict set (duplicate site?)");

    // cavity boundary: directed edges of bad triangles whose reverse is not bad
    std::set<std::pair<int, int>> bad_dir;
    for (const Tri& t : bad)
      for (int e = 0; e < 3; ++e) bad_dir.insert({t.v[e], t.v[(e + 1) % 3]});
    tris = keep;
    for (const auto& [s, tvx] : bad_dir) {
      if (bad_dir.count({tvx, s})) continue;  // interior to the cavity
      // new triangle (s, tvx, p), rotated so a ghost vertex sits in slot 2
      if (s == kGhost)
        tris.push_back({{tvx, p, kGhost}});
      else if (tvx == kGhost)
        tris.push_back({{p, s, kGhost}});
      else
        tris.push_back({{s, tvx, p}});
    }
  }

  std::set<std::pair<int, int>> es;
  for (const Tri& t : tris) {
    if (t.ghost()) continue;
    for (int e = 0; e < 3; ++e) {
      int a = t.v[e], b = t.v[(e + 1) % 3];
      es.insert({std::min(a, b), std::max(a, b)});
    }
  }
  return {es.begin(), es.end()};
}

}  // namespace

InteractionGraph build_delaunay(const PointConfig& cfg) {
  if (cfg.dim != 2) throw invalid_parameter("build_delaunay: only d = 2 is supported");
  {
    std::vector<Pt> sorted = cfg.pts;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw invalid_parameter("build_delaunay: sites must be pairwise distinct");
  }
  return from_edges(cfg.size(), delaunay_edges(cfg.pts),
                    sector_radii(cfg, SectorRule::kDelaunay, 1));
}

// ---------------------------------------------------------------------------
// sphere of influence
// ---------------------------------------------------------------------------

InteractionGraph build_soi(const PointConfig& cfg) {
  int n = cfg.size();
  if (n < 2) throw invalid_parameter("build_soi: need at least two sites");
  std::vector<double> nn(n, std::numeric_limits<double>::infinity());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double d = dist2(cfg.pts[i], cfg.pts[j]);
      nn[i] = std::min(nn[i], d);
      nn[j] = std::min(nn[j], d);
    }
  for (double& v : nn) v = std::sqrt(v);
  std::vector<std::pair<int, int>> es;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dist(cfg.pts[i], cfg.pts[j]) < nn[i] + nn[j]) es.emplace_back(i, j);
  return from_edges(n, std::move(es), sector_radii(cfg, SectorRule::kSoi, 1));
}

// ---------------------------------------------------------------------------

bool check_edge_radii(const InteractionGraph& g, const PointConfig& cfg) {
  for (int u = 0; u < g.order(); ++u)
    for (int v : g.adj[u]) {
      double d = dist(cfg.pts[u], cfg.pts[v]);
      if (d > std::min(g.radii[u], g.radii[v])) return false;
    }
  return true;
}

StoppingSetReport verify_stopping_set(const GraphBuilder& build, const PointConfig& cfg,
                                      double rho, int x, int trials, SeedStream seed) {
  if (x < 0 || x >= cfg.size()) throw invalid_parameter("verify_stopping_set: bad vertex");
  InteractionGraph g = build(cfg);
  double R = g.radii[x];
  Pt px = cfg.pts[x];

  auto neighbour_coords = [&](const InteractionGraph& gg, const PointConfig& cc, int v) {
    std::vector<Pt> out;
    for (int u : gg.adj[v]) out.push_back(cc.pts[u]);
    std::sort(out.begin(), out.end());
    return out;
  };
  std::vector<Pt> base_nbrs = neighbour_coords(g, cfg, x);

  StoppingSetReport rep;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    PointConfig re{cfg.dim, cfg.n, {}};
    int new_x = -1;
    for (int i = 0; i < cfg.size(); ++i)
      if (dist(cfg.pts[i], px) <= R) {
        if (i == x) new_x = re.size();
        re.pts.push_back(cfg.pts[i]);
      }
    PointConfig fresh = sample_poisson(rho, cfg.n, cfg.dim, seed.child(t));
    for (const Pt& p : fresh.pts)
      if (dist(p, px) > R) re.pts.push_back(p);

    InteractionGraph g2 = build(re);
    if (neighbour_coords(g2, re, new_x) != base_nbrs) ++rep.violations;
  }
  return rep;
}

}  // namespace mpp
