#include "mpp/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mpp/errors.hpp"

namespace mpp {

namespace {

std::vector<std::string> split_tag(const std::string& tag) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(tag);
  while (std::getline(in, cur, ':')) parts.push_back(cur);
  return parts;
}

double parse_num(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw invalid_parameter(std::string("bad numeric field for ") + what + ": " + s);
  }
}

// expected mass of the Gaussian kernel exp(-s^2) beyond radius r under a Poisson
// covariate of intensity lambda
double gauss_tail(double lambda, int dim, double r) {
  const double pi = std::numbers::pi;
  switch (dim) {
    case 1:
      return lambda * std::sqrt(pi) * std::erfc(r);
    case 2:
      return lambda * pi * std::exp(-r * r);
    default:
      return lambda * (2.0 * pi * r * std::exp(-r * r) + std::pow(pi, 1.5) * std::erfc(r));
  }
}

}  // namespace

FieldSpec make_field(const std::string& tag) {
  auto parts = split_tag(tag);
  if (parts.empty()) throw invalid_parameter("empty field tag");
  FieldSpec spec;
  if (parts[0] == "const") {
    if (parts.size() != 2) throw invalid_parameter("const:<c>");
    spec.kind = "const";
    spec.c = parse_num(parts[1], "const value");
    return spec;
  }
  if (parts[0] == "shotnoise") {
    if (parts.size() != 3 || parts[1] != "gauss")
      throw invalid_parameter("shotnoise:gauss:<lambda>");
    spec.kind = "shotnoise";
    spec.lambda = parse_num(parts[2], "shotnoise lambda");
    if (!(spec.lambda > 0.0)) throw invalid_parameter("shotnoise: lambda must be > 0");
    return spec;
  }
  if (parts[0] == "cellfield") {
    if (parts.size() != 3 || parts[1] != "unif01")
      throw invalid_parameter("cellfield:unif01:<lambda>");
    spec.kind = "cellfield";
    spec.lambda = parse_num(parts[2], "cellfield lambda");
    if (!(spec.lambda > 0.0)) throw invalid_parameter("cellfield: lambda must be > 0");
    return spec;
  }
  throw invalid_parameter("unknown field kind: " + parts[0]);
}

double coverage_margin(const FieldSpec& spec, int dim) {
  if (spec.kind == "const") return 0.0;
  if (!(spec.eps > 0.0)) throw invalid_parameter("field: eps must be > 0");
  if (spec.kind == "shotnoise") {
    if (gauss_tail(spec.lambda, dim, 0.0) <= spec.eps) return 0.0;
    if (dim == 2) return std::sqrt(std::log(spec.lambda * std::numbers::pi / spec.eps));
    double lo = 0.0, hi = 100.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (gauss_tail(spec.lambda, dim, mid) > spec.eps)
        lo = mid;
      else
        hi = mid;
    }
    return hi;
  }
  // cell field: margin with void probability exp(-lambda theta_d r^d) = eps
  return std::pow(std::log(1.0 / spec.eps) / (spec.lambda * unit_ball_volume(dim)), 1.0 / dim);
}

FieldSample FieldSample::draw(const FieldSpec& spec, double n, int dim, SeedStream seed) {
  FieldSample s;
  s.spec_ = spec;
  s.base_ = Window::cube(n, dim);
  s.margin_ = coverage_margin(spec, dim);
  if (spec.kind == "const") {
    s.cov_.dim = dim;
    s.cov_.n = n;
    return s;
  }
  double span = s.base_.side + 2.0 * s.margin_;
  s.cov_ = sample_poisson(spec.lambda, std::pow(span, dim), dim, seed.child(0));
  if (spec.kind == "cellfield") {
    Rng rng = seed.child(1).rng();
    s.values_.resize(s.cov_.pts.size());
    for (double& v : s.values_) v = rng.u01();
  }
  double cell = s.margin_ > 0.0 ? s.margin_ : span / 16.0;
  s.grid_ = std::make_unique<NeighborGrid>(s.cov_.pts, dim, -span / 2.0, span, cell);
  return s;
}

double FieldSample::eval(const Pt& x) const {
  if (!base_.contains(x)) throw invalid_parameter("field evaluated outside its window");
  if (spec_.kind == "const") return spec_.c;
  if (spec_.kind == "shotnoise") {
    double sum = 0.0;
    double r2 = margin_ * margin_;
    grid_->near(x, margin_, [&](int j) {
      double d2 = dist2(x, cov_.pts[j]);
      if (d2 <= r2) sum += std::exp(-d2);
    });
    return sum;
  }
  // cell field: value of the nearest covariate, ties broken by covariate index
  if (cov_.pts.empty()) throw model_error("cell field with an empty covariate realization");
  double span = base_.side + 2.0 * margin_;
  double r = margin_ > 0.0 ? margin_ : span;
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (;;) {
    grid_->near(x, r, [&](int j) {
      double d2 = dist2(x, cov_.pts[j]);
      if (d2 < best_d2 || (d2 == best_d2 && j < best)) {
        best = j;
        best_d2 = d2;
      }
    });
    // the candidate is final only once the search ball is fully covered
    if (best >= 0 && best_d2 <= r * r) break;
    if (r > span) {
      for (int j = 0; j < cov_.size(); ++j) {
        double d2 = dist2(x, cov_.pts[j]);
        if (d2 < best_d2 || (d2 == best_d2 && j < best)) {
          best = j;
          best_d2 = d2;
        }
      }
      break;
    }
    r *= 2.0;
  }
  return values_[best];
}

double empirical_statistic(const PointConfig& pts, const FieldSample& field,
                           const std::function<double(const Pt&, double)>& zeta,
                           const std::function<double(const Pt&)>& f) {
  double scale = pts.window().side;
  double sum = 0.0;
  for (const Pt& x : pts.pts) {
    Pt rescaled{x[0] / scale, x[1] / scale, x[2] / scale};
    sum += zeta(x, field.eval(x)) * f(rescaled);
  }
  return sum;
}

CovariogramEstimate covariogram_estimate(const PointConfig& pts, const FieldSample& field,
                                         const Pt& h, double delta) {
  double hnorm = norm(h);
  if (!(delta > 0.0) || !(delta < hnorm))
    throw invalid_parameter("covariogram: need 0 < delta < |h|");
  Window w = pts.window();

  std::vector<double> m(pts.size());
  for (int i = 0; i < pts.size(); ++i) m[i] = field.eval(pts.pts[i]);

  NeighborGrid grid(pts.pts, pts.dim, -w.side / 2.0, w.side, delta);
  double erode = hnorm + delta;
  double eroded_side = w.side - 2.0 * erode;

  CovariogramEstimate est;
  double sum = 0.0, bulk_sum = 0.0;
  double d2max = delta * delta;
  for (int i = 0; i < pts.size(); ++i) {
    bool in_bulk = eroded_side > 0.0 && w.contains(pts.pts[i], erode);
    for (int sgn : {+1, -1}) {
      Pt target = pts.pts[i];
      for (int k = 0; k < pts.dim; ++k) target[k] += sgn * h[k];
      grid.near(target, delta, [&](int j) {
        if (dist2(pts.pts[j], target) > d2max) return;
        double d = m[i] - m[j];
        sum += d * d;
        est.pairs += 1;
        if (in_bulk) bulk_sum += d * d;
      });
    }
  }
  double norm_factor = 4.0 * unit_ball_volume(pts.dim) * std::pow(delta, pts.dim);
  est.value = sum / norm_factor / pts.n;
  est.bulk_value = eroded_side > 0.0
                       ? bulk_sum / norm_factor / std::pow(eroded_side, pts.dim)
                       : 0.0;
  return est;
}

InteractionGraph build_geostat(const PointConfig& pts, const FieldSample& field, double cap) {
  if (!(cap >= 0.0)) throw invalid_parameter("geostat: cap must be >= 0");
  const int n = pts.size();
  std::vector<double> m(n);
  for (int i = 0; i < n; ++i) m[i] = std::clamp(field.eval(pts.pts[i]), 0.0, cap);

  InteractionGraph g;
  g.adj.assign(n, {});
  g.radii.assign(n, static_cast<int>(std::floor(1.0 + 2.0 * cap)));

  auto try_edge = [&](int i, int j) {
    double r = m[i] + m[j];
    if (dist2(pts.pts[i], pts.pts[j]) <= r * r) {
      g.adj[i].push_back(j);
      g.adj[j].push_back(i);
    }
  };
  if (n < 64 || cap <= 0.0) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) try_edge(i, j);
  } else {
    Window w = pts.window();
    NeighborGrid grid(pts.pts, pts.dim, -w.side / 2.0, w.side, 2.0 * cap);
    for (int i = 0; i < n; ++i)
      grid.near(pts.pts[i], 2.0 * cap, [&](int j) {
        if (j > i) try_edge(i, j);
      });
  }
  for (auto& a : g.adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return g;
}

EdgeLengthScores edge_length_scores(const InteractionGraph& g, const PointConfig& pts) {
  if (g.order() != pts.size()) throw invalid_parameter("edge_length_scores: size mismatch");
  EdgeLengthScores s;
  s.per_site.assign(pts.size(), 0.0);
  for (int i = 0; i < g.order(); ++i) {
    double acc = 0.0;
    for (int j : g.adj[i]) acc += dist(pts.pts[i], pts.pts[j]);
    s.per_site[i] = acc / 2.0;
    s.total += s.per_site[i];
  }
  return s;
}

double bulk_mean_edge_length(const InteractionGraph& g, const PointConfig& pts, double erode) {
  Window w = pts.window();
  double eroded_side = w.side - 2.0 * erode;
  if (!(eroded_side > 0.0)) throw invalid_parameter("bulk window is empty after erosion");
  EdgeLengthScores s = edge_length_scores(g, pts);
  double sum = 0.0;
  for (int i = 0; i < pts.size(); ++i)
    if (w.contains(pts.pts[i], erode)) sum += s.per_site[i];
  return sum / std::pow(eroded_side, pts.dim);
}

}  // namespace mpp
