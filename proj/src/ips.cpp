#include "mpp/ips.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
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

}  // namespace

Shape Shape::disc(double r) {
  if (!(r > 0.0)) throw invalid_parameter("shape radius must be > 0");
  Shape s;
  s.r = r;
  double h = 2.0 * r / kGrid;
  for (int i = 0; i < kGrid; ++i) {
    double cy = -r + (i + 0.5) * h;
    std::uint64_t row = 0;
    for (int j = 0; j < kGrid; ++j) {
      double cx = -r + (j + 0.5) * h;
      if (cx * cx + cy * cy <= r * r) row |= std::uint64_t(1) << j;
    }
    s.rows[i] = row;
  }
  return s;
}

bool Shape::empty() const {
  for (std::uint64_t row : rows)
    if (row) return false;
  return true;
}

int Shape::cells() const {
  int c = 0;
  for (std::uint64_t row : rows) c += std::popcount(row);
  return c;
}

double Shape::area() const {
  double h = 2.0 * r / kGrid;
  return cells() * h * h;
}

void Shape::erode_disc(double dx, double dy, double br) {
  double h = 2.0 * r / kGrid;
  double br2 = br * br;
  for (int i = 0; i < kGrid; ++i) {
    if (!rows[i]) continue;
    double cy = -r + (i + 0.5) * h;
    double ry = cy - dy;
    if (ry * ry > br2) continue;
    std::uint64_t row = rows[i];
    for (int j = 0; j < kGrid; ++j) {
      if (!(row >> j & 1)) continue;
      double rx = -r + (j + 0.5) * h - dx;
      if (rx * rx + ry * ry <= br2) row &= ~(std::uint64_t(1) << j);
    }
    rows[i] = row;
  }
}

bool Shape::meets_disc(double dx, double dy, double br) const {
  double h = 2.0 * r / kGrid;
  double br2 = br * br;
  for (int i = 0; i < kGrid; ++i) {
    if (!rows[i]) continue;
    double ry = -r + (i + 0.5) * h - dy;
    if (ry * ry > br2) continue;
    std::uint64_t row = rows[i];
    for (int j = 0; j < kGrid; ++j) {
      if (!(row >> j & 1)) continue;
      double rx = -r + (j + 0.5) * h - dx;
      if (rx * rx + ry * ry <= br2) return true;
    }
  }
  return false;
}

ClockSet ClockSet::generate(int sites, double rate, double t0, const std::string& marks,
                            SeedStream seed) {
  if (sites < 0) throw invalid_parameter("clocks: negative site count");
  if (!(rate >= 0.0)) throw invalid_parameter("clocks: rate must be >= 0");
  if (!(t0 > 0.0)) throw invalid_parameter("clocks: t0 must be > 0");
  if (marks != "uniform") throw invalid_parameter("clocks: unknown mark sampler " + marks);
  ClockSet cs;
  cs.rate = rate;
  cs.t0 = t0;
  cs.rings.resize(sites);
  for (int i = 0; i < sites; ++i) {
    Rng rng = seed.child(i).rng();
    long count = rate > 0.0 ? rng.poisson(rate * t0) : 0;
    std::vector<double> times(count);
    for (long k = 0; k < count; ++k) times[k] = t0 * rng.u01p();
    std::sort(times.begin(), times.end());
    auto& out = cs.rings[i];
    out.reserve(count);
    for (long k = 0; k < count; ++k) {
      double t = times[k];
      // strict increase per site; equal draws have probability 0
      if (!out.empty() && t <= out.back().t) t = std::nextafter(out.back().t, 2.0 * t0);
      if (t > t0) continue;
      Ring r;
      r.t = t;
      r.u = rng.u01();
      r.aux = rng.u01();
      out.push_back(r);
    }
  }
  return cs;
}

long ClockSet::total() const {
  long n = 0;
  for (const auto& r : rings) n += static_cast<long>(r.size());
  return n;
}

double StateHistory::at(double t) const {
  if (events.empty() || t < events.front().t)
    throw invalid_parameter("history queried before its first event");
  // last event with time <= t
  std::size_t lo = 0, hi = events.size();
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (events[mid].t <= t)
      lo = mid;
    else
      hi = mid;
  }
  return events[lo].v;
}

namespace {

UpdateRule make_csa(std::vector<double> table, const std::string& name) {
  for (double p : table)
    if (!(p >= 0.0 && p <= 1.0)) throw invalid_parameter(name + ": probabilities must be in [0,1]");
  if (table.empty()) throw invalid_parameter(name + ": empty acceptance table");
  UpdateRule rule;
  rule.name = name;
  rule.discrete_ok = true;
  auto attempt = [table](const IpsContext& ctx) {
    double own = (*ctx.value)[ctx.site];
    if (own == 1.0) return 1.0;
    int occ = 0;
    for (int y : ctx.g->adj[ctx.site])
      if ((*ctx.value)[y] == 1.0) ++occ;
    double p = table[std::min<std::size_t>(occ, table.size() - 1)];
    return ctx.u < p ? 1.0 : own;
  };
  rule.apply = [attempt](const IpsContext& ctx, std::vector<SiteChange>& out) {
    out.push_back({ctx.site, attempt(ctx), nullptr});
    return 0.0;
  };
  rule.apply_discrete = attempt;
  return rule;
}

UpdateRule make_sir(double bi, double br) {
  if (!(bi >= 0.0 && bi <= 1.0 && br >= 0.0 && br <= 1.0))
    throw invalid_parameter("sir: rates must be in [0,1]");
  UpdateRule rule;
  rule.name = "sir";
  rule.discrete_ok = true;
  // states: 0 susceptible, 1 infected, 2 recovered (absorbing)
  auto attempt = [bi, br](const IpsContext& ctx) {
    double own = (*ctx.value)[ctx.site];
    if (own == 0.0) {
      int inf = 0;
      for (int y : ctx.g->adj[ctx.site])
        if ((*ctx.value)[y] == 1.0) ++inf;
      if (inf == 0) return 0.0;
      double p = 1.0 - std::pow(1.0 - bi, inf);
      return ctx.u < p ? 1.0 : 0.0;
    }
    if (own == 1.0) return ctx.u < br ? 2.0 : 1.0;
    return own;
  };
  rule.apply = [attempt](const IpsContext& ctx, std::vector<SiteChange>& out) {
    out.push_back({ctx.site, attempt(ctx), nullptr});
    return 0.0;
  };
  rule.apply_discrete = attempt;
  return rule;
}

UpdateRule make_voter() {
  UpdateRule rule;
  rule.name = "voter";
  rule.discrete_ok = true;
  auto attempt = [](const IpsContext& ctx) {
    const auto& adj = ctx.g->adj[ctx.site];
    if (adj.empty()) return (*ctx.value)[ctx.site];
    auto pick = std::min<std::size_t>(std::size_t(ctx.u * adj.size()), adj.size() - 1);
    return (*ctx.value)[adj[pick]];
  };
  rule.apply = [attempt](const IpsContext& ctx, std::vector<SiteChange>& out) {
    out.push_back({ctx.site, attempt(ctx), nullptr});
    return 0.0;
  };
  rule.apply_discrete = attempt;
  return rule;
}

UpdateRule make_majority() {
  UpdateRule rule;
  rule.name = "majority";
  rule.discrete_ok = true;
  auto attempt = [](const IpsContext& ctx) {
    double sum = 0.0;
    for (int y : ctx.g->adj[ctx.site]) sum += (*ctx.value)[y];
    if (sum > 0.0) return 1.0;
    if (sum < 0.0) return -1.0;
    return (*ctx.value)[ctx.site];
  };
  rule.apply = [attempt](const IpsContext& ctx, std::vector<SiteChange>& out) {
    out.push_back({ctx.site, attempt(ctx), nullptr});
    return 0.0;
  };
  rule.apply_discrete = attempt;
  return rule;
}

UpdateRule make_exclusion() {
  UpdateRule rule;
  rule.name = "exclusion";
  rule.discrete_ok = false;  // synchronous hops can collide on a shared target
  rule.apply = [](const IpsContext& ctx, std::vector<SiteChange>& out) {
    if ((*ctx.value)[ctx.site] != 1.0) return 0.0;
    const auto& adj = ctx.g->adj[ctx.site];
    if (adj.empty()) return 0.0;
    auto pick = std::min<std::size_t>(std::size_t(ctx.u * adj.size()), adj.size() - 1);
    int target = adj[pick];
    if ((*ctx.value)[target] == 0.0) {
      out.push_back({ctx.site, 0.0, nullptr});
      out.push_back({target, 1.0, nullptr});
    }
    return 0.0;
  };
  return rule;
}

UpdateRule make_sandpile() {
  UpdateRule rule;
  rule.name = "sandpile";
  rule.discrete_ok = true;
  rule.apply = [](const IpsContext& ctx, std::vector<SiteChange>& out) {
    double m = (*ctx.value)[ctx.site];
    if (m < 1.0) return 0.0;
    double excess = m - 1.0;
    out.push_back({ctx.site, 1.0, nullptr});
    const auto& adj = ctx.g->adj[ctx.site];
    if (!adj.empty()) {
      double share = excess / double(adj.size());
      for (int y : adj) out.push_back({y, (*ctx.value)[y] + share, nullptr});
    }
    // shipped mass counts toward the odometer even when no neighbour receives it
    return excess;
  };
  rule.apply_discrete = [](const IpsContext& ctx) {
    double m = (*ctx.value)[ctx.site];
    double kept = m >= 1.0 ? 1.0 : m;
    double in = 0.0;
    for (int y : ctx.g->adj[ctx.site]) {
      double my = (*ctx.value)[y];
      if (my >= 1.0) in += (my - 1.0) / double(ctx.g->degree(y));
    }
    return kept + in;
  };
  rule.odometer_discrete = [](const IpsContext& ctx) {
    double m = (*ctx.value)[ctx.site];
    return m >= 1.0 ? m - 1.0 : 0.0;
  };
  return rule;
}

UpdateRule make_ballistic(const std::vector<std::string>& parts) {
  std::function<double(double)> height;
  double shape_r = 0.0;
  if (parts.size() == 5 && parts[1] == "unif") {
    double a = parse_num(parts[2], "ballistic unif lo");
    double b = parse_num(parts[3], "ballistic unif hi");
    if (!(a >= 0.0 && b >= a)) throw invalid_parameter("ballistic: need 0 <= lo <= hi");
    height = [a, b](double q) { return a + (b - a) * q; };
    shape_r = parse_num(parts[4], "ballistic radius");
  } else if (parts.size() == 4 && parts[1] == "exp") {
    double mean = parse_num(parts[2], "ballistic exp mean");
    if (!(mean > 0.0)) throw invalid_parameter("ballistic: mean must be > 0");
    height = [mean](double q) { return -mean * std::log1p(-q); };
    shape_r = parse_num(parts[3], "ballistic radius");
  } else {
    throw invalid_parameter("ballistic:unif:<a>:<b>:<r> or ballistic:exp:<mean>:<r>");
  }
  if (!(shape_r > 0.0)) throw invalid_parameter("ballistic: radius must be > 0");

  Shape base = Shape::disc(shape_r);
  UpdateRule rule;
  rule.name = "ballistic";
  rule.uses_shapes = true;
  rule.apply = [height, shape_r, base](const IpsContext& ctx, std::vector<SiteChange>& out) {
    const Pt& px = ctx.pts->pts[ctx.site];
    // the particle sticks on top of the highest shape it touches (substrate = 0)
    double top = 0.0;
    auto consider = [&](int y) {
      const ShapePtr& sp = (*ctx.shape)[y];
      if (!sp || sp->empty()) return;
      const Pt& py = ctx.pts->pts[y];
      if (sp->meets_disc(px[0] - py[0], px[1] - py[1], shape_r))
        top = std::max(top, (*ctx.value)[y]);
    };
    consider(ctx.site);
    for (int y : ctx.g->adj[ctx.site]) consider(y);

    out.push_back({ctx.site, height(ctx.aux) + top, std::make_shared<Shape>(base)});
    for (int y : ctx.g->adj[ctx.site]) {
      const ShapePtr& sp = (*ctx.shape)[y];
      if (!sp || sp->empty()) continue;
      const Pt& py = ctx.pts->pts[y];
      auto eroded = std::make_shared<Shape>(*sp);
      eroded->erode_disc(px[0] - py[0], px[1] - py[1], shape_r);
      if (eroded->rows != sp->rows) out.push_back({y, (*ctx.value)[y], std::move(eroded)});
    }
    return 0.0;
  };
  return rule;
}

}  // namespace

UpdateRule make_rule(const std::string& tag) {
  auto parts = split_tag(tag);
  if (parts.empty()) throw invalid_parameter("empty rule tag");
  const std::string& kind = parts[0];
  if (kind == "rsa") {
    if (parts.size() != 1) throw invalid_parameter("rsa takes no parameters");
    return make_csa({1.0, 0.0}, "rsa");
  }
  if (kind == "csa") {
    if (parts.size() != 2) throw invalid_parameter("csa:<p0,p1,...>");
    std::vector<double> table;
    std::string item;
    std::istringstream in(parts[1]);
    while (std::getline(in, item, ',')) table.push_back(parse_num(item, "csa table entry"));
    return make_csa(std::move(table), "csa");
  }
  if (kind == "sir") {
    if (parts.size() != 3) throw invalid_parameter("sir:<infect>:<recover>");
    return make_sir(parse_num(parts[1], "sir infect"), parse_num(parts[2], "sir recover"));
  }
  if (kind == "voter") {
    if (parts.size() != 1) throw invalid_parameter("voter takes no parameters");
    return make_voter();
  }
  if (kind == "majority") {
    if (parts.size() != 1) throw invalid_parameter("majority takes no parameters");
    return make_majority();
  }
  if (kind == "exclusion") {
    if (parts.size() != 1) throw invalid_parameter("exclusion takes no parameters");
    return make_exclusion();
  }
  if (kind == "sandpile") {
    if (parts.size() != 1) throw invalid_parameter("sandpile takes no parameters");
    return make_sandpile();
  }
  if (kind == "ballistic") return make_ballistic(parts);
  throw invalid_parameter("unknown rule: " + kind);
}

namespace {

struct GlobalRing {
  double t;
  int site;
  int idx;
};

std::vector<GlobalRing> global_order(const ClockSet& clocks) {
  std::vector<GlobalRing> order;
  order.reserve(clocks.total());
  for (int site = 0; site < static_cast<int>(clocks.rings.size()); ++site)
    for (int idx = 0; idx < static_cast<int>(clocks.rings[site].size()); ++idx)
      order.push_back({clocks.rings[site][idx].t, site, idx});
  std::sort(order.begin(), order.end(), [](const GlobalRing& a, const GlobalRing& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.site != b.site) return a.site < b.site;
    return a.idx < b.idx;
  });
  return order;
}

void check_shape(const PointConfig& pts, const InteractionGraph& g,
                 const std::vector<double>& initial, const ClockSet* clocks,
                 const UpdateRule& rule) {
  if (g.order() != pts.size()) throw invalid_parameter("ips: graph does not match the points");
  if (static_cast<int>(initial.size()) != pts.size())
    throw invalid_parameter("ips: initial state size mismatch");
  if (clocks && static_cast<int>(clocks->rings.size()) != pts.size())
    throw invalid_parameter("ips: clocks do not match the points");
  if (rule.uses_shapes && pts.dim != 2)
    throw invalid_parameter("ips: " + rule.name + " requires d = 2");
}

}  // namespace

RunResult run_continuous(const PointConfig& pts, const InteractionGraph& g,
                         const std::vector<double>& initial, const ClockSet& clocks,
                         const UpdateRule& rule) {
  check_shape(pts, g, initial, &clocks, rule);
  if (!rule.apply) throw invalid_parameter("ips: rule has no continuous update");
  const int n = pts.size();

  RunResult res;
  res.histories.resize(n);
  res.odometer.assign(n, 0.0);
  std::vector<double> value(initial);
  std::vector<ShapePtr> shape(n);
  for (int i = 0; i < n; ++i) res.histories[i].events.push_back({0.0, initial[i]});

  IpsContext ctx;
  ctx.g = &g;
  ctx.pts = &pts;
  ctx.value = &value;
  ctx.shape = &shape;

  std::vector<SiteChange> changes;
  for (const GlobalRing& gr : global_order(clocks)) {
    const Ring& ring = clocks.rings[gr.site][gr.idx];
    ctx.site = gr.site;
    ctx.u = ring.u;
    ctx.aux = ring.aux;
    changes.clear();
    res.odometer[gr.site] += rule.apply(ctx, changes);
    for (const SiteChange& c : changes) {
      if (c.site < 0 || c.site >= n || !std::isfinite(c.value))
        throw model_error("ips: rule produced an invalid update");
      if (c.value != value[c.site]) {
        value[c.site] = c.value;
        res.histories[c.site].events.push_back({gr.t, c.value});
      }
      if (c.shape) shape[c.site] = c.shape;
    }
  }
  return res;
}

RunResult run_discrete(const PointConfig& pts, const InteractionGraph& g,
                       const std::vector<double>& initial, int J, const UpdateRule& rule,
                       SeedStream seed) {
  check_shape(pts, g, initial, nullptr, rule);
  if (J < 0) throw invalid_parameter("ips: round count must be >= 0");
  if (!rule.discrete_ok || !rule.apply_discrete)
    throw invalid_parameter("ips: rule " + rule.name + " has no synchronous form");
  const int n = pts.size();

  RunResult res;
  res.histories.resize(n);
  res.odometer.assign(n, 0.0);
  std::vector<double> value(initial), next(n);
  std::vector<ShapePtr> shape;  // unused: shape rules have no synchronous form
  for (int i = 0; i < n; ++i) res.histories[i].events.push_back({0.0, initial[i]});

  IpsContext ctx;
  ctx.g = &g;
  ctx.pts = &pts;
  ctx.value = &value;
  ctx.shape = &shape;

  for (int j = 1; j <= J; ++j) {
    SeedStream round = seed.child(j);
    for (int i = 0; i < n; ++i) {
      Rng rng = round.child(i).rng();
      ctx.site = i;
      ctx.u = rng.u01();
      ctx.aux = rng.u01();
      next[i] = rule.apply_discrete(ctx);
      if (!std::isfinite(next[i])) throw model_error("ips: rule produced an invalid update");
      if (rule.odometer_discrete) res.odometer[i] += rule.odometer_discrete(ctx);
    }
    for (int i = 0; i < n; ++i)
      if (next[i] != value[i]) {
        value[i] = next[i];
        res.histories[i].events.push_back({double(j), next[i]});
      }
  }
  return res;
}

std::vector<int> BackwardCluster::sites() const {
  std::vector<int> out;
  for (const auto& m : members)
    if (out.empty() || out.back() != m.site) out.push_back(m.site);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

BackwardCluster backward_cluster(int x, const ClockSet& clocks, const InteractionGraph& g,
                                 const PointConfig& pts, double t) {
  const int n = g.order();
  if (n != pts.size() || static_cast<int>(clocks.rings.size()) != n)
    throw invalid_parameter("backward_cluster: inconsistent inputs");
  if (x < 0 || x >= n) throw invalid_parameter("backward_cluster: bad site");
  if (!(t >= 0.0 && t <= clocks.t0)) throw invalid_parameter("backward_cluster: bad anchor time");

  // global rings in event-loop order; ids index this order
  std::vector<GlobalRing> order = global_order(clocks);
  const int m = static_cast<int>(order.size());

  // per-site super-clocks as increasing id lists
  std::vector<std::vector<int>> super(n);
  for (int id = 0; id < m; ++id) {
    int w = order[id].site;
    super[w].push_back(id);
    for (int y : g.adj[w]) super[y].push_back(id);
  }

  std::vector<char> touched(n, 0), activated(m, 0);
  std::vector<int> ptr(n, 0), stack;

  // add every vertex of y strictly before ring id limit; each added ring id is a
  // member vertex of y and must itself be expanded
  auto touch = [&](int y, int limit) {
    touched[y] = 1;
    auto& sc = super[y];
    while (ptr[y] < static_cast<int>(sc.size()) && sc[ptr[y]] < limit) {
      int id = sc[ptr[y]++];
      if (!activated[id]) {
        activated[id] = 1;
        stack.push_back(id);
      }
    }
  };

  // anchor: the history of x up to time t, i.e. all own vertices with time <= t
  touched[x] = 1;
  while (ptr[x] < static_cast<int>(super[x].size()) && order[super[x][ptr[x]]].t <= t) {
    int id = super[x][ptr[x]++];
    if (!activated[id]) {
      activated[id] = 1;
      stack.push_back(id);
    }
  }

  // expanding a ring id covers the in-edges of every member vertex at that time:
  // predecessors are the earlier vertices of all sites adjacent-or-equal to the
  // ringing site
  while (!stack.empty()) {
    int rid = stack.back();
    stack.pop_back();
    int w = order[rid].site;
    touch(w, rid);
    for (int y : g.adj[w]) touch(y, rid);
  }

  BackwardCluster cluster;
  cluster.anchor_site = x;
  cluster.anchor_time = t;
  for (int y = 0; y < n; ++y) {
    if (!touched[y]) continue;
    cluster.members.push_back({y, 0.0});
    for (int i = 0; i < ptr[y]; ++i) cluster.members.push_back({y, order[super[y][i]].t});
    double d = dist(pts.pts[y], pts.pts[x]);
    cluster.diam = std::max(cluster.diam, d);
  }
  return cluster;
}

double stabilization_estimate(int x, const ClockSet& clocks, const InteractionGraph& g,
                              const PointConfig& pts) {
  if (x < 0 || x >= g.order()) throw invalid_parameter("stabilization_estimate: bad site");
  double last = 0.0;
  auto scan = [&](int y) {
    if (!clocks.rings[y].empty()) last = std::max(last, clocks.rings[y].back().t);
  };
  scan(x);
  for (int y : g.adj[x]) scan(y);
  BackwardCluster cluster = backward_cluster(x, clocks, g, pts, last);
  double max_radius = 0.0;
  for (int y : cluster.sites()) max_radius = std::max(max_radius, double(g.radii[y]));
  return cluster.diam + max_radius;
}

void dump_histories(const RunResult& run, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw io_error("cannot open " + path);
  std::fprintf(f, "site,time,state\n");
  for (std::size_t site = 0; site < run.histories.size(); ++site)
    for (const auto& ev : run.histories[site].events)
      std::fprintf(f, "%zu,%.17g,%.17g\n", site, ev.t, ev.v);
  std::fclose(f);
}

}  // namespace mpp
