#include "mpp/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
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

int DiffusionSpec::steps_for(double dt) const {
  if (!(dt > 0.0) || !(t0 > 0.0)) throw invalid_parameter("diffusion: dt and t0 must be > 0");
  double ratio = t0 / dt;
  long steps = std::lround(ratio);
  if (steps < 1 || std::fabs(ratio - double(steps)) > 1e-9 * ratio)
    throw invalid_parameter("diffusion: dt must divide t0");
  return static_cast<int>(steps);
}

DiffusionSpec make_diffusion(const std::string& tag) {
  auto parts = split_tag(tag);
  if (parts.empty()) throw invalid_parameter("empty diffusion tag");
  DiffusionSpec spec;
  spec.dp = 1;
  if (parts[0] == "ou") {
    if (parts.size() != 3) throw invalid_parameter("ou:<rate>:<noise>");
    double rate = parse_num(parts[1], "ou rate");
    double noise = parse_num(parts[2], "ou noise");
    spec.lip = std::fabs(rate);
    spec.f1 = [rate](const double* m, double* out) { out[0] = -rate * m[0]; };
    spec.f2 = nullptr;
    spec.sigma = {noise};
    return spec;
  }
  if (parts[0] == "coupled") {
    if (parts.size() != 4) throw invalid_parameter("coupled:<rate>:<c>:<noise>");
    double rate = parse_num(parts[1], "coupled rate");
    double c = parse_num(parts[2], "coupled strength");
    double noise = parse_num(parts[3], "coupled noise");
    spec.lip = std::fabs(rate) + 2.0 * std::fabs(c);
    spec.f1 = [rate](const double* m, double* out) { out[0] = -rate * m[0]; };
    spec.f2 = [c](const double* m, const double* other, double* out) {
      out[0] = c * (other[0] - m[0]);
    };
    spec.sigma = {noise};
    return spec;
  }
  throw invalid_parameter("unknown diffusion tag: " + parts[0]);
}

BrownianStore BrownianStore::generate(int sites, int dp, int steps, double dt, SeedStream seed) {
  if (sites < 0 || dp < 1 || steps < 1 || !(dt > 0.0))
    throw invalid_parameter("BrownianStore: bad shape");
  BrownianStore s;
  s.dp = dp;
  s.steps = steps;
  s.dt = dt;
  s.z.resize(std::size_t(sites) * steps * dp);
  double sd = std::sqrt(dt);
  for (int site = 0; site < sites; ++site) {
    Rng rng = seed.child(site).rng();
    double* base = &s.z[std::size_t(site) * steps * dp];
    for (int i = 0; i < steps * dp; ++i) base[i] = sd * rng.normal();
  }
  return s;
}

int PathEnsemble::index_of(int site) const {
  for (std::size_t i = 0; i < sites.size(); ++i)
    if (sites[i] == site) return static_cast<int>(i);
  return -1;
}

std::vector<double> PathEnsemble::component(int idx, int comp) const {
  std::vector<double> out(steps + 1);
  for (int s = 0; s <= steps; ++s) out[s] = at(idx, s)[comp];
  return out;
}

namespace {

// one synchronous run over the member sites (ids into g); neighbours restricted to
// the member set, noise read from the store at original ids
PathEnsemble run_members(const DiffusionSpec& spec, const InteractionGraph& g,
                         const std::vector<int>& members, const std::vector<double>& initial,
                         double dt, const BrownianStore& store) {
  const int dp = spec.dp;
  const int steps = spec.steps_for(dt);
  if (store.dp != dp || store.steps < steps || std::fabs(store.dt - dt) > 1e-12)
    throw invalid_parameter("diffusion: store shape does not match the grid");
  if (static_cast<int>(initial.size()) != g.order() * dp)
    throw invalid_parameter("diffusion: initial state size mismatch");
  if (static_cast<int>(spec.sigma.size()) != dp * dp)
    throw invalid_parameter("diffusion: sigma must be dp x dp");

  const int nm = static_cast<int>(members.size());
  std::vector<int> slot(g.order(), -1);
  for (int i = 0; i < nm; ++i) slot[members[i]] = i;

  PathEnsemble e;
  e.dp = dp;
  e.steps = steps;
  e.dt = dt;
  e.sites = members;
  e.paths.assign(nm, std::vector<double>(std::size_t(steps + 1) * dp));
  std::vector<double> cur(std::size_t(nm) * dp), next(std::size_t(nm) * dp);
  for (int i = 0; i < nm; ++i)
    for (int c = 0; c < dp; ++c) {
      cur[std::size_t(i) * dp + c] = initial[std::size_t(members[i]) * dp + c];
      e.paths[i][c] = cur[std::size_t(i) * dp + c];
    }

  std::vector<double> drift(dp), pair(dp), acc(dp);
  for (int s = 0; s < steps; ++s) {
    for (int i = 0; i < nm; ++i) {
      const double* m = &cur[std::size_t(i) * dp];
      if (spec.f1)
        spec.f1(m, drift.data());
      else
        std::fill(drift.begin(), drift.end(), 0.0);
      if (spec.f2) {
        std::fill(acc.begin(), acc.end(), 0.0);
        int cnt = 0;
        for (int y : g.adj[members[i]]) {
          if (slot[y] < 0) continue;
          spec.f2(m, &cur[std::size_t(slot[y]) * dp], pair.data());
          for (int c = 0; c < dp; ++c) acc[c] += pair[c];
          ++cnt;
        }
        if (cnt > 0)
          for (int c = 0; c < dp; ++c) drift[c] += acc[c] / cnt;
      }
      const double* dz = store.at(members[i], s);
      double* out = &next[std::size_t(i) * dp];
      for (int c = 0; c < dp; ++c) {
        double noise = 0.0;
        for (int j = 0; j < dp; ++j) noise += spec.sigma[c * dp + j] * dz[j];
        out[c] = m[c] + drift[c] * dt + noise;
        if (!std::isfinite(out[c]))
          throw model_error("diffusion diverged at step " + std::to_string(s + 1));
      }
    }
    cur.swap(next);
    for (int i = 0; i < nm; ++i)
      for (int c = 0; c < dp; ++c)
        e.paths[i][std::size_t(s + 1) * dp + c] = cur[std::size_t(i) * dp + c];
  }
  return e;
}

std::vector<int> hop_ball(const InteractionGraph& g, int x, int m) {
  if (x < 0 || x >= g.order()) throw invalid_parameter("diffusion: bad center site");
  if (m < 0) throw invalid_parameter("diffusion: hop radius must be >= 0");
  std::vector<int> dist(g.order(), -1), order;
  std::deque<int> q;
  dist[x] = 0;
  q.push_back(x);
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    order.push_back(v);
    if (dist[v] == m) continue;
    for (int u : g.adj[v])
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        q.push_back(u);
      }
  }
  return order;
}

}  // namespace

PathEnsemble simulate(const DiffusionSpec& spec, const InteractionGraph& g,
                      const std::vector<double>& initial, double dt, const BrownianStore& store) {
  std::vector<int> all(g.order());
  for (int i = 0; i < g.order(); ++i) all[i] = i;
  return run_members(spec, g, all, initial, dt, store);
}

PathEnsemble truncated_simulate(const DiffusionSpec& spec, const InteractionGraph& g, int x, int m,
                                const std::vector<double>& initial, double dt,
                                const BrownianStore& store) {
  return run_members(spec, g, hop_ball(g, x, m), initial, dt, store);
}

ErrorEstimate l2_stabilization_error(const DiffusionSpec& spec, const InteractionGraph& g, int x,
                                     int m, int reps, SeedStream seed) {
  if (reps < 1) throw invalid_parameter("l2_stabilization_error: reps must be >= 1");
  const int dp = spec.dp;
  const double dt = spec.t0 / 1000.0;
  const int steps = spec.steps_for(dt);
  std::vector<double> initial(std::size_t(g.order()) * dp, 0.0);

  double sum = 0.0, sumsq = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    BrownianStore store = BrownianStore::generate(g.order(), dp, steps, dt, seed.child(rep));
    PathEnsemble full = simulate(spec, g, initial, dt, store);
    PathEnsemble part = truncated_simulate(spec, g, x, m, initial, dt, store);
    int fi = full.index_of(x), pi = part.index_of(x);
    double sup = 0.0;
    for (int s = 0; s <= steps; ++s) {
      const double* a = full.at(fi, s);
      const double* b = part.at(pi, s);
      double d2 = 0.0;
      for (int c = 0; c < dp; ++c) d2 += (a[c] - b[c]) * (a[c] - b[c]);
      sup = std::max(sup, d2);
    }
    sum += sup;
    sumsq += sup * sup;
  }
  double mean = sum / reps;
  double var = reps > 1 ? std::max(0.0, (sumsq - sum * sum / reps) / (reps - 1)) : 0.0;
  return {mean, std::sqrt(var / reps)};
}

double score_path(const std::string& tag, const std::vector<double>& path, double dt) {
  if (path.empty()) throw invalid_parameter("score_path: empty path");
  if (tag == "sup_norm") {
    double s = 0.0;
    for (double v : path) s = std::max(s, std::fabs(v));
    return s;
  }
  if (tag == "terminal") return path.back();
  if (tag == "time_average") {
    if (path.size() == 1) return path[0];
    (void)dt;  // uniform grid: the spacing cancels in the trapezoidal mean
    double s = 0.5 * (path.front() + path.back());
    for (std::size_t i = 1; i + 1 < path.size(); ++i) s += path[i];
    return s / double(path.size() - 1);
  }
  throw invalid_parameter("unknown path score: " + tag);
}

void dump_paths(const PathEnsemble& e, const std::string& matrix_path,
                const std::string& header_path) {
  FILE* f = std::fopen(matrix_path.c_str(), "wb");
  if (!f) throw io_error("cannot open " + matrix_path);
  // row = step, columns grouped by site then component
  for (int s = 0; s <= e.steps; ++s)
    for (std::size_t i = 0; i < e.sites.size(); ++i)
      if (std::fwrite(e.at(static_cast<int>(i), s), sizeof(double), e.dp, f) !=
          std::size_t(e.dp)) {
        std::fclose(f);
        throw io_error("short write to " + matrix_path);
      }
  std::fclose(f);

  FILE* h = std::fopen(header_path.c_str(), "w");
  if (!h) throw io_error("cannot open " + header_path);
  std::fprintf(h, "{\n  \"rows\": %d,\n  \"state_dim\": %d,\n  \"dt\": %.17g,\n  \"sites\": [",
               e.steps + 1, e.dp, e.dt);
  for (std::size_t i = 0; i < e.sites.size(); ++i)
    std::fprintf(h, "%s%d", i ? ", " : "", e.sites[i]);
  std::fprintf(h, "],\n  \"layout\": \"row-major, columns grouped by site then component\",\n");
  std::fprintf(h, "  \"scalar\": \"little-endian float64\"\n}\n");
  std::fclose(h);
}

}  // namespace mpp
