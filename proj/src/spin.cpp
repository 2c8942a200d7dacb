#include "mpp/spin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mpp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

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

void check_budget(int order, int k) {
  double states = std::pow(static_cast<double>(k), order);
  if (states > double(1 << 24))
    throw model_error("spin enumeration budget exceeded: k^order > 2^24");
}

}  // namespace

SpinModel make_spin_model(const std::string& tag) {
  auto parts = split_tag(tag);
  if (parts.empty()) throw invalid_parameter("empty spin model tag");
  const std::string& kind = parts[0];

  if (kind == "hardcore") {
    if (parts.size() != 2) throw invalid_parameter("hardcore:<lambda>");
    double lam = parse_num(parts[1], "hardcore lambda");
    if (!(lam > 0.0)) throw invalid_parameter("hardcore: lambda must be > 0");
    SpinModel m;
    m.name = "hardcore";
    m.states = {0.0, 1.0};
    m.beta = 1.0;
    m.gamma = std::log(lam);
    m.psi = [](double u, double v) { return u * v == 0.0 ? 0.0 : kNegInf; };
    m.phi = [](double v) { return v; };
    return m;
  }
  if (kind == "wr") {
    if (parts.size() != 2) throw invalid_parameter("wr:<lambda>");
    double lam = parse_num(parts[1], "wr lambda");
    if (!(lam > 0.0)) throw invalid_parameter("wr: lambda must be > 0");
    SpinModel m;
    m.name = "wr";
    m.states = {-1.0, 0.0, 1.0};
    m.beta = 1.0;
    m.gamma = std::log(lam);
    m.psi = [](double u, double v) { return u * v == -1.0 ? kNegInf : 0.0; };
    m.phi = [](double v) { return std::fabs(v); };
    return m;
  }
  if (kind == "ising") {
    if (parts.size() != 3) throw invalid_parameter("ising:<beta>:<gamma>");
    SpinModel m;
    m.name = "ising";
    m.states = {-1.0, 1.0};
    m.beta = parse_num(parts[1], "ising beta");
    m.gamma = parse_num(parts[2], "ising gamma");
    m.psi = [](double u, double v) { return u * v; };
    m.phi = [](double v) { return v; };
    return m;
  }
  if (kind == "coloring") {
    if (parts.size() != 2) throw invalid_parameter("coloring:<k>");
    int k = static_cast<int>(parse_num(parts[1], "coloring k"));
    if (k < 1 || k > 16) throw invalid_parameter("coloring: k must be in [1, 16]");
    SpinModel m;
    m.name = "coloring";
    for (int i = 1; i <= k; ++i) m.states.push_back(static_cast<double>(i));
    m.beta = 1.0;
    m.gamma = 0.0;
    m.psi = [](double u, double v) { return u == v ? kNegInf : 0.0; };
    m.phi = [](double) { return 0.0; };
    return m;
  }
  throw invalid_parameter("unknown spin model: " + kind);
}

double log_weight(const SpinModel& m, const InteractionGraph& g, const std::vector<int>& cfg) {
  if (static_cast<int>(cfg.size()) != g.order())
    throw invalid_parameter("log_weight: size mismatch");
  double lw = 0.0;
  for (int u = 0; u < g.order(); ++u) {
    lw += m.gamma * m.phi(m.states[cfg[u]]);
    for (int v : g.adj[u])
      if (u < v) lw += m.beta * m.psi(m.states[cfg[u]], m.states[cfg[v]]);
  }
  return lw;
}

std::size_t SpinDistribution::code_of(const std::vector<int>& cfg) const {
  std::size_t code = 0, mult = 1;
  for (int s : cfg) {
    code += static_cast<std::size_t>(s) * mult;
    mult *= static_cast<std::size_t>(k);
  }
  return code;
}

std::vector<std::vector<double>> SpinDistribution::marginals() const {
  std::vector<std::vector<double>> out(order, std::vector<double>(k, 0.0));
  std::vector<int> cfg(order, 0);
  for (std::size_t code = 0; code < prob.size(); ++code) {
    std::size_t c = code;
    for (int v = 0; v < order; ++v) {
      out[v][c % k] += prob[code];
      c /= k;
    }
  }
  return out;
}

SpinDistribution exact_distribution(const SpinModel& m, const InteractionGraph& g) {
  int order = g.order(), k = m.k();
  if (order == 0) throw invalid_parameter("exact_distribution: empty graph");
  check_budget(order, k);

  std::size_t total = 1;
  for (int v = 0; v < order; ++v) total *= static_cast<std::size_t>(k);

  std::vector<double> lw(total);
  std::vector<int> cfg(order, 0);
  double best = kNegInf;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (int v = 0; v < order; ++v) {
      cfg[v] = static_cast<int>(c % k);
      c /= k;
    }
    lw[code] = log_weight(m, g, cfg);
    best = std::max(best, lw[code]);
  }
  if (best == kNegInf) throw model_error("exact_distribution: no feasible configuration");

  SpinDistribution d;
  d.order = order;
  d.k = k;
  d.prob.resize(total);
  double zrel = 0.0;
  for (std::size_t code = 0; code < total; ++code) {
    d.prob[code] = std::exp(lw[code] - best);
    zrel += d.prob[code];
  }
  for (double& p : d.prob) p /= zrel;
  d.log_z = best + std::log(zrel);
  return d;
}

namespace {

// lexicographically minimal feasible state: greedy smallest state per site that is
// compatible with all lower-index neighbours
std::vector<int> minimal_feasible(const SpinModel& m, const InteractionGraph& g) {
  std::vector<int> cfg(g.order(), -1);
  for (int v = 0; v < g.order(); ++v) {
    int pick = -1;
    for (int s = 0; s < m.k() && pick < 0; ++s) {
      if (m.gamma * m.phi(m.states[s]) == kNegInf) continue;
      bool ok = true;
      for (int u : g.adj[v])
        if (u < v && m.psi(m.states[s], m.states[cfg[u]]) == kNegInf) {
          ok = false;
          break;
        }
      if (ok) pick = s;
    }
    if (pick < 0) throw model_error("glauber_sample: no feasible start state");
    cfg[v] = pick;
  }
  return cfg;
}

}  // namespace

std::vector<int> glauber_sample(const SpinModel& m, const InteractionGraph& g, long sweeps,
                                SeedStream seed) {
  const int order = g.order();
  const int k = m.k();
  if (order == 0) return {};
  if (sweeps < 0) throw invalid_parameter("glauber_sample: sweeps must be >= 0");

  std::vector<int> cfg = minimal_feasible(m, g);
  Rng rng = seed.rng();

  int maxdeg = 0;
  for (int v = 0; v < order; ++v) maxdeg = std::max(maxdeg, g.degree(v));

  // Fast path: per-site conditional CDF tables indexed by the neighbour state count
  // vector in mixed radix (maxdeg+1)^k. Conditionals depend on the counts only.
  if (k <= 4 && maxdeg <= 8) {
    const int radix = maxdeg + 1;
    std::vector<std::size_t> digit(k, 0);
    digit[0] = 1;
    for (int s = 1; s < k; ++s) digit[s] = digit[s - 1] * radix;
    std::size_t tab_sz = digit[k - 1] * radix;

    std::vector<double> psi_tab(k * k), phi_tab(k);
    for (int a = 0; a < k; ++a) {
      phi_tab[a] = m.gamma * m.phi(m.states[a]);
      for (int b = 0; b < k; ++b) psi_tab[a * k + b] = m.beta * m.psi(m.states[a], m.states[b]);
    }

    // CDF per count-vector code (shared across sites; codes whose counts exceed any
    // real degree are filled too, they are just never referenced)
    std::vector<double> cdf(tab_sz * k, 0.0);
    for (std::size_t code = 0; code < tab_sz; ++code) {
      double w[4], mx = kNegInf;
      for (int s = 0; s < k; ++s) {
        double lw = phi_tab[s];
        for (int t = 0; t < k; ++t) {
          int ct = static_cast<int>((code / digit[t]) % static_cast<std::size_t>(radix));
          if (ct > 0) lw += ct * psi_tab[s * k + t];
        }
        w[s] = lw;
        mx = std::max(mx, lw);
      }
      double acc = 0.0;
      for (int s = 0; s < k; ++s) {
        if (mx != kNegInf) acc += std::exp(w[s] - mx);
        cdf[code * k + s] = acc;
      }
    }

    // flat adjacency
    std::vector<int> flat, off(order + 1, 0);
    for (int v = 0; v < order; ++v) {
      off[v + 1] = off[v] + g.degree(v);
      for (int u : g.adj[v]) flat.push_back(u);
    }

    for (long sw = 0; sw < sweeps; ++sw) {
      for (int v = 0; v < order; ++v) {
        std::size_t code = 0;
        for (int e = off[v]; e < off[v + 1]; ++e) code += digit[cfg[flat[e]]];
        const double* c = &cdf[code * k];
        if (c[k - 1] <= 0.0) throw model_error("glauber_sample: blocked site");
        double u = rng.u01() * c[k - 1];
        int s = 0;
        while (s < k - 1 && u >= c[s]) ++s;
        cfg[v] = s;
      }
    }
    return cfg;
  }

  // general path
  std::vector<double> lw(k);
  for (long sw = 0; sw < sweeps; ++sw) {
    for (int v = 0; v < order; ++v) {
      double mx = kNegInf;
      for (int s = 0; s < k; ++s) {
        double w = m.gamma * m.phi(m.states[s]);
        for (int u : g.adj[v]) w += m.beta * m.psi(m.states[s], m.states[cfg[u]]);
        lw[s] = w;
        mx = std::max(mx, w);
      }
      if (mx == kNegInf) throw model_error("glauber_sample: blocked site");
      double acc = 0.0;
      for (int s = 0; s < k; ++s) {
        lw[s] = acc += std::exp(lw[s] - mx);
      }
      double u = rng.u01() * acc;
      int s = 0;
      while (s < k - 1 && u >= lw[s]) ++s;
      cfg[v] = s;
    }
  }
  return cfg;
}

double conditional_tv(const SpinModel& m, const InteractionGraph& g,
                      const std::vector<int>& targets, const std::vector<int>& bound,
                      const std::vector<int>& v, const std::vector<int>& z) {
  const int order = g.order();
  const int k = m.k();
  check_budget(order, k);
  if (v.size() != bound.size() || z.size() != bound.size())
    throw invalid_parameter("conditional_tv: boundary value size mismatch");
  for (int t : targets)
    for (int b : bound)
      if (t == b) throw invalid_parameter("conditional_tv: targets and boundary overlap");

  std::size_t total = 1;
  for (int i = 0; i < order; ++i) total *= static_cast<std::size_t>(k);
  std::size_t proj_sz = 1;
  for (std::size_t i = 0; i < targets.size(); ++i) proj_sz *= static_cast<std::size_t>(k);

  std::vector<double> wv(proj_sz, 0.0), wz(proj_sz, 0.0);
  std::vector<int> cfg(order, 0);
  // two passes over the relevant configs: first to find a common log reference,
  // then to accumulate, so exp() stays in range without storing k^order weights
  double best = kNegInf;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t c = code;
      for (int i = 0; i < order; ++i) {
        cfg[i] = static_cast<int>(c % k);
        c /= k;
      }
      bool match_v = true, match_z = true;
      for (std::size_t i = 0; i < bound.size(); ++i) {
        match_v = match_v && cfg[bound[i]] == v[i];
        match_z = match_z && cfg[bound[i]] == z[i];
      }
      if (!match_v && !match_z) continue;
      double lw = log_weight(m, g, cfg);
      if (pass == 0) {
        best = std::max(best, lw);
        continue;
      }
      if (lw == kNegInf) continue;
      std::size_t proj = 0, mult = 1;
      for (int t : targets) {
        proj += static_cast<std::size_t>(cfg[t]) * mult;
        mult *= static_cast<std::size_t>(k);
      }
      double w = std::exp(lw - best);
      if (match_v) wv[proj] += w;
      if (match_z) wz[proj] += w;
    }
    if (pass == 0 && best == kNegInf)
      throw model_error("conditional_tv: conditioning event has zero probability");
  }

  double sv = 0.0, sz = 0.0;
  for (std::size_t i = 0; i < proj_sz; ++i) {
    sv += wv[i];
    sz += wz[i];
  }
  if (sv <= 0.0 || sz <= 0.0)
    throw model_error("conditional_tv: conditioning event has zero probability");
  double tv = 0.0;
  for (std::size_t i = 0; i < proj_sz; ++i) tv += std::fabs(wv[i] / sv - wz[i] / sz);
  return tv / 2.0;
}

namespace {

// all count vectors (c_0..c_{k-1}) with sum = deg
void count_vectors(int k, int deg, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k - 1) {
    int used = 0;
    for (int c : cur) used += c;
    cur.push_back(deg - used);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  int used = 0;
  for (int c : cur) used += c;
  for (int c = 0; c <= deg - used; ++c) {
    cur.push_back(c);
    count_vectors(k, deg, cur, out);
    cur.pop_back();
  }
}

// conditional law of one site given a neighbour count vector; false when infeasible
bool conditional_from_counts(const SpinModel& m, const std::vector<int>& counts,
                             std::vector<double>& out) {
  int k = m.k();
  out.assign(k, 0.0);
  double mx = kNegInf;
  std::vector<double> lw(k);
  for (int s = 0; s < k; ++s) {
    double w = m.gamma * m.phi(m.states[s]);
    for (int t = 0; t < k; ++t)
      if (counts[t] > 0) w += m.beta * counts[t] * m.psi(m.states[s], m.states[t]);
    lw[s] = w;
    mx = std::max(mx, w);
  }
  if (mx == kNegInf) return false;
  double z = 0.0;
  for (int s = 0; s < k; ++s) z += out[s] = std::exp(lw[s] - mx);
  for (int s = 0; s < k; ++s) out[s] /= z;
  return true;
}

}  // namespace

double max_influence_enumerated(const SpinModel& m, const InteractionGraph& g) {
  int k = m.k();
  double q = 0.0;
  for (int x = 0; x < g.order(); ++x) {
    int deg = g.degree(x);
    if (deg == 0) continue;
    if (std::pow(static_cast<double>(deg + 1), k) > double(1 << 22))
      throw model_error("max_influence: count vector budget exceeded");
    std::vector<std::vector<int>> cvs;
    std::vector<int> cur;
    count_vectors(k, deg, cur, cvs);
    std::vector<std::vector<double>> laws;
    std::vector<double> law;
    for (const auto& cv : cvs)
      if (conditional_from_counts(m, cv, law)) laws.push_back(law);
    for (std::size_t a = 0; a < laws.size(); ++a)
      for (std::size_t b = a + 1; b < laws.size(); ++b) {
        double tv = 0.0;
        for (int s = 0; s < k; ++s) tv += std::fabs(laws[a][s] - laws[b][s]);
        q = std::max(q, tv / 2.0);
      }
  }
  return q;
}

double max_influence(const SpinModel& m, const InteractionGraph& g) {
  int maxdeg = 0;
  for (int v = 0; v < g.order(); ++v) maxdeg = std::max(maxdeg, g.degree(v));
  if (m.name == "hardcore" && maxdeg >= 1) {
    double lam = std::exp(m.gamma);
    return lam / (1.0 + lam);
  }
  if (m.name == "wr" && maxdeg >= 2) {
    double lam = std::exp(m.gamma);
    return 2.0 * lam / (1.0 + 2.0 * lam);
  }
  return max_influence_enumerated(m, g);
}

PercolationEstimate disagreement_percolation_prob(const InteractionGraph& g,
                                                  const std::vector<int>& inner,
                                                  const std::vector<int>& region, double q,
                                                  int reps, SeedStream seed) {
  if (!(q >= 0.0 && q <= 1.0)) throw invalid_parameter("disagreement: q must be in [0,1]");
  if (reps < 1) throw invalid_parameter("disagreement: reps must be >= 1");
  const int order = g.order();
  std::vector<char> in_region(order, 0), in_inner(order, 0), in_boundary(order, 0);
  for (int v : region) {
    if (v < 0 || v >= order) throw invalid_parameter("disagreement: bad region site");
    in_region[v] = 1;
  }
  for (int v : inner) {
    if (v < 0 || v >= order || !in_region[v])
      throw invalid_parameter("disagreement: inner must lie inside the region");
    in_inner[v] = 1;
  }
  bool any_boundary = false;
  for (int v : region)
    for (int u : g.adj[v])
      if (!in_region[u]) {
        in_boundary[u] = 1;
        any_boundary = true;
      }
  if (!any_boundary) return {0.0, 0.0};

  Rng rng = seed.rng();
  std::vector<char> open(order), seen(order);
  std::vector<int> stack;
  long hits = 0;
  for (int rep = 0; rep < reps; ++rep) {
    for (int v = 0; v < order; ++v)
      open[v] = in_inner[v] || !in_region[v] || (rng.u01() < q);
    std::fill(seen.begin(), seen.end(), 0);
    stack.clear();
    bool hit = false;
    for (int v : inner) {
      seen[v] = 1;
      stack.push_back(v);
    }
    while (!stack.empty() && !hit) {
      int v = stack.back();
      stack.pop_back();
      if (in_boundary[v]) {
        hit = true;
        break;
      }
      for (int u : g.adj[v]) {
        if (seen[u] || !open[u]) continue;
        seen[u] = 1;
        stack.push_back(u);
      }
    }
    if (hit) ++hits;
  }
  double p = static_cast<double>(hits) / reps;
  return {p, std::sqrt(std::max(p * (1.0 - p), 0.0) / reps)};
}

double critical_activity(double delta) {
  if (delta < 0.0 || !std::isfinite(delta))
    throw invalid_parameter("critical_activity: delta must be >= 0");
  if (delta <= 1.0) return std::numeric_limits<double>::infinity();
  return std::pow(delta, delta) / std::pow(delta - 1.0, delta + 1.0);
}

double total_spin(const std::vector<int>& cfg, const SpinModel& m, const PointConfig& pts,
                  const std::function<double(const Pt&)>& f) {
  if (static_cast<int>(cfg.size()) != pts.size())
    throw invalid_parameter("total_spin: size mismatch");
  double scale = std::pow(pts.n, 1.0 / pts.dim);
  double s = 0.0;
  for (int i = 0; i < pts.size(); ++i) {
    Pt rescaled{pts.pts[i][0] / scale, pts.pts[i][1] / scale, pts.pts[i][2] / scale};
    s += m.states[cfg[i]] * f(rescaled);
  }
  return s;
}

}  // namespace mpp
