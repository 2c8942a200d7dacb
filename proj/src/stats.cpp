#include "mpp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "mpp/errors.hpp"
#include "mpp/parallel.hpp"

namespace mpp {

namespace {

std::vector<std::string> split_tag(const std::string& tag, char sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = tag.find(sep, pos);
    if (next == std::string::npos) {
      parts.push_back(tag.substr(pos));
      return parts;
    }
    parts.push_back(tag.substr(pos, next - pos));
    pos = next + 1;
  }
}

double parse_num(const std::string& s, const char* what) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty() || !std::isfinite(v))
    throw invalid_parameter(std::string(what) + ": bad number '" + s + "'");
  return v;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const std::string& item : split_tag(s, ',')) out.push_back(parse_num(item, what));
  if (out.empty()) throw invalid_parameter(std::string(what) + ": empty list");
  return out;
}

bool member(const std::vector<double>& set, double v) {
  for (double s : set)
    if (s == v) return true;
  return false;
}

const StateHistory& need_history(const ScoreInput& in, const char* tag) {
  if (!in.history) throw invalid_parameter(std::string(tag) + ": score requires a state history");
  return *in.history;
}

double sample_at(const StateHistory& h, double t, double t0, const char* tag) {
  if (t < 0.0 || t > t0)
    throw invalid_parameter(std::string(tag) + ": sample time outside [0, t0]");
  return h.at(t);
}

// occupation time of the value set on [0, t0] under the piecewise-constant history
double occupation(const StateHistory& h, const std::vector<double>& set, double t0) {
  double occ = 0.0;
  for (std::size_t i = 0; i < h.events.size(); ++i) {
    double lo = h.events[i].t;
    if (lo >= t0) break;
    double hi = (i + 1 < h.events.size()) ? std::min(h.events[i + 1].t, t0) : t0;
    if (hi > lo && member(set, h.events[i].v)) occ += hi - lo;
  }
  return occ;
}

double mean_of(const double* v, int count) {
  double s = 0.0;
  for (int i = 0; i < count; ++i) s += v[i];
  return s / count;
}

double var_of(const double* v, int count, double mean) {
  double s = 0.0;
  for (int i = 0; i < count; ++i) s += (v[i] - mean) * (v[i] - mean);
  return count > 1 ? s / (count - 1) : 0.0;
}

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

ScoreFn make_score(const std::string& tag) {
  std::vector<std::string> parts = split_tag(tag, ':');
  const std::string& name = parts[0];
  ScoreFn out;
  out.tag = tag;

  if (name == "s1") {
    if (parts.size() != 3) throw invalid_parameter("s1: expected s1:<values>:<times>");
    auto set = parse_list(parts[1], "s1 values");
    auto times = parse_list(parts[2], "s1 times");
    for (double t : times)
      if (t < 0.0) throw invalid_parameter("s1: negative sample time");
    out.eval = [set, times](const ScoreInput& in) {
      const StateHistory& h = need_history(in, "s1");
      for (double t : times)
        if (!member(set, sample_at(h, t, in.t0, "s1"))) return 0.0;
      return 1.0;
    };
  } else if (name == "s2") {
    if (parts.size() != 2) throw invalid_parameter("s2: expected s2:<values>");
    auto set = parse_list(parts[1], "s2 values");
    out.eval = [set](const ScoreInput& in) {
      return occupation(need_history(in, "s2"), set, in.t0);
    };
  } else if (name == "s3") {
    if (parts.size() != 3) throw invalid_parameter("s3: expected s3:<values>:<t_min>");
    auto set = parse_list(parts[1], "s3 values");
    double t_min = parse_num(parts[2], "s3 t_min");
    if (t_min < 0.0) throw invalid_parameter("s3: t_min must be nonnegative");
    out.eval = [set, t_min](const ScoreInput& in) {
      if (t_min > in.t0) throw invalid_parameter("s3: t_min exceeds t0");
      return occupation(need_history(in, "s3"), set, in.t0) >= t_min ? 1.0 : 0.0;
    };
  } else if (name == "s4") {
    if (parts.size() != 1) throw invalid_parameter("s4: takes no parameters");
    out.eval = [](const ScoreInput& in) { return need_history(in, "s4").at(in.t0); };
  } else if (name == "s5") {
    if (parts.size() != 3) throw invalid_parameter("s5: expected s5:<times>:<combiner>");
    auto times = parse_list(parts[1], "s5 times");
    for (double t : times)
      if (t < 0.0) throw invalid_parameter("s5: negative sample time");
    const std::string& comb = parts[2];
    int mode = comb == "sum" ? 0 : comb == "max" ? 1 : comb == "min" ? 2 : comb == "mean" ? 3 : -1;
    if (mode < 0) throw invalid_parameter("s5: unknown combiner '" + comb + "'");
    out.eval = [times, mode](const ScoreInput& in) {
      const StateHistory& h = need_history(in, "s5");
      double acc = mode == 1 ? -std::numeric_limits<double>::infinity()
                 : mode == 2 ? std::numeric_limits<double>::infinity()
                             : 0.0;
      for (double t : times) {
        double v = sample_at(h, t, in.t0, "s5");
        if (mode == 1)
          acc = std::max(acc, v);
        else if (mode == 2)
          acc = std::min(acc, v);
        else
          acc += v;
      }
      return mode == 3 ? acc / static_cast<double>(times.size()) : acc;
    };
  } else if (name == "odometer") {
    if (parts.size() != 1) throw invalid_parameter("odometer: takes no parameters");
    out.eval = [](const ScoreInput& in) { return in.odometer; };
  } else {
    throw invalid_parameter("make_score: unknown tag '" + name + "'");
  }
  return out;
}

std::function<double(const Pt&)> make_test_function(const std::string& name) {
  if (name == "one") return [](const Pt&) { return 1.0; };
  if (name == "left_half") return [](const Pt& x) { return x[0] < 0.0 ? 1.0 : 0.0; };
  throw invalid_parameter("make_test_function: unknown name '" + name + "'");
}

double linear_statistic(const PointConfig& pts, const std::vector<double>& scores,
                        const std::function<double(const Pt&)>& f) {
  if (scores.size() != pts.pts.size())
    throw invalid_parameter("linear_statistic: one score per site required");
  if (!f) throw invalid_parameter("linear_statistic: missing test function");
  double side = pts.window().side;
  double total = 0.0;
  for (std::size_t i = 0; i < pts.pts.size(); ++i) {
    Pt x = pts.pts[i];
    for (double& c : x) c /= side;
    total += scores[i] * f(x);
  }
  return total;
}

ReplicationResult replicate(const std::function<double(SeedStream)>& runner, int R,
                            SeedStream base, int threads) {
  if (R < 1) throw invalid_parameter("replicate: R must be >= 1");
  if (!runner) throw invalid_parameter("replicate: missing runner");
  ReplicationResult out;
  out.values.resize(R);
  out.seeds.resize(R);
  parallel_for(R, threads, [&](int r) {
    SeedStream s = base.child(static_cast<std::uint64_t>(r));
    out.seeds[r] = s.key;
    double v;
    try {
      v = runner(s);
    } catch (const model_error& e) {
      throw model_error("replication " + std::to_string(r) + ": " + e.what());
    }
    if (!std::isfinite(v))
      throw model_error("replication " + std::to_string(r) + ": non-finite statistic");
    out.values[r] = v;
  });
  return out;
}

AsymptoticsTable asymptotics_table(const std::vector<ReplicationResult>& results, double rho,
                                   double tol) {
  if (results.empty()) throw invalid_parameter("asymptotics_table: no results");
  if (!(tol > 0.0)) throw invalid_parameter("asymptotics_table: tol must be positive");
  AsymptoticsTable table;
  table.rho = rho;
  table.tol = tol;
  double prev_n = 0.0;
  for (const ReplicationResult& res : results) {
    if (!(res.n > prev_n))
      throw invalid_parameter("asymptotics_table: window sizes must be strictly increasing");
    prev_n = res.n;
    int R = static_cast<int>(res.values.size());
    if (R < 2) throw invalid_parameter("asymptotics_table: need at least 2 replications");
    double mean = mean_of(res.values.data(), R);
    double m2 = 0.0, m4 = 0.0;
    for (double v : res.values) {
      double d = v - mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    m2 /= R;
    m4 /= R;
    double var = m2 * R / (R - 1);
    // large-sample variance of the sample variance, from the fourth central moment
    double var_var = std::max(0.0, m4 - m2 * m2 * (R - 3.0) / (R - 1.0)) / R;

    AsymptoticsRow row;
    row.n = res.n;
    row.mean_per_n = mean / res.n;
    row.mean_se = std::sqrt(var / R) / res.n;
    row.var_per_n = var / res.n;
    row.var_se = std::sqrt(var_var) / res.n;
    if (table.rows.empty()) {
      row.var_ratio = std::numeric_limits<double>::quiet_NaN();
    } else {
      double prev = table.rows.back().var_per_n;
      row.var_ratio = prev != 0.0 ? row.var_per_n / prev
                      : row.var_per_n == 0.0 ? 1.0
                                             : std::numeric_limits<double>::infinity();
    }
    table.rows.push_back(row);
  }
  if (table.rows.size() >= 2) {
    bool ok = true;
    for (std::size_t i = 1; i < table.rows.size(); ++i)
      ok = ok && std::abs(table.rows[i].var_ratio - 1.0) <= tol;
    table.converged = ok;
  }
  return table;
}

PartitionSet set_partitions(int p) {
  if (p < 1) throw invalid_parameter("set_partitions: p must be >= 1");
  if (p > 10) throw model_error("set_partitions: p > 10 exceeds the enumeration budget");
  PartitionSet out;
  out.p = p;
  // restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[0..i-1])
  std::vector<int> a(p, 0);
  std::function<void(int, int)> grow = [&](int i, int next) {
    if (i == p) {
      std::vector<std::vector<int>> blocks(next);
      for (int j = 0; j < p; ++j) blocks[a[j]].push_back(j);
      out.partitions.push_back(std::move(blocks));
      return;
    }
    for (int v = 0; v <= next; ++v) {
      a[i] = v;
      grow(i + 1, std::max(next, v + 1));
    }
  };
  grow(0, 0);
  return out;
}

double ursell_from_moments(int p, const std::map<std::uint32_t, double>& moments) {
  PartitionSet parts = set_partitions(p);
  double total = 0.0;
  for (const auto& partition : parts.partitions) {
    double prod = 1.0;
    for (const auto& block : partition) {
      std::uint32_t mask = 0;
      for (int e : block) mask |= 1u << e;
      auto it = moments.find(mask);
      if (it == moments.end()) {
        std::string elems;
        for (int e : block) elems += (elems.empty() ? "" : ",") + std::to_string(e + 1);
        throw invalid_parameter("ursell_from_moments: missing moment for block {" + elems + "}");
      }
      prod *= it->second;
    }
    int b = static_cast<int>(partition.size());
    double factor = 1.0;
    for (int i = 2; i < b; ++i) factor *= i;  // (b-1)!
    total += (b % 2 == 1 ? 1.0 : -1.0) * factor * prod;
  }
  return total;
}

std::vector<double> moments_to_cumulants(const std::vector<double>& moments) {
  int p = static_cast<int>(moments.size());
  if (p < 1 || p > 10) throw invalid_parameter("moments_to_cumulants: order must be in 1..10");
  std::vector<double> mu(p + 1, 1.0), kappa(p + 1, 0.0);
  for (int i = 1; i <= p; ++i) mu[i] = moments[i - 1];
  for (int r = 1; r <= p; ++r) {
    double s = mu[r];
    for (int k = 1; k < r; ++k) s -= binom(r - 1, k - 1) * kappa[k] * mu[r - k];
    kappa[r] = s;
  }
  return std::vector<double>(kappa.begin() + 1, kappa.end());
}

std::vector<double> cumulants_to_moments(const std::vector<double>& cumulants) {
  int p = static_cast<int>(cumulants.size());
  if (p < 1 || p > 10) throw invalid_parameter("cumulants_to_moments: order must be in 1..10");
  std::vector<double> mu(p + 1, 1.0);
  for (int r = 1; r <= p; ++r) {
    double s = 0.0;
    for (int k = 1; k <= r; ++k) s += binom(r - 1, k - 1) * cumulants[k - 1] * mu[r - k];
    mu[r] = s;
  }
  return std::vector<double>(mu.begin() + 1, mu.end());
}

std::array<double, 4> k_statistics(const std::vector<double>& sample) {
  double n = static_cast<double>(sample.size());
  if (sample.size() < 2) throw invalid_parameter("k_statistics: need at least 2 values");
  double mean = mean_of(sample.data(), static_cast<int>(sample.size()));
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : sample) {
    double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  std::array<double, 4> k{mean, n / (n - 1) * m2, 0.0, 0.0};
  if (sample.size() >= 3) k[2] = n * n / ((n - 1) * (n - 2)) * m3;
  if (sample.size() >= 4)
    k[3] = n * n * ((n + 1) * m4 - 3 * (n - 1) * m2 * m2) / ((n - 1) * (n - 2) * (n - 3));
  return k;
}

CumulantReport normality_report(const ReplicationResult& result) {
  const std::vector<double>& x = result.values;
  if (x.size() < 8) throw invalid_parameter("normality_report: need at least 8 replications");
  std::array<double, 4> k = k_statistics(x);
  CumulantReport rep;
  rep.k1 = k[0];
  rep.k2 = k[1];
  rep.k3 = k[2];
  rep.k4 = k[3];
  if (rep.k2 <= 0.0) {
    rep.degenerate = true;
    return rep;
  }
  rep.skew = rep.k3 / std::pow(rep.k2, 1.5);
  rep.exkurt = rep.k4 / (rep.k2 * rep.k2);

  double sd = std::sqrt(rep.k2);
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - rep.k1) / sd;
  std::sort(z.begin(), z.end());
  double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double phi = 0.5 * std::erfc(-z[i] / std::sqrt(2.0));
    d = std::max(d, std::abs((i + 1) / n - phi));
    d = std::max(d, std::abs(i / n - phi));
  }
  rep.ks = d;
  return rep;
}

std::vector<MixingPoint> mixing_curve(const std::string& process, double n, int dim,
                                      const PairRunner& runner,
                                      const std::function<double(double)>& f,
                                      const std::function<double(double)>& g,
                                      const std::vector<double>& seps, int reps, SeedStream seed,
                                      int threads) {
  std::vector<std::string> parts = split_tag(process, ':');
  if (parts[0] != "poisson")
    throw invalid_parameter("mixing_curve: only Poisson input is supported, got '" + parts[0] +
                            "'");
  if (parts.size() != 2) throw invalid_parameter("mixing_curve: expected poisson:<rho>");
  double rho = parse_num(parts[1], "mixing_curve rho");
  if (!(rho >= 0.0)) throw invalid_parameter("mixing_curve: rho must be nonnegative");
  if (!(n > 0.0)) throw invalid_parameter("mixing_curve: n must be positive");
  if (dim < 1 || dim > 3) throw invalid_parameter("mixing_curve: dim must be 1, 2 or 3");
  if (reps < 4) throw invalid_parameter("mixing_curve: need at least 4 replications");
  if (seps.empty()) throw invalid_parameter("mixing_curve: empty separation grid");
  if (!runner || !f || !g) throw invalid_parameter("mixing_curve: missing callback");
  double side = std::pow(n, 1.0 / dim);
  for (double s : seps)
    if (!(s >= 0.0) || s >= side)
      throw invalid_parameter("mixing_curve: separation must lie in [0, window side)");

  std::vector<MixingPoint> curve;
  for (std::size_t si = 0; si < seps.size(); ++si) {
    double s = seps[si];
    Pt a = make_pt(-s / 2.0, 0.0, 0.0);
    Pt b = make_pt(s / 2.0, 0.0, 0.0);
    std::vector<double> fa(reps), gb(reps);
    parallel_for(reps, threads, [&](int r) {
      SeedStream st = seed.child(si).child(r);
      PointConfig pts = sample_poisson(rho, n, dim, st.child(0));
      int ia = static_cast<int>(pts.pts.size());
      PointConfig with = palm_insert(pts, {a, b});
      auto scores = runner(with, ia, ia + 1, st.child(1));
      fa[r] = f(scores.first);
      gb[r] = g(scores.second);
      if (!std::isfinite(fa[r]) || !std::isfinite(gb[r]))
        throw model_error("mixing_curve: non-finite test value at replication " +
                          std::to_string(r));
    });

    std::vector<double> fg(reps);
    for (int r = 0; r < reps; ++r) fg[r] = fa[r] * gb[r];
    int h = reps / 2;
    // marginals on independent halves so the product estimate has no shared-sample bias
    double mj = mean_of(fg.data(), reps);
    double mf = mean_of(fa.data(), h);
    double mg = mean_of(gb.data() + h, reps - h);
    double vj = var_of(fg.data(), reps, mj) / reps;
    double vf = var_of(fa.data(), h, mf) / h;
    double vg = var_of(gb.data() + h, reps - h, mg) / (reps - h);
    MixingPoint pt;
    pt.s = s;
    pt.omega = std::abs(mj - mf * mg);
    pt.se = std::sqrt(vj + mg * mg * vf + mf * mf * vg);
    curve.push_back(pt);
  }
  return curve;
}

}  // namespace mpp
