#include "mpp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "mpp/diffusion.hpp"
#include "mpp/errors.hpp"
#include "mpp/fields.hpp"
#include "mpp/ips.hpp"
#include "mpp/spin.hpp"

namespace mpp {

namespace {

using ojson = nlohmann::ordered_json;

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

int parse_int(const std::string& s, const char* what) {
  double v = parse_num(s, what);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw invalid_parameter(std::string(what) + ": '" + s + "' is not a small integer");
  return static_cast<int>(v);
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// window label used in file names; integral volumes print without a decimal point
std::string fmt_n(double n) {
  if (n == std::floor(n) && std::abs(n) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(n));
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", n);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw io_error("write failed for '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw io_error("read failed for '" + path + "'");
  return buf.str();
}

// ---- spec parsing -----------------------------------------------------------

void check_keys(const ojson& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw invalid_parameter("spec: unknown key '" + path + "." + it.key() + "'");
  }
}

const ojson& need(const ojson& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw invalid_parameter("spec: missing key '" + path + "." + key + "'");
  return *it;
}

std::string str_at(const ojson& obj, const std::string& path, const char* key) {
  const ojson& v = need(obj, path, key);
  if (!v.is_string())
    throw invalid_parameter("spec: '" + path + "." + key + "' must be a string");
  return v.get<std::string>();
}

double num_at(const ojson& v, const std::string& field) {
  if (!v.is_number()) throw invalid_parameter("spec: '" + field + "' must be a number");
  return v.get<double>();
}

int int_at(const ojson& v, const std::string& field) {
  if (!v.is_number_integer()) throw invalid_parameter("spec: '" + field + "' must be an integer");
  return v.get<int>();
}

enum class ModelKind { ips, ips_discrete, spin, diffusion, field };

ModelKind model_kind(const std::string& tag, std::string* rest) {
  std::size_t colon = tag.find(':');
  std::string head = tag.substr(0, colon);
  *rest = colon == std::string::npos ? std::string() : tag.substr(colon + 1);
  if (head == "ips") return ModelKind::ips;
  if (head == "ips_discrete") return ModelKind::ips_discrete;
  if (head == "spin") return ModelKind::spin;
  if (head == "diffusion") return ModelKind::diffusion;
  if (head == "field") return ModelKind::field;
  throw invalid_parameter("model.tag: unknown model '" + head + "'");
}

bool is_path_score(const std::string& tag) {
  return tag == "sup_norm" || tag == "terminal" || tag == "time_average";
}

double threshold_of(const std::string& tag) {
  std::vector<std::string> parts = split_tag(tag, ':');
  if (parts[0] != "threshold" || parts.size() != 2)
    throw invalid_parameter("expected threshold:<tau>");
  return parse_num(parts[1], "threshold tau");
}

// per-entry initial values: a number, bernoulli:<p> or rademacher
std::vector<double> make_initial(const std::string& spec, int count, SeedStream seed) {
  std::vector<double> init(count, 0.0);
  if (spec.empty()) return init;
  Rng rng = seed.rng();
  if (spec == "rademacher") {
    for (double& v : init) v = rng.u01() < 0.5 ? -1.0 : 1.0;
    return init;
  }
  std::vector<std::string> parts = split_tag(spec, ':');
  if (parts[0] == "bernoulli") {
    if (parts.size() != 2) throw invalid_parameter("initial: expected bernoulli:<p>");
    double p = parse_num(parts[1], "initial p");
    if (p < 0.0 || p > 1.0) throw invalid_parameter("initial: p must lie in [0,1]");
    for (double& v : init) v = rng.u01() < p ? 1.0 : 0.0;
    return init;
  }
  double c = parse_num(spec, "initial value");
  for (double& v : init) v = c;
  return init;
}

template <class Fn>
void wrap_field(const char* field, Fn&& fn) {
  try {
    fn();
  } catch (const invalid_parameter& e) {
    throw invalid_parameter(std::string(field) + ": " + e.what());
  }
}

void validate_spec(const ExperimentSpec& s) {
  if (s.dim < 1 || s.dim > 3) throw invalid_parameter("input.dim: must be 1, 2 or 3");
  if (s.n_list.empty()) throw invalid_parameter("input.n: must be a nonempty array");
  double prev = 0.0;
  for (double n : s.n_list) {
    if (!(n > prev)) throw invalid_parameter("input.n: must be positive, strictly increasing");
    prev = n;
  }
  if (s.reps < 1) throw invalid_parameter("harness.reps: must be >= 1");
  if (s.threads < 1) throw invalid_parameter("harness.threads: must be >= 1");
  if (!(s.var_ratio_tol > 0.0)) throw invalid_parameter("harness.var_ratio_tol: must be > 0");
  if (s.out_dir.empty()) throw invalid_parameter("output.dir: must be nonempty");

  wrap_field("input.process", [&] { sample_process(s.process, 1e-9, s.dim, SeedStream::root(0)); });

  std::vector<std::string> b = split_tag(s.builder, ':');
  wrap_field("graph.builder", [&] {
    if (b[0] == "none" || b[0] == "delaunay" || b[0] == "soi") {
      if (b.size() != 1) throw invalid_parameter(b[0] + " takes no parameters");
    } else if (b[0] == "gilbert") {
      if (b.size() != 2 || !(parse_num(b[1], "gilbert r") > 0.0))
        throw invalid_parameter("expected gilbert:<r> with r > 0");
    } else if (b[0] == "knn") {
      if (b.size() != 2 || parse_int(b[1], "knn k") < 1)
        throw invalid_parameter("expected knn:<k> with k >= 1");
    } else {
      throw invalid_parameter("unknown builder '" + b[0] + "'");
    }
  });
  if (b[0] == "delaunay" && s.dim != 2)
    throw invalid_parameter("graph.builder: delaunay needs dim 2");

  std::string rest;
  ModelKind kind = model_kind(s.model, &rest);
  auto forbid = [&](bool used, const char* field, const char* owner) {
    if (used)
      throw invalid_parameter(std::string("model.") + field + ": only valid for " + owner +
                              " models");
  };
  switch (kind) {
    case ModelKind::ips:
    case ModelKind::ips_discrete: {
      UpdateRule rule;
      wrap_field("model.tag", [&] { rule = make_rule(rest); });
      if (kind == ModelKind::ips) {
        if (!(s.t0 > 0.0)) throw invalid_parameter("model.t0: required for ips, must be > 0");
        forbid(s.rounds != 0, "rounds", "ips_discrete");
      } else {
        if (s.rounds < 1)
          throw invalid_parameter("model.rounds: required for ips_discrete, must be >= 1");
        forbid(s.t0 != 0.0, "t0", "ips and diffusion");
        if (!rule.discrete_ok)
          throw invalid_parameter("model.tag: rule '" + rest +
                                  "' is not available in discrete rounds");
      }
      forbid(s.sweeps != 0, "sweeps", "spin");
      forbid(s.dt != 0.0, "dt", "diffusion");
      if (rule.uses_shapes && s.dim != 2)
        throw invalid_parameter("input.dim: rule '" + rest + "' needs dim 2");
      wrap_field("score.tag", [&] {
        if (is_path_score(s.score) || split_tag(s.score, ':')[0] == "threshold")
          throw invalid_parameter("particle systems use s1..s5 or odometer");
        make_score(s.score);
      });
      wrap_field("model.initial",
                 [&] { make_initial(s.initial, 1, SeedStream::root(0)); });
      break;
    }
    case ModelKind::spin: {
      wrap_field("model.tag", [&] { make_spin_model(rest); });
      if (s.sweeps < 1)
        throw invalid_parameter("model.sweeps: required for spin, must be >= 1");
      forbid(s.t0 != 0.0, "t0", "ips and diffusion");
      forbid(s.rounds != 0, "rounds", "ips_discrete");
      forbid(s.dt != 0.0, "dt", "diffusion");
      if (!s.initial.empty())
        throw invalid_parameter("model.initial: spin chains start from the minimal state");
      if (s.score != "s4")
        throw invalid_parameter("score.tag: spin models report the terminal state, use s4");
      break;
    }
    case ModelKind::diffusion: {
      DiffusionSpec d;
      wrap_field("model.tag", [&] { d = make_diffusion(rest); });
      if (!(s.t0 > 0.0))
        throw invalid_parameter("model.t0: required for diffusion, must be > 0");
      if (!(s.dt > 0.0))
        throw invalid_parameter("model.dt: required for diffusion, must be > 0");
      if (std::abs(s.t0 - d.t0) > 1e-12 * std::max(1.0, d.t0))
        throw invalid_parameter("model.t0: does not match the horizon in '" + rest + "'");
      wrap_field("model.dt", [&] { d.steps_for(s.dt); });
      forbid(s.rounds != 0, "rounds", "ips_discrete");
      forbid(s.sweeps != 0, "sweeps", "spin");
      if (!is_path_score(s.score))
        throw invalid_parameter(
            "score.tag: diffusion uses sup_norm, terminal or time_average");
      wrap_field("model.initial",
                 [&] { make_initial(s.initial, 1, SeedStream::root(0)); });
      break;
    }
    case ModelKind::field: {
      wrap_field("model.tag", [&] { make_field(rest); });
      forbid(s.t0 != 0.0, "t0", "ips and diffusion");
      forbid(s.rounds != 0, "rounds", "ips_discrete");
      forbid(s.sweeps != 0, "sweeps", "spin");
      forbid(s.dt != 0.0, "dt", "diffusion");
      if (!s.initial.empty())
        throw invalid_parameter("model.initial: field statistics have no dynamics");
      if (s.builder != "none")
        throw invalid_parameter("graph.builder: field statistics take builder 'none'");
      wrap_field("score.tag", [&] { threshold_of(s.score); });
      break;
    }
  }
  wrap_field("score.f", [&] { make_test_function(s.f); });
}

// ---- runner -----------------------------------------------------------------

// hands back the per-replication statistic for one window size; the stream is
// split so sampling, dynamics and initial data never share a generator
std::function<double(SeedStream)> make_runner(const ExperimentSpec& s, double n) {
  std::string rest;
  ModelKind kind = model_kind(s.model, &rest);
  auto f = make_test_function(s.f);

  if (kind == ModelKind::field) {
    FieldSpec fs = make_field(rest);
    double tau = threshold_of(s.score);
    return [=, process = s.process, dim = s.dim](SeedStream st) {
      PointConfig pts = sample_process(process, n, dim, st.child(0));
      FieldSample fld = FieldSample::draw(fs, n, dim, st.child(1));
      auto zeta = [tau](const Pt&, double m) { return m < tau ? 1.0 : 0.0; };
      return empirical_statistic(pts, fld, zeta, f);
    };
  }

  if (kind == ModelKind::spin) {
    SpinModel m = make_spin_model(rest);
    return [=, process = s.process, dim = s.dim, builder = s.builder,
            sweeps = s.sweeps](SeedStream st) {
      PointConfig pts = sample_process(process, n, dim, st.child(0));
      InteractionGraph g = build_graph(builder, pts);
      std::vector<int> cfg = glauber_sample(m, g, sweeps, st.child(1));
      std::vector<double> scores(cfg.begin(), cfg.end());
      return linear_statistic(pts, scores, f);
    };
  }

  if (kind == ModelKind::diffusion) {
    DiffusionSpec d = make_diffusion(rest);
    return [=, process = s.process, dim = s.dim, builder = s.builder, dt = s.dt,
            initial = s.initial, score = s.score](SeedStream st) {
      PointConfig pts = sample_process(process, n, dim, st.child(0));
      InteractionGraph g = build_graph(builder, pts);
      int sites = pts.size();
      std::vector<double> init = make_initial(initial, sites * d.dp, st.child(2));
      int steps = d.steps_for(dt);
      BrownianStore store = BrownianStore::generate(sites, d.dp, steps, dt, st.child(1));
      PathEnsemble e = simulate(d, g, init, dt, store);
      std::vector<double> scores(sites, 0.0);
      for (int i = 0; i < sites; ++i) scores[i] = score_path(score, e.component(i, 0), dt);
      return linear_statistic(pts, scores, f);
    };
  }

  UpdateRule rule = make_rule(rest);
  ScoreFn sf = make_score(s.score);
  bool discrete = kind == ModelKind::ips_discrete;
  return [=, process = s.process, dim = s.dim, builder = s.builder, t0 = s.t0,
          rounds = s.rounds, initial = s.initial](SeedStream st) {
    PointConfig pts = sample_process(process, n, dim, st.child(0));
    InteractionGraph g = build_graph(builder, pts);
    int sites = pts.size();
    std::vector<double> init = make_initial(initial, sites, st.child(2));
    RunResult run;
    double horizon;
    if (discrete) {
      run = run_discrete(pts, g, init, rounds, rule, st.child(1));
      horizon = rounds;
    } else {
      ClockSet clocks = ClockSet::generate(sites, 1.0, t0, "uniform", st.child(1));
      run = run_continuous(pts, g, init, clocks, rule);
      horizon = t0;
    }
    std::vector<double> scores(sites, 0.0);
    for (int i = 0; i < sites; ++i) {
      ScoreInput in{&run.histories[i], horizon, run.odometer[i]};
      scores[i] = sf.eval(in);
    }
    return linear_statistic(pts, scores, f);
  };
}

double nominal_rho(const std::string& process) {
  std::vector<std::string> parts = split_tag(process, ':');
  if (parts[0] == "poisson") return parse_num(parts[1], "rho");
  return std::numeric_limits<double>::quiet_NaN();
}

// ---- writers ----------------------------------------------------------------

std::string values_csv(const ReplicationResult& r) {
  std::string out = "rep,seed,value\n";
  for (std::size_t i = 0; i < r.values.size(); ++i)
    out += std::to_string(i) + "," + std::to_string(r.seeds[i]) + "," + fmt_g(r.values[i]) + "\n";
  return out;
}

std::string values_json(const ReplicationResult& r) {
  ojson j;
  j["schema_version"] = 1;
  j["kind"] = "values";
  j["n"] = r.n;
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    ojson row;
    row["rep"] = i;
    row["seed"] = r.seeds[i];
    row["value"] = r.values[i];
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string asymptotics_csv(const AsymptoticsTable& t) {
  std::string out = "n,mean_per_n,mean_se,var_per_n,var_se,var_ratio\n";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const AsymptoticsRow& r = t.rows[i];
    out += fmt_g(r.n) + "," + fmt_g(r.mean_per_n) + "," + fmt_g(r.mean_se) + "," +
           fmt_g(r.var_per_n) + "," + fmt_g(r.var_se) + ",";
    if (i > 0) out += fmt_g(r.var_ratio);
    out += "\n";
  }
  return out;
}

std::string normality_json(double n, const CumulantReport& rep, int reps) {
  ojson j;
  j["schema_version"] = 1;
  j["kind"] = "normality";
  j["n"] = n;
  j["reps"] = reps;
  j["k1"] = rep.k1;
  j["k2"] = rep.k2;
  j["k3"] = rep.k3;
  j["k4"] = rep.k4;
  j["skew"] = rep.skew;
  j["exkurt"] = rep.exkurt;
  j["ks"] = rep.ks;
  j["degenerate"] = rep.degenerate;
  return j.dump(2) + "\n";
}

// ---- result file readers (for re-emission) ----------------------------------

ReplicationResult read_values_csv(const std::string& path, double n) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "rep,seed,value")
    throw invalid_parameter("'" + path + "': expected header rep,seed,value");
  ReplicationResult r;
  r.n = n;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols = split_tag(line, ',');
    if (cols.size() != 3) throw invalid_parameter("'" + path + "': malformed row '" + line + "'");
    r.seeds.push_back(std::strtoull(cols[1].c_str(), nullptr, 10));
    r.values.push_back(parse_num(cols[2], "value"));
  }
  return r;
}

ReplicationResult read_values_json(const std::string& path) {
  ojson j;
  try {
    j = ojson::parse(read_file(path));
  } catch (const ojson::exception& e) {
    throw invalid_parameter("'" + path + "': invalid JSON: " + e.what());
  }
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
      j["schema_version"].get<int>() != 1)
    throw invalid_parameter("'" + path + "': unsupported schema_version (expected 1)");
  ReplicationResult r;
  r.n = j.value("n", 0.0);
  for (const ojson& row : j.at("rows")) {
    r.seeds.push_back(row.at("seed").get<std::uint64_t>());
    r.values.push_back(row.at("value").get<double>());
  }
  return r;
}

}  // namespace

// ---- public api ---------------------------------------------------------------

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ExperimentSpec parse_spec(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::exception& e) {
    throw invalid_parameter(std::string("spec: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw invalid_parameter("spec: top level must be an object");
  check_keys(j, "spec",
             {"schema_version", "input", "graph", "model", "score", "harness", "output"});

  ExperimentSpec s;
  s.raw = text;
  s.schema_version = int_at(need(j, "spec", "schema_version"), "schema_version");
  if (s.schema_version != 1)
    throw invalid_parameter("spec: unsupported schema_version " +
                            std::to_string(s.schema_version) + " (expected 1)");

  const ojson& input = need(j, "spec", "input");
  check_keys(input, "input", {"process", "dim", "n"});
  s.process = str_at(input, "input", "process");
  s.dim = int_at(need(input, "input", "dim"), "input.dim");
  const ojson& nlist = need(input, "input", "n");
  if (!nlist.is_array()) throw invalid_parameter("spec: 'input.n' must be an array");
  for (const ojson& v : nlist) s.n_list.push_back(num_at(v, "input.n"));

  const ojson& graph = need(j, "spec", "graph");
  check_keys(graph, "graph", {"builder"});
  s.builder = str_at(graph, "graph", "builder");

  const ojson& model = need(j, "spec", "model");
  check_keys(model, "model", {"tag", "t0", "rounds", "sweeps", "dt", "initial"});
  s.model = str_at(model, "model", "tag");
  if (model.contains("t0")) s.t0 = num_at(model["t0"], "model.t0");
  if (model.contains("rounds")) s.rounds = int_at(model["rounds"], "model.rounds");
  if (model.contains("sweeps")) s.sweeps = int_at(model["sweeps"], "model.sweeps");
  if (model.contains("dt")) s.dt = num_at(model["dt"], "model.dt");
  if (model.contains("initial")) {
    const ojson& init = model["initial"];
    if (init.is_number())
      s.initial = fmt_g(init.get<double>());
    else if (init.is_string())
      s.initial = init.get<std::string>();
    else
      throw invalid_parameter("spec: 'model.initial' must be a number or string");
  }

  const ojson& score = need(j, "spec", "score");
  check_keys(score, "score", {"tag", "f"});
  s.score = str_at(score, "score", "tag");
  if (score.contains("f")) s.f = str_at(score, "score", "f");

  const ojson& harness = need(j, "spec", "harness");
  check_keys(harness, "harness", {"reps", "seed", "threads", "var_ratio_tol"});
  s.reps = int_at(need(harness, "harness", "reps"), "harness.reps");
  const ojson& seed = need(harness, "harness", "seed");
  if (!seed.is_number_unsigned())
    throw invalid_parameter("spec: 'harness.seed' must be an unsigned integer");
  s.seed = seed.get<std::uint64_t>();
  if (harness.contains("threads")) s.threads = int_at(harness["threads"], "harness.threads");
  if (harness.contains("var_ratio_tol"))
    s.var_ratio_tol = num_at(harness["var_ratio_tol"], "harness.var_ratio_tol");

  if (j.contains("output")) {
    const ojson& output = j["output"];
    check_keys(output, "output", {"dir"});
    if (output.contains("dir")) s.out_dir = str_at(output, "output", "dir");
  }

  validate_spec(s);
  return s;
}

ExperimentSpec load_spec(const std::string& path) { return parse_spec(read_file(path)); }

PointConfig sample_process(const std::string& tag, double n, int dim, SeedStream seed) {
  std::vector<std::string> parts = split_tag(tag, ':');
  if (parts[0] == "poisson") {
    if (parts.size() != 2) throw invalid_parameter("expected poisson:<rho>");
    return sample_poisson(parse_num(parts[1], "poisson rho"), n, dim, seed);
  }
  if (parts[0] == "binomial") {
    if (parts.size() != 2) throw invalid_parameter("expected binomial:<m>");
    return sample_binomial(parse_int(parts[1], "binomial m"), n, dim, seed);
  }
  if (parts[0] == "matern") {
    if (parts.size() != 3) throw invalid_parameter("expected matern:<lambda>:<h>");
    return sample_hardcore_thinned(parse_num(parts[1], "matern lambda"), parse_num(parts[2], "matern h"),
                          n, dim, seed);
  }
  if (parts[0] == "cluster") {
    if (parts.size() != 4) throw invalid_parameter("expected cluster:<lp>:<c>:<R>");
    return sample_cluster(parse_num(parts[1], "cluster lp"), parse_num(parts[2], "cluster c"),
                          parse_num(parts[3], "cluster R"), n, dim, seed);
  }
  throw invalid_parameter("unknown process '" + parts[0] + "'");
}

InteractionGraph build_graph(const std::string& tag, const PointConfig& pts) {
  std::vector<std::string> parts = split_tag(tag, ':');
  if (parts[0] == "none") {
    InteractionGraph g;
    g.adj.assign(pts.pts.size(), {});
    g.radii.assign(pts.pts.size(), 1.0);
    return g;
  }
  if (parts[0] == "gilbert") {
    if (parts.size() != 2) throw invalid_parameter("expected gilbert:<r>");
    return build_gilbert(pts, parse_num(parts[1], "gilbert r"));
  }
  if (parts[0] == "knn") {
    if (parts.size() != 2) throw invalid_parameter("expected knn:<k>");
    return build_knn(pts, parse_int(parts[1], "knn k"));
  }
  if (parts[0] == "delaunay") return build_delaunay(pts);
  if (parts[0] == "soi") return build_soi(pts);
  throw invalid_parameter("unknown builder '" + parts[0] + "'");
}

RunOutput run_experiment(const ExperimentSpec& spec0, const std::vector<Override>& overrides,
                         const std::string& format) {
  if (format != "csv" && format != "json")
    throw invalid_parameter("format must be csv or json");
  ExperimentSpec spec = spec0;
  for (const Override& ov : overrides) {
    if (ov.field == "seed") {
      char* end = nullptr;
      spec.seed = std::strtoull(ov.value.c_str(), &end, 10);
      if (end != ov.value.c_str() + ov.value.size() || ov.value.empty())
        throw invalid_parameter("override seed: bad value '" + ov.value + "'");
    } else if (ov.field == "reps") {
      spec.reps = parse_int(ov.value, "override reps");
      if (spec.reps < 1) throw invalid_parameter("override reps: must be >= 1");
    } else if (ov.field == "threads") {
      spec.threads = parse_int(ov.value, "override threads");
      if (spec.threads < 1) throw invalid_parameter("override threads: must be >= 1");
    } else if (ov.field == "out") {
      spec.out_dir = ov.value;
    } else {
      throw invalid_parameter("override: unknown field '" + ov.field + "'");
    }
  }

  auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  std::filesystem::create_directories(spec.out_dir, ec);
  if (ec) throw io_error("cannot create output directory '" + spec.out_dir + "'");

  RunOutput out;
  out.out_dir = spec.out_dir;
  SeedStream root = SeedStream::root(spec.seed);
  std::vector<ReplicationResult> results;
  for (std::size_t i = 0; i < spec.n_list.size() && !out.failed; ++i) {
    double n = spec.n_list[i];
    try {
      ReplicationResult rep =
          replicate(make_runner(spec, n), spec.reps, root.child(i), spec.threads);
      rep.n = n;
      std::string label = fmt_n(n);
      if (format == "csv")
        write_file(spec.out_dir + "/values_n" + label + ".csv", values_csv(rep));
      else
        write_file(spec.out_dir + "/values_n" + label + ".json", values_json(rep));
      out.files.push_back("values_n" + label + (format == "csv" ? ".csv" : ".json"));
      if (spec.reps >= 8) {
        CumulantReport cr = normality_report(rep);
        write_file(spec.out_dir + "/normality_n" + label + ".json",
                   normality_json(n, cr, spec.reps));
        out.files.push_back("normality_n" + label + ".json");
      }
      results.push_back(std::move(rep));
    } catch (const model_error& e) {
      out.failed = true;
      out.error = e.what();
    }
  }

  ojson converged = nullptr;
  if (!out.failed && spec.reps >= 2) {
    AsymptoticsTable table = asymptotics_table(results, nominal_rho(spec.process),
                                               spec.var_ratio_tol);
    write_file(spec.out_dir + "/asymptotics.csv", asymptotics_csv(table));
    out.files.push_back("asymptotics.csv");
    if (table.converged) converged = *table.converged;
  }
  std::sort(out.files.begin(), out.files.end());

  auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - start)
                  .count();
  char hash[32];
  std::snprintf(hash, sizeof hash, "fnv1a:%016llx",
                static_cast<unsigned long long>(fnv1a(spec.raw)));
  ojson manifest;
  manifest["schema_version"] = 1;
  manifest["kind"] = "manifest";
  manifest["build"] = std::string("mppsim 0.1.0 (gcc ") + __VERSION__ + ")";
  manifest["spec_hash"] = hash;
  manifest["seed"] = spec.seed;
  manifest["reps"] = spec.reps;
  manifest["threads"] = spec.threads;
  manifest["format"] = format;
  ojson ovs = ojson::object();
  for (const Override& ov : overrides) ovs[ov.field] = ov.value;
  manifest["overrides"] = std::move(ovs);
  manifest["files"] = out.files;
  manifest["asymptotics_converged"] = converged;
  manifest["status"] = out.failed ? "FAILED" : "ok";
  if (out.failed) manifest["error"] = out.error;
  manifest["wall_ms"] = static_cast<long long>(wall);
  manifest["spec_text"] = spec.raw;
  out.manifest = spec.out_dir + "/manifest.json";
  write_file(out.manifest, manifest.dump(2) + "\n");
  return out;
}

std::vector<std::string> emit_results(const std::string& dir, const std::string& format) {
  if (format != "csv" && format != "json")
    throw invalid_parameter("format must be csv or json");
  if (!std::filesystem::is_directory(dir))
    throw io_error("'" + dir + "' is not a directory");

  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file()) names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());

  std::vector<std::string> written;
  for (const std::string& name : names) {
    bool csv = name.size() > 4 && name.rfind(".csv") == name.size() - 4;
    bool json = name.size() > 5 && name.rfind(".json") == name.size() - 5;
    if (name.rfind("values_n", 0) != 0 || (!csv && !json)) continue;
    std::string label = name.substr(8, name.size() - 8 - (csv ? 4 : 5));
    ReplicationResult r = csv ? read_values_csv(dir + "/" + name, parse_num(label, "window label"))
                              : read_values_json(dir + "/" + name);
    std::string target = "values_n" + label + (format == "csv" ? ".csv" : ".json");
    write_file(dir + "/" + target, format == "csv" ? values_csv(r) : values_json(r));
    written.push_back(target);
  }

  // keep the manifest exhaustive when new files appeared
  std::string mpath = dir + "/manifest.json";
  if (!written.empty() && std::filesystem::exists(mpath)) {
    try {
      ojson manifest = ojson::parse(read_file(mpath));
      std::vector<std::string> files = manifest.value("files", std::vector<std::string>{});
      files.insert(files.end(), written.begin(), written.end());
      std::sort(files.begin(), files.end());
      files.erase(std::unique(files.begin(), files.end()), files.end());
      manifest["files"] = files;
      write_file(mpath, manifest.dump(2) + "\n");
    } catch (const ojson::exception&) {
      // a foreign manifest is left untouched
    }
  }
  return written;
}

std::string list_catalog() {
  return
      "processes\n"
      "  binomial:<m>                exactly m independent uniform sites\n"
      "  cluster:<lp>:<c>:<R>        Poisson(lp) parents, Poisson(c) offspring uniform in B_R\n"
      "  matern:<lambda>:<h>         type II hard-core thinning at range h\n"
      "  poisson:<rho>               homogeneous Poisson with intensity rho\n"
      "graph builders\n"
      "  delaunay                    triangulation edges (dim 2)\n"
      "  gilbert:<r>                 edges between sites within distance r\n"
      "  knn:<k>                     symmetrized k-nearest-neighbour edges\n"
      "  none                        empty graph, for field statistics\n"
      "  soi                         sphere-of-influence edges\n"
      "models\n"
      "  diffusion:<tag>             network SDE by synchronous Euler steps; tags ou:<rate>:<noise>,\n"
      "                              coupled:<rate>:<c>:<noise>; needs t0 and dt\n"
      "  field:<tag>                 static random field statistic; field tags listed below\n"
      "  ips:<rule>                  continuous-time particle system on unit-rate Poisson clocks; needs t0\n"
      "  ips_discrete:<rule>         synchronous rounds of the discrete-capable rules; needs rounds\n"
      "  spin:<tag>                  Gibbs field sampled by Glauber sweeps; tags hardcore:<lambda>,\n"
      "                              wr:<lambda>, ising:<beta>:<gamma>, coloring:<k>; needs sweeps\n"
      "update rules\n"
      "  ballistic:exp:<mean>:<r>    ballistic deposition, exponential heights, discs of radius r (dim 2)\n"
      "  ballistic:unif:<a>:<b>:<r>  ballistic deposition, uniform heights on [a,b] (dim 2)\n"
      "  csa:<p0,p1,...>             cooperative sequential adsorption, acceptance probability by\n"
      "                              occupied-neighbour count\n"
      "  exclusion                   particle hops to a uniformly chosen empty neighbour\n"
      "  majority                    majority vote over the neighbourhood, ties keep the value\n"
      "  rsa                         random sequential adsorption: park unless a neighbour is parked\n"
      "  sandpile                    unit-threshold toppling, excess shed equally to the neighbours\n"
      "  sir:<bI>:<bR>               susceptible-infected-recovered epidemic\n"
      "  voter                       adopt the value of a uniformly chosen neighbour\n"
      "scores\n"
      "  odometer                    accumulated odometer increment at the site\n"
      "  s1:<values>:<times>         1 when the state lies in the value set at every listed time\n"
      "  s2:<values>                 occupation time of the value set on [0, t0]\n"
      "  s3:<values>:<t_min>         1 when that occupation time is at least t_min\n"
      "  s4                          terminal state\n"
      "  s5:<times>:<combiner>       sum, max, min or mean of the state at the listed times\n"
      "  sup_norm                    diffusion paths: running maximum of |value|\n"
      "  terminal                    diffusion paths: final value\n"
      "  threshold:<tau>             fields: 1 when the field value is below tau\n"
      "  time_average                diffusion paths: trapezoidal time average\n"
      "fields\n"
      "  cell:<lambda>               value of the nearest covariate of a Poisson(lambda) support\n"
      "  const:<c>                   constant field of value c\n"
      "  shotnoise:<lambda>          Gaussian-kernel shot noise over a Poisson(lambda) support\n"
      "test functions\n"
      "  left_half                   indicator of the left half of the unit window\n"
      "  one                         constant 1\n";
}

}  // namespace mpp
