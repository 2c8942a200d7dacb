#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpp/graphs.hpp"
#include "mpp/pointproc.hpp"
#include "mpp/stats.hpp"

namespace mpp {

// Parsed and validated experiment description. The JSON layout is versioned and
// fail-closed: unknown keys anywhere are validation errors, so config typos cannot
// silently change an experiment.
struct ExperimentSpec {
  int schema_version = 1;
  // input block
  std::string process;  // poisson:<rho> | binomial:<m> | matern:<lambda>:<h> |
                        // cluster:<lp>:<c>:<R>
  int dim = 2;
  std::vector<double> n_list;
  // graph block
  std::string builder;  // none | gilbert:<r> | knn:<k> | delaunay | soi
  // model block
  std::string model;  // ips:<rule> | ips_discrete:<rule> | spin:<tag> | diffusion:<tag>
                      // | field:<tag>
  double t0 = 0.0;    // horizon for ips and diffusion
  int rounds = 0;     // synchronous rounds for ips_discrete
  long sweeps = 0;    // Glauber sweeps for spin
  double dt = 0.0;    // step for diffusion
  std::string initial;  // <number> | bernoulli:<p> | rademacher (default 0)
  // score block
  std::string score;  // s1..s5/odometer (ips), s4 (spin), sup_norm/terminal/
                      // time_average (diffusion), threshold:<tau> (field)
  std::string f = "one";
  // harness block
  int reps = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  double var_ratio_tol = 0.15;
  // output block
  std::string out_dir = "out";

  std::string raw;  // original text, preserved for hashing and the manifest
};

ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec load_spec(const std::string& path);

// command-line override of a harness field, recorded in the manifest
struct Override {
  std::string field;  // seed | reps | threads | out
  std::string value;
};

struct RunOutput {
  std::string out_dir;
  std::vector<std::string> files;  // payload files, relative to out_dir, sorted
  std::string manifest;            // manifest path
  bool failed = false;
  std::string error;
};

// End-to-end run: per window size writes values_n<k>.<format> and a normality
// report, then the asymptotics table, then manifest.json. A model error mid-run
// flushes what exists and marks the manifest FAILED instead of throwing.
RunOutput run_experiment(const ExperimentSpec& spec, const std::vector<Override>& overrides,
                         const std::string& format);

// stable sorted listing of every catalog name with its parameter signature
std::string list_catalog();

// Re-emits the payload files found in dir in the requested format and returns the
// files written. Inputs are the values/asymptotics files of a previous run.
std::vector<std::string> emit_results(const std::string& dir, const std::string& format);

// dispatchers used by the runner and directly by tests
PointConfig sample_process(const std::string& tag, double n, int dim, SeedStream seed);
InteractionGraph build_graph(const std::string& tag, const PointConfig& pts);

std::uint64_t fnv1a(const std::string& text);

}  // namespace mpp
