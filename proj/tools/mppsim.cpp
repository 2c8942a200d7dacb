#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mpp/errors.hpp"
#include "mpp/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"marked point process experiment runner"};
  std::string spec_path, out_dir, reemit_dir, format = "csv";
  std::string seed_str, reps_str, threads_str;
  bool list = false;
  app.add_option("--spec", spec_path, "experiment spec file (JSON)");
  app.add_option("--seed", seed_str, "override harness.seed");
  app.add_option("--reps", reps_str, "override harness.reps");
  app.add_option("--threads", threads_str, "override harness.threads");
  app.add_option("--out", out_dir, "override output.dir");
  app.add_option("--format", format, "payload format, csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--list", list, "print the model catalog and exit");
  app.add_option("--reemit", reemit_dir, "re-emit the payload files in this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (list) {
      std::fputs(mpp::list_catalog().c_str(), stdout);
      return 0;
    }
    if (!reemit_dir.empty()) {
      for (const std::string& f : mpp::emit_results(reemit_dir, format))
        std::printf("%s\n", f.c_str());
      return 0;
    }
    if (spec_path.empty()) {
      std::fprintf(stderr, "error: --spec is required (or --list / --reemit)\n");
      return 2;
    }
    mpp::ExperimentSpec spec = mpp::load_spec(spec_path);
    std::vector<mpp::Override> overrides;
    if (!seed_str.empty()) overrides.push_back({"seed", seed_str});
    if (!reps_str.empty()) overrides.push_back({"reps", reps_str});
    if (!threads_str.empty()) overrides.push_back({"threads", threads_str});
    if (!out_dir.empty()) overrides.push_back({"out", out_dir});
    mpp::RunOutput out = mpp::run_experiment(spec, overrides, format);
    std::printf("%s\n", out.manifest.c_str());
    if (out.failed) {
      std::fprintf(stderr, "model error: %s\n", out.error.c_str());
      return 3;
    }
    return 0;
  } catch (const mpp::invalid_parameter& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const mpp::model_error& e) {
    std::fprintf(stderr, "model error: %s\n", e.what());
    return 3;
  } catch (const mpp::io_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
