// solab: experiment runner. Exit codes: 0 all checks pass, 1 a check
// failed, 2 the manifest or the flags are invalid.

#include <omp.h>

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "solab/error.hpp"
#include "solab/experiments.hpp"

namespace {

int run(const std::string& sub, const std::string& manifest_path, const std::string& out, const solab::RunOptions& opt,
        bool quiet) {
  std::ifstream in(manifest_path);
  if (!in) {
    std::cerr << "error: --manifest: cannot open " << manifest_path << "\n";
    return 2;
  }
  solab::Json manifest;
  try {
    manifest = solab::Json::parse(in);
  } catch (const solab::Json::parse_error& e) {
    std::cerr << "error: --manifest: " << e.what() << "\n";
    return 2;
  }
  solab::RunReport rep = solab::run_experiment(sub, manifest, opt);
  if (!out.empty()) solab::write_outputs(rep, out);
  if (!quiet) {
    for (const auto& c : rep.checks)
      std::printf("%-4s %-28s value=%s threshold=%s  %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                  solab::format_number(c.value).c_str(), solab::format_number(c.threshold).c_str(), c.detail.c_str());
    for (const auto& s : rep.stages) std::printf("time %-24s %.3f s\n", s.stage.c_str(), s.seconds);
  }
  std::printf("%s: %s\n", sub.c_str(), rep.passed() ? "pass" : "fail");
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measured solenoids in flat tori: realization, asymptotic cycles, currents and intersections"};
  app.require_subcommand(1);
  std::string manifest, out;
  int workers = 0;
  std::int64_t seed = -1;
  double scale = 1.0;
  bool quiet = false;

  for (const auto& name : solab::subcommands()) {
    CLI::App* sc = app.add_subcommand(name, "run the " + name + " experiment");
    sc->add_option("--manifest", manifest, "experiment manifest (JSON)")->required();
    sc->add_option("--out", out, "output directory for CSV, report.json and grid files");
    sc->add_option("--workers", workers, "OpenMP worker threads (0 keeps the default)")->check(CLI::NonNegativeNumber);
    sc->add_option("--seed-override", seed, "replace the manifest seed")->check(CLI::NonNegativeNumber);
    sc->add_option("--tolerance-scale", scale, "multiply every manifest tolerance")->check(CLI::PositiveNumber);
    sc->add_flag("--quiet", quiet, "print only the status line");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  solab::RunOptions opt;
  opt.workers = workers;
  opt.tolerance_scale = scale;
  if (seed >= 0) opt.seed_override = static_cast<std::uint64_t>(seed);
  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return run(sub, manifest, out, opt, quiet);
  } catch (const solab::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const solab::ConstructionError& e) {
    std::cerr << "construction error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "check failure: " << e.what() << "\n";
    return 1;
  }
}
