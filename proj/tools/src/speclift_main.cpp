#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "speclift/experiment.hpp"

namespace {

using namespace speclift;

int run_command(const std::string& config_path, const std::string& out_dir, double tolerance,
                const std::string& window_list, std::int64_t seed) {
  ExperimentConfig config = load_config(config_path);
  if (tolerance > 0.0) config.tolerance = tolerance;
  if (seed >= 0) config.seed = std::uint64_t(seed);
  if (!window_list.empty()) {
    config.windows.clear();
    std::stringstream ss(window_list);
    std::string item;
    while (std::getline(ss, item, ',')) config.windows.push_back(std::stoi(item));
  }
  ExperimentResult result = run_experiment(config);
  std::filesystem::create_directories(out_dir);
  write_file(out_dir + "/spectrum.csv", spectrum_csv(result.spectrum));
  write_file(out_dir + "/report.json", report_json(config, result));
  for (const auto& check : result.checks) {
    std::printf("%-42s %-10s deviation %.3e tolerance %.3e\n", check.name.c_str(),
                check.report_only ? "report" : (check.passed ? "pass" : "FAIL"), check.deviation,
                check.tolerance);
  }
  if (!result.all_passed()) {
    const CheckResult* failure = result.first_failure();
    std::fprintf(stderr, "numerical failure: %s (%s): deviation %.6e > tolerance %.6e\n",
                 failure->name.c_str(), failure->identity.c_str(), failure->deviation,
                 failure->tolerance);
    return 1;
  }
  std::printf("all checks passed; outputs in %s\n", out_dir.c_str());
  return 0;
}

int compare_command(const std::string& config_path, const std::string& baseline_path,
                    double tolerance) {
  ExperimentConfig config = load_config(config_path);
  if (tolerance > 0.0) config.tolerance = tolerance;
  std::ifstream in(baseline_path);
  if (!in) throw BaselineMismatchError("baseline: cannot open " + baseline_path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  ExperimentResult result = run_experiment(config);
  CompareResult diff = compare_spectra(result.spectrum, buffer.str(), config.tolerance);
  if (diff.structural_mismatch) {
    std::fprintf(stderr, "structural mismatch: %s\n", diff.note.c_str());
    return 1;
  }
  if (diff.moved.empty()) {
    std::printf("empty diff: spectra agree within %.3e\n", config.tolerance);
    return 0;
  }
  std::printf("%zu eigenvalues moved:\n", diff.moved.size());
  for (const auto& entry : diff.moved)
    std::printf("  window %d: %.17g -> %.17g\n", entry.window, entry.before, entry.after);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  speclift::tune_allocator();
  CLI::App app{"finite-truncation spectral triples over free group actions"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", window_list, baseline_path;
  double tolerance = -1.0;
  std::int64_t seed = -1;

  CLI::App* run = app.add_subcommand("run", "run an experiment config and emit CSV + JSON");
  run->add_option("config", config_path, "JSON experiment config")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--tolerance", tolerance, "override the config tolerance");
  run->add_option("--window", window_list, "override window sizes, comma separated");
  run->add_option("--seed", seed, "override the random seed");

  CLI::App* compare = app.add_subcommand("compare", "diff an experiment against a baseline CSV");
  compare->add_option("config", config_path, "JSON experiment config")->required();
  compare->add_option("baseline", baseline_path, "baseline spectrum CSV")->required();
  compare->add_option("--tolerance", tolerance, "override the config tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(config_path, out_dir, tolerance, window_list, seed);
    return compare_command(config_path, baseline_path, tolerance);
  } catch (const speclift::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const speclift::BaselineMismatchError& e) {
    std::fprintf(stderr, "baseline error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 1;
  }
}
