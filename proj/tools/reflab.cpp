// reflab run <subcommand> <config> [--seed N] [--jobs N] [--out DIR] [--richardson]
//            [--strict-class-d] [--dump-paths]
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "json.hpp"
#include "reflab/digest.hpp"
#include "reflab/experiments.hpp"

namespace fs = std::filesystem;
using namespace reflab;

namespace {

constexpr const char* kVersion = "0.1.0";

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int run(const std::string& subcommand, const std::string& config_path, const RunFlags& base, const std::string& out_dir,
        bool dump_paths) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<ExperimentConfig> selected;
  SuiteConfig suite;
  try {
    suite = load_config(config_path);
    selected = select(suite, subcommand);
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  }
  fs::create_directories(out_dir);
  RunFlags flags = base;
  if (dump_paths) flags.dump_dir = out_dir;

  std::vector<ExperimentResult> results;
  int failures = 0;
  for (const auto& c : selected) {
    const std::string kind = subcommand == "all" ? c.kind : subcommand;
    try {
      results.push_back(run_experiment(c, kind, flags));
    } catch (const ConfigError& e) {
      std::cerr << "invalid config: experiment '" << c.label << "': " << e.what() << "\n";
      return 2;
    } catch (const std::invalid_argument& e) {
      std::cerr << "invalid config: experiment '" << c.label << "': " << e.what() << "\n";
      return 2;
    }
    const auto& r = results.back();
    failures += r.failures;
    std::printf("%-28s %-18s %s%s\n", r.label.c_str(), r.kind.c_str(), r.summary.c_str(),
                r.failures ? "  [FAIL]" : "");
    std::fflush(stdout);
  }

  write_file(fs::path(out_dir) / "results.csv", results_csv(results));
  write_file(fs::path(out_dir) / "reports.jsonl", reports_jsonl(results));
  for (const auto& r : results)
    for (const auto& [name, text] : r.files) write_file(fs::path(out_dir) / name, text);

  nlohmann::ordered_json manifest;
  manifest["tool"] = "reflab";
  manifest["version"] = kVersion;
  manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
  manifest["compiler"] = __VERSION__;
  manifest["subcommand"] = subcommand;
  manifest["config"] = config_path;
  manifest["config_digest"] = hex64(fnv1a64(suite.serialize()));
  manifest["jobs"] = flags.jobs;
  manifest["richardson"] = flags.richardson;
  manifest["strict_class_d"] = flags.strict_class_d;
  auto& list = manifest["experiments"] = nlohmann::ordered_json::array();
  for (const auto& r : results)
    list.push_back({{"label", r.label},
                    {"kind", r.kind},
                    {"digest", r.digest},
                    {"seed", r.seed},
                    {"failures", r.failures},
                    {"wall_seconds", r.wall_seconds}});
  manifest["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");

  std::printf("verdict: %s (%zu experiments, %d failures)\n", failures ? "FAIL" : "PASS", results.size(), failures);
  return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reflab: reflecting diffusions on manifolds with boundary"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto* cmd = app.add_subcommand("run", "run one subcommand of a config file");
  std::string subcommand, config_path, out_dir = "reflab-out";
  std::uint64_t seed = 0;
  RunFlags flags;
  bool dump_paths = false;
  std::vector<std::string> choices = known_kinds();
  choices.push_back("all");
  cmd->add_option("subcommand", subcommand, "experiment kind, or all")->required()->check(CLI::IsMember(choices));
  cmd->add_option("config", config_path, "config file")->required();
  auto* seed_opt = cmd->add_option("--seed", seed, "override every experiment's seed");
  cmd->add_option("--jobs", flags.jobs, "worker threads")->check(CLI::Range(1, 1024));
  cmd->add_option("--out", out_dir, "output directory");
  cmd->add_flag("--richardson", flags.richardson, "also run at h/2 and extrapolate");
  cmd->add_flag("--strict-class-d", flags.strict_class_d, "treat N phi != 0 on the boundary as a failure");
  cmd->add_flag("--dump-paths", dump_paths, "write sampled paths of simulate experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*seed_opt) flags.seed = seed;
  try {
    return run(subcommand, config_path, flags, out_dir, dump_paths);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
