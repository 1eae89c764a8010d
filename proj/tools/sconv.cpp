#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sconv/sconv.hpp"

namespace {

// Exit codes: 0 all checks pass, 1 at least one check fails, 2 usage or
// configuration error.
constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_error = 2;

std::string default_out_dir() {
  const char* env = std::getenv("SCONV_OUT_DIR");
  return env ? env : ".";
}

struct Overrides {
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::size_t paths = 0;
  std::size_t threads = 0;
  bool has_threads = false;
  std::vector<std::string> checks;
};

sconv::Scenario load_with_overrides(const std::string& config, const Overrides& ov) {
  sconv::Scenario s = sconv::load_scenario(config);
  if (ov.has_seed) s.ensemble.seed = ov.seed;
  if (ov.paths > 0) s.ensemble.paths = ov.paths;
  if (ov.has_threads) s.threads = ov.threads;
  if (!ov.checks.empty()) {
    std::vector<std::string> kept;
    for (const std::string& c : s.checks)
      for (const std::string& want : ov.checks)
        if (c == want) {
          kept.push_back(c);
          break;
        }
    s.checks = std::move(kept);
  }
  sconv::validate_scenario(s);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral simulator and property-verification harness for "
               "stochastic convolutions and evolution equations"};
  app.set_version_flag("--version", sconv::version_string);
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = default_out_dir();
  Overrides ov;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "scenario config file")->required();
    cmd->add_option("--seed", ov.seed, "override the ensemble master seed")
        ->each([&](const std::string&) { ov.has_seed = true; });
    cmd->add_option("--paths", ov.paths, "override the ensemble path count");
    cmd->add_option("--threads", ov.threads, "worker count (0 = hardware)")
        ->each([&](const std::string&) { ov.has_threads = true; });
    cmd->add_option("--check", ov.checks, "run only the named checks (repeatable)");
  };

  CLI::App* run = app.add_subcommand("run", "run a scenario and write manifest and summary");
  add_common(run);
  run->add_option("--out", out_dir, "output directory (default $SCONV_OUT_DIR or .)");

  CLI::App* validate = app.add_subcommand("validate", "load and validate a scenario, no execution");
  add_common(validate);

  CLI::App* compare = app.add_subcommand("compare", "diff two run manifests");
  std::string manifest_a, manifest_b;
  compare->add_option("a", manifest_a, "first manifest")->required();
  compare->add_option("b", manifest_b, "second manifest")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      const sconv::Scenario s = load_with_overrides(config, ov);
      std::cout << "ok: " << s.name << " (digest " << sconv::scenario_digest(s) << ")\n";
      return exit_pass;
    }
    if (run->parsed()) {
      const sconv::Scenario s = load_with_overrides(config, ov);
      const sconv::RunManifest man = sconv::run_and_write(s, out_dir);
      std::cout << sconv::summary_table(man);
      return man.all_pass() ? exit_pass : exit_fail;
    }
    if (compare->parsed()) {
      const sconv::RunManifest a = sconv::load_manifest(manifest_a);
      const sconv::RunManifest b = sconv::load_manifest(manifest_b);
      const sconv::ManifestDiff d = sconv::compare_manifests(a, b);
      for (const std::string& w : d.warnings) std::cerr << "warning: " << w << '\n';
      if (d.empty()) {
        std::cout << "manifests identical\n";
        return exit_pass;
      }
      for (const std::string& line : d.differences) std::cout << line << '\n';
      return exit_fail;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_error;
  }
  return exit_error;
}
