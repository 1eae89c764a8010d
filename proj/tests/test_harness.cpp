#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sconv/harness.hpp"
#include "sconv/scenario.hpp"

using namespace sconv;

namespace {

const char* scenario_dir = SCONV_SCENARIO_DIR;

Scenario small_ou() {
  Scenario s = load_scenario(std::string(scenario_dir) + "/ou_single.json");
  s.ensemble.paths = 2000;
  s.grid.steps = 64;
  return s;
}

}  // namespace

TEST_CASE("all shipped scenarios load, validate and round-trip") {
  const std::vector<std::string> files = {"wiener_identity", "scalar_time", "mixed_wiener_atom",
                                          "ou", "ou_single", "levy_ou", "linear_drift"};
  for (const auto& f : files) {
    const Scenario s = load_scenario(std::string(scenario_dir) + "/" + f + ".json");
    CHECK(s.name == f);
    const Scenario back = scenario_from_json(scenario_to_json(s));
    CHECK(scenario_digest(back) == scenario_digest(s));
    CHECK(back.ensemble.seed == s.ensemble.seed);
    CHECK(back.checks == s.checks);
  }
}

TEST_CASE("validation errors carry the violated invariant") {
  {
    nlohmann::json j = {{"name", "bad"}, {"ensemble", {{"paths", -5}}}};
    try {
      scenario_from_json(j);
      CHECK(false);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("ensemble.paths must be >= 1") != std::string::npos);
    }
  }
  {
    nlohmann::json j = {{"name", "bad"},
                        {"basis", {{"n_modes", 2}}},
                        {"noise", {{"atoms", {{{"weight", 1.0}, {"vector", {0.0, 0.0}}}}}}}};
    try {
      scenario_from_json(j);
      CHECK(false);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("atom must be a nonzero vector") != std::string::npos);
    }
  }
  {
    nlohmann::json j = {{"name", "bad"}, {"checks", {"nonsense"}}};
    CHECK_THROWS_AS(scenario_from_json(j), std::invalid_argument);
  }
  CHECK_THROWS_AS(load_scenario("/nonexistent/file.json"), std::runtime_error);
}

TEST_CASE("empty check list runs to an empty passing manifest") {
  Scenario s = small_ou();
  s.checks.clear();
  const RunManifest man = run_scenario(s);
  CHECK(man.results.empty());
  CHECK(man.all_pass());
}

TEST_CASE("determinism: summaries are identical across worker counts") {
  Scenario s = small_ou();
  s.threads = 1;
  const RunManifest a = run_scenario(s);
  s.threads = 4;
  const RunManifest b = run_scenario(s);
  CHECK(summary_table(a) == summary_table(b));
  CHECK(compare_manifests(a, b).empty());
}

TEST_CASE("different seeds change estimates but not targets") {
  Scenario s = small_ou();
  const RunManifest a = run_scenario(s);
  s.ensemble.seed += 1;
  const RunManifest b = run_scenario(s);
  const ManifestDiff d = compare_manifests(a, b);
  CHECK_FALSE(d.empty());
  REQUIRE(a.results.size() == b.results.size());
  bool estimate_changed = false;
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    if (a.results[i].estimate != b.results[i].estimate) estimate_changed = true;
    CHECK(a.results[i].target == b.results[i].target);
  }
  CHECK(estimate_changed);
}

TEST_CASE("manifest compare flags version mismatch as a warning") {
  Scenario s = small_ou();
  s.checks.clear();
  RunManifest a = run_scenario(s);
  RunManifest b = a;
  b.version = "sconv 0.0.0";
  const ManifestDiff d = compare_manifests(a, b);
  CHECK(d.empty());  // warnings are not differences
  REQUIRE(d.warnings.size() == 1);
  CHECK(d.warnings[0].find("version mismatch") != std::string::npos);
}

TEST_CASE("manifest json round trip") {
  Scenario s = small_ou();
  s.checks = {"isometry"};
  const RunManifest man = run_scenario(s);
  const std::string path = "test_manifest_tmp.json";
  {
    std::ofstream out(path);
    out << manifest_to_json(man).dump(2);
  }
  const RunManifest back = load_manifest(path);
  CHECK(compare_manifests(man, back).empty());
  std::remove(path.c_str());
}

TEST_CASE("small ou scenario passes its checks") {
  Scenario s = small_ou();
  s.checks = {"isometry", "covariance", "ou_moment"};
  const RunManifest man = run_scenario(s);
  REQUIRE(man.results.size() == 4);
  for (const auto& r : man.results) {
    INFO(r.check, "/", r.name, " estimate=", r.estimate, " target=", r.target, " z=", r.z);
    CHECK(r.pass);
  }
}

TEST_CASE("run_and_write emits summary, manifest and dumps") {
  Scenario s = small_ou();
  s.checks = {"isometry"};
  s.dump_paths = 2;
  const RunManifest man = run_and_write(s, ".");
  CHECK(man.all_pass());

  std::ifstream sf(s.name + "_summary.tsv");
  REQUIRE(sf.good());
  std::string header;
  std::getline(sf, header);
  CHECK(header == "check\tname\testimate\ttarget\tsigma\tz\tpass");

  std::ifstream pf(s.name + "_paths.tsv");
  REQUIRE(pf.good());
  std::getline(pf, header);
  std::string row;
  std::getline(pf, row);
  std::istringstream iss(row);
  std::vector<std::string> cols;
  std::string cell;
  while (std::getline(iss, cell, '\t')) cols.push_back(cell);
  CHECK(cols.size() == 3 + s.n_modes);  // path_id, time, modes, seminorm

  std::ifstream jf(s.name + "_jumps.tsv");
  CHECK(jf.good());

  for (const char* suffix : {"_summary.tsv", "_manifest.json", "_paths.tsv", "_jumps.tsv"})
    std::remove((s.name + suffix).c_str());
}

TEST_CASE("levy structure check on the mixed scenario") {
  Scenario s = load_scenario(std::string(scenario_dir) + "/mixed_wiener_atom.json");
  s.ensemble.paths = 5000;
  s.grid.steps = 64;
  s.checks = {"levy_structure"};
  const RunManifest man = run_scenario(s);
  REQUIRE(man.results.size() == 3);
  for (const auto& r : man.results) {
    INFO(r.check, "/", r.name, " estimate=", r.estimate, " z=", r.z);
    CHECK(r.pass);
  }
}
