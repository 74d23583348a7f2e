#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"

namespace fs = std::filesystem;
using cbpcli::ExperimentConfig;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("cbpsim_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config validation catches bad inputs before any compute") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  SUBCASE("bad n") {
    cfg.n = 0;
    CHECK_THROWS_AS(cfg.validate(), cbpcli::ConfigError);
  }
  SUBCASE("m larger than n") {
    cfg.n = 3;
    cfg.m = 5;
    CHECK_THROWS_AS(cfg.validate(), cbpcli::ConfigError);
  }
  SUBCASE("bad damping") {
    cfg.damping = 1.0;
    CHECK_THROWS_AS(cfg.validate(), cbpcli::ConfigError);
  }
  SUBCASE("invalid kernel") {
    cfg.kernel_family = "linear";
    cfg.kernel_slope = 1.0;
    cfg.kernel_offset = -2.0;
    CHECK_THROWS_AS(cfg.validate(), cbpcli::ConfigError);
  }
  SUBCASE("invalid pmf") {
    cfg.outdeg_type = "pmf";
    cfg.outdeg_pmf = {0.7, 0.7};
    CHECK_THROWS_AS(cfg.validate(), cbpcli::ConfigError);
  }
  SUBCASE("bad target shape") {
    cfg.targets = {{{0, 5}, {1, 1}}};
    CHECK_THROWS_AS(cfg.validate(), cbpcli::ConfigError);
  }
}

TEST_CASE("config file loading overrides defaults field by field") {
  const auto dir = fresh_dir("cfg");
  const auto path = dir / "config.json";
  std::ofstream(path) << R"({
    "kernel": {"family": "constant", "offset": 2.0},
    "out_degree": {"type": "pmf", "pmf": [0.25, 0.75]},
    "n": 42, "seed": 99, "damping": 0.3,
    "targets": [{"parents": [0], "marks": [2]}]
  })";
  ExperimentConfig cfg;
  cbpcli::load_config_file(path.string(), cfg);
  CHECK(cfg.kernel_family == "constant");
  CHECK(cfg.kernel_offset == doctest::Approx(2.0));
  CHECK(cfg.outdeg_pmf.size() == 2);
  CHECK(cfg.n == 42);
  CHECK(cfg.seed == 99);
  CHECK(cfg.damping == doctest::Approx(0.3));
  REQUIRE(cfg.targets.size() == 1);
  CHECK(cfg.targets[0].marks[0] == 2);
  CHECK(cfg.replicas == 1000);  // untouched default
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config hash tracks the experiment, not the execution") {
  ExperimentConfig a, b;
  CHECK(a.hash() == b.hash());
  b.threads = 8;
  b.out_dir = "/elsewhere";
  CHECK(a.hash() == b.hash());  // execution details excluded
  b.seed = 1234;
  CHECK(a.hash() != b.hash());
  ExperimentConfig c;
  c.kernel_offset = 0.5;
  CHECK(a.hash() != c.hash());
}

TEST_CASE("malthusian command prints the solved rate") {
  ExperimentConfig cfg;  // linear(1,0)
  std::ostringstream out;
  cbpcli::cmd_malthusian(cfg, out);
  CHECK(out.str().find("\"lambda\":2.0") != std::string::npos);
  CHECK(out.str().find(cfg.hash()) != std::string::npos);
}

TEST_CASE("generate is byte-reproducible under a fixed seed") {
  ExperimentConfig cfg;
  cfg.n = 80;
  cfg.outdeg_type = "pmf";
  cfg.outdeg_pmf = {0.5, 0.5};
  cfg.seed = 21;

  const auto d1 = fresh_dir("gen1");
  const auto d2 = fresh_dir("gen2");
  std::ostringstream s1, s2;
  cfg.out_dir = d1.string();
  cbpcli::cmd_generate(cfg, s1);
  cfg.out_dir = d2.string();
  cbpcli::cmd_generate(cfg, s2);
  CHECK(slurp(d1 / "graph.json") == slurp(d2 / "graph.json"));
  CHECK(slurp(d1 / "graph.dot") == slurp(d2 / "graph.dot"));

  cfg.seed = 22;
  const auto d3 = fresh_dir("gen3");
  cfg.out_dir = d3.string();
  std::ostringstream s3;
  cbpcli::cmd_generate(cfg, s3);
  CHECK(slurp(d1 / "graph.json") != slurp(d3 / "graph.json"));
}

TEST_CASE("generate: a single vertex keeps all its edges as self-loops") {
  ExperimentConfig cfg;
  cfg.n = 1;
  cfg.outdeg_type = "degenerate";
  cfg.outdeg_value = 3;
  const auto dir = fresh_dir("gen_one");
  cfg.out_dir = dir.string();
  std::ostringstream out;
  cbpcli::cmd_generate(cfg, out);
  CHECK(out.str().find("\"edge_multiplicity_total\":3") != std::string::npos);
  CHECK(out.str().find("\"s_n\":3") != std::string::npos);
  const std::string graph = slurp(dir / "graph.json");
  CHECK(graph.find("\"mult\":3") != std::string::npos);  // 3 loops at vertex 1
}

TEST_CASE("couple command writes one row per replica") {
  ExperimentConfig cfg;
  cfg.n = 100;
  cfg.m = 2;
  cfg.replicas = 40;
  cfg.outdeg_value = 2;
  cfg.threads = 2;
  const auto dir = fresh_dir("couple");
  cfg.out_dir = dir.string();
  std::ostringstream out;
  cbpcli::cmd_couple(cfg, out);

  const std::string csv = slurp(dir / "couple_replicas.csv");
  std::int64_t lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == 40 + 2);  // hash comment + header + rows
  CHECK(csv.rfind("# config_hash=" + cfg.hash(), 0) == 0);
  CHECK(out.str().find("joint_success") != std::string::npos);
}

TEST_CASE("limit-sample compares against the geometric closed form") {
  ExperimentConfig cfg;
  cfg.kernel_family = "constant";
  cfg.kernel_offset = 1.0;
  cfg.outdeg_value = 1;
  cfg.samples = 20000;
  cfg.threads = 2;
  cfg.seed = 31;
  const auto dir = fresh_dir("limit");
  cfg.out_dir = dir.string();
  std::ostringstream out;
  cbpcli::cmd_limit_sample(cfg, out);
  CHECK(out.str().find("\"model\":\"uniform\"") != std::string::npos);

  // tv printed and small for this size
  const auto pos = out.str().find("\"tv_distance\":");
  REQUIRE(pos != std::string::npos);
  const double tv = std::stod(out.str().substr(pos + 14));
  CHECK(tv < 0.05);
  CHECK(fs::exists(dir / "limit_samples.csv"));
  CHECK(fs::exists(dir / "pmf_compare.csv"));
}

TEST_CASE("compare emits the full report with matching hashes") {
  ExperimentConfig cfg;
  cfg.n = 500;
  cfg.samples = 2000;
  cfg.threads = 2;
  cfg.seed = 41;
  const auto dir = fresh_dir("compare");
  cfg.out_dir = dir.string();
  std::ostringstream out;
  cbpcli::cmd_compare(cfg, out);
  for (const char* f :
       {"compare_report.json", "neighborhood.csv", "joint_tails.csv",
        "diagnostics.csv"})
    CHECK(fs::exists(dir / f));
  CHECK(slurp(dir / "compare_report.json").find(cfg.hash()) !=
        std::string::npos);
}

#ifdef CBPSIM_BINARY
TEST_CASE("binary exit codes: 0 ok, 1 runtime, 2 invalid model") {
  const std::string bin = CBPSIM_BINARY;
  const auto dir = fresh_dir("exitcodes");
  const auto run = [&](const std::string& args) {
    const std::string cmd = bin + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
  };
  CHECK(run("malthusian --kernel-family constant --offset 1") == 0);
  CHECK(run("malthusian --kernel-family linear --slope 1 --offset -2") == 2);
  CHECK(run("generate -n 0") == 2);
  CHECK(run("generate -n 10 --out-dir /nonexistent_dir_cbpsim/x") == 1);
}
#endif
