#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gapfilter/runner.hpp"

using namespace gapfilter;
namespace fs = std::filesystem;

namespace {

#ifndef GAPFILTER_SCENARIO_DIR
#error "GAPFILTER_SCENARIO_DIR must point at the bundled scenario files"
#endif

std::string scenario_path(const std::string& name) {
  return std::string(GAPFILTER_SCENARIO_DIR) + "/" + name;
}

bool has_issue_at(const ScenarioParse& p, int line, const std::string& needle) {
  for (const auto& is : p.issues)
    if (is.line == line && is.message.find(needle) != std::string::npos) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("gapfilter_test_" + tag + "_" +
                                        std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("a complete scenario parses into the expected structure") {
  std::istringstream in(R"(# demo
name = demo

[grid]
step = 0.5
horizon = 3.0
obs_horizon = 6.0

[geometry]
interval = 0.5 1.0
interval = 2.5 0.5

[weight]
family = triangle
support = 0.0 1.5

[density.f]
family = rational
numerator = 2.0 1.0
denominator = 1.0 0.5 0.25

[density.g]
family = constant
level = 0.4

[class.f]
variant = l2ball
epsilon = 0.1

[run]
seed = 42
paths = 1234
truncation = 0.5 1.0
theta = 0.25
)");
  const ScenarioParse p = parse_scenario(in);
  REQUIRE(p.ok());
  const Scenario& sc = *p.scenario;
  CHECK(sc.name == "demo");
  CHECK(sc.step == 0.5);
  CHECK(sc.horizon == 3.0);
  CHECK(sc.obs_horizon == 6.0);
  REQUIRE(sc.geometry.intervals.size() == 2);
  CHECK(sc.geometry.intervals[1].offset == 2.5);
  CHECK(sc.weight.family == WeightFunction::Family::triangle);
  CHECK(sc.weight.hi == 1.5);
  REQUIRE(std::holds_alternative<RationalRatio>(sc.f));
  CHECK(std::get<RationalRatio>(sc.f).denominator.size() == 3);
  REQUIRE(std::holds_alternative<ConstantBand>(sc.g));
  REQUIRE(sc.class_f.has_value());
  CHECK(std::holds_alternative<L2Ball>(*sc.class_f));
  CHECK_FALSE(sc.class_g.has_value());
  CHECK(sc.run.seed == 42);
  CHECK(sc.run.paths == 1234);
  CHECK(sc.run.truncation == std::vector<double>{0.5, 1.0});
  CHECK(sc.run.theta == 0.25);
  // defaults survive where the file is silent
  CHECK(sc.run.saddle_samples == 100);
  CHECK(sc.run.max_iterations == 500);

  // the parsed scenario builds a real model
  const ProcessModel m = scenario_model(sc);
  CHECK(m.f_vals.size() == static_cast<std::size_t>(m.grids.freq.size));
}

TEST_CASE("defaults apply when the scenario stays minimal") {
  std::istringstream in(R"(
[grid]
step = 0.5
horizon = 1.0

[weight]
family = box
support = 0.0 1.0

[density.f]
family = constant
level = 1.0

[density.g]
family = constant
level = 0.0
)");
  const ScenarioParse p = parse_scenario(in);
  REQUIRE(p.ok());
  CHECK(p.scenario->run.seed == 1);
  CHECK(p.scenario->run.paths == 10000);
  CHECK(p.scenario->run.theta == 0.5);
  CHECK(p.scenario->obs_horizon == 0.0);
  CHECK(p.scenario->geometry.intervals.empty());
}

TEST_CASE("every bundled scenario parses cleanly") {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(GAPFILTER_SCENARIO_DIR)) {
    if (entry.path().extension() != ".scn") continue;
    ++count;
    const ScenarioParse p = parse_scenario_file(entry.path().string());
    INFO(entry.path().filename().string() << ": " << p.describe());
    CHECK(p.ok());
  }
  CHECK(count >= 10);
}

TEST_CASE("parse errors carry line numbers and every issue is reported") {
  std::istringstream in(R"(name = broken
junk line
[grid]
step = fast
horizon = 2.0
bogus = 1

[grid]
step = 0.5

[mystery]
key = 1

[weight]
family = box

[density.f]
family = lorentzian
power = 1.0

[class.f]
variant = contamination
epsilon = 0.2

[run]
theta = 7
)");
  const ScenarioParse p = parse_scenario(in);
  REQUIRE_FALSE(p.ok());
  CHECK_FALSE(p.scenario.has_value());
  CHECK(has_issue_at(p, 2, "expected 'key = value'"));
  CHECK(has_issue_at(p, 4, "not a number"));
  CHECK(has_issue_at(p, 6, "unknown key 'bogus'"));
  CHECK(has_issue_at(p, 8, "duplicate section [grid]"));
  CHECK(has_issue_at(p, 11, "unknown section [mystery]"));
  CHECK(has_issue_at(p, 15, "need 'support = lo hi'"));
  CHECK(has_issue_at(p, 18, "needs 'power' and 'width'"));
  CHECK(has_issue_at(p, 22, "contamination class needs 'power_cap'"));
  CHECK(has_issue_at(p, 0, "theta must lie in (0, 1]"));
  CHECK(has_issue_at(p, 0, "[density.g] section is required"));
}

TEST_CASE("missing required sections are reported together") {
  std::istringstream in("name = empty\n");
  const ScenarioParse p = parse_scenario(in);
  REQUIRE_FALSE(p.ok());
  CHECK(has_issue_at(p, 0, "[grid] step is required"));
  CHECK(has_issue_at(p, 0, "[grid] horizon is required"));
  CHECK(has_issue_at(p, 0, "[weight] section is required"));
  CHECK(has_issue_at(p, 0, "[density.f] section is required"));
  CHECK(has_issue_at(p, 0, "[density.g] section is required"));
}

TEST_CASE("mixed density keys and stray class keys are rejected") {
  std::istringstream in(R"(
[grid]
step = 0.5
horizon = 1.0

[weight]
family = box
support = 0.0 1.0

[density.f]
family = constant
level = 1.0
width = 2.0

[density.g]
family = tabulated

[class.g]
variant = l1ball
epsilon = 0.1
power_cap = 3.0
)");
  const ScenarioParse p = parse_scenario(in);
  REQUIRE_FALSE(p.ok());
  CHECK(has_issue_at(p, 11, "'power'/'width' are not used"));
  CHECK(has_issue_at(p, 16, "tabulated density needs 'value"));
  CHECK(has_issue_at(p, 19, "'power_cap' is only used by the contamination variant"));
}

TEST_CASE("load_scenario throws with the collected issues") {
  TempDir tmp("load");
  const fs::path bad = tmp.path / "bad.scn";
  std::ofstream(bad) << "[grid]\nstep = 0.5\n";
  CHECK_THROWS_AS(load_scenario(bad.string()), validation_error);
  CHECK_THROWS_AS(load_scenario((tmp.path / "missing.scn").string()), io_error);
}

TEST_CASE("filter and truncated commands write their artifacts") {
  TempDir tmp("filter");
  const std::string out = (tmp.path / "f").string();
  REQUIRE(run_command("filter", scenario_path("lorentzian_hole.scn"), out) == 0);
  for (const char* name : {"summary.txt", "h.csv", "c.csv", "v.csv"})
    CHECK(fs::exists(fs::path(out) / name));
  const std::string summary = slurp(fs::path(out) / "summary.txt");
  CHECK(summary.find("exit_code = 0") != std::string::npos);
  CHECK(summary.find("delta = ") != std::string::npos);

  const std::string out2 = (tmp.path / "t").string();
  REQUIRE(run_command("truncated", scenario_path("lorentzian_hole.scn"), out2) == 0);
  CHECK(fs::exists(fs::path(out2) / "truncation.csv"));
  // four horizons from the scenario file -> header plus four rows
  std::istringstream rows(slurp(fs::path(out2) / "truncation.csv"));
  std::string line;
  int n = 0;
  while (std::getline(rows, line))
    if (!line.empty()) ++n;
  CHECK(n == 5);
}

TEST_CASE("minimax command writes the pair and audits it") {
  TempDir tmp("minimax");
  const std::string out = (tmp.path / "m").string();
  REQUIRE(run_command("minimax", scenario_path("minimax_eps0.scn"), out) == 0);
  CHECK(fs::exists(fs::path(out) / "lf_densities.csv"));
  const std::string summary = slurp(fs::path(out) / "summary.txt");
  CHECK(summary.find("converged = yes") != std::string::npos);
  CHECK(summary.find("saddle.passed = yes") != std::string::npos);

  // starved iteration budget must be reported as a numerical failure
  const std::string out2 = (tmp.path / "nc").string();
  CHECK(run_command("minimax", scenario_path("minimax_noconverge.scn"), out2) == 2);
  const std::string s2 = slurp(fs::path(out2) / "summary.txt");
  CHECK(s2.find("exit_code = 2") != std::string::npos);
  CHECK(s2.find("converged = no") != std::string::npos);
}

TEST_CASE("montecarlo honours overrides and reproduces bytes per seed") {
  TempDir tmp("mc");
  RunOverrides ov;
  ov.seed = 123;
  ov.paths = 400;
  ov.dump_paths = true;
  const std::string a = (tmp.path / "a").string();
  const std::string b = (tmp.path / "b").string();
  REQUIRE(run_command("montecarlo", scenario_path("constant.scn"), a, ov) == 0);
  REQUIRE(run_command("montecarlo", scenario_path("constant.scn"), b, ov) == 0);
  const std::string pa = slurp(fs::path(a) / "paths.csv");
  REQUIRE_FALSE(pa.empty());
  CHECK(pa == slurp(fs::path(b) / "paths.csv"));
  CHECK(slurp(fs::path(a) / "summary.txt").find("paths = 400") != std::string::npos);

  RunOverrides ov2 = ov;
  ov2.seed = 124;
  const std::string c = (tmp.path / "c").string();
  REQUIRE(run_command("montecarlo", scenario_path("constant.scn"), c, ov2) == 0);
  CHECK(pa != slurp(fs::path(c) / "paths.csv"));
}

TEST_CASE("oracle-check agrees with the solver end to end") {
  TempDir tmp("oracle");
  const std::string out = (tmp.path / "o").string();
  REQUIRE(run_command("oracle-check", scenario_path("noiseless.scn"), out) == 0);
  CHECK(fs::exists(fs::path(out) / "oracle.csv"));
  const std::string summary = slurp(fs::path(out) / "summary.txt");
  CHECK(summary.find("delta_gap_rel") != std::string::npos);
  CHECK(summary.find("exit_code = 0") != std::string::npos);
}

TEST_CASE("failures map to the documented exit codes") {
  TempDir tmp("codes");

  // validation failure: malformed scenario
  const fs::path bad = tmp.path / "bad.scn";
  std::ofstream(bad) << "[grid]\nstep = -1\n";
  const std::string out1 = (tmp.path / "v").string();
  CHECK(run_command("filter", bad.string(), out1) == 1);
  CHECK(slurp(fs::path(out1) / "summary.txt").find("exit_code = 1") != std::string::npos);

  // validation failure: unknown command
  const std::string out2 = (tmp.path / "u").string();
  CHECK(run_command("explode", scenario_path("constant.scn"), out2) == 1);

  // io failure: scenario file absent
  const std::string out3 = (tmp.path / "io").string();
  CHECK(run_command("filter", (tmp.path / "nope.scn").string(), out3) == 3);

  // io failure: output directory cannot be created (parent is a file)
  const fs::path blocker = tmp.path / "blocker";
  std::ofstream(blocker) << "x";
  CHECK(run_command("filter", scenario_path("constant.scn"),
                    (blocker / "sub").string()) == 3);
}
