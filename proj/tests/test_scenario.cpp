#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <map>
#include <filesystem>
#include <fstream>
#include <string>

#include "chp/scenario.hpp"

using namespace chp;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("chp_scen_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    const std::string p = (path / name).string();
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
  }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int cli(const TempDir& dir, const std::string& args, std::string* out = nullptr,
        std::string* err = nullptr) {
  const std::string out_path = dir.sub("cli_stdout.txt");
  const std::string err_path = dir.sub("cli_stderr.txt");
  const std::string cmd =
      std::string(CHP_CLI_BIN) + " " + args + " >" + out_path + " 2>" + err_path;
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  if (out) *out = slurp(out_path);
  if (err) *err = slurp(err_path);
  return WEXITSTATUS(status);
}

// All regular files under a run directory, as relative-path -> content.
std::map<std::string, std::string> dir_bytes(const std::string& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    files[fs::relative(entry.path(), root).string()] = slurp(entry.path().string());
  }
  return files;
}

const char* kEllipticQuick = R"(# quick hull escape at low resolution
[scenario]
kind = counterexample-elliptic
expect = fail

[mesh]
cells = 64
)";

}  // namespace

TEST_CASE("config files parse into scenario settings") {
  TempDir dir;
  const std::string path = dir.file("full.ini", R"(
[scenario]
kind = parabolic          # trailing comment
expect = pass
tolerance = 1e-5
include_zero = true

[mesh]
a = 0.0
b = 2.0
cells = 48

[coefficients]
preset = p-laplace
p = 1.5
epsilon = 1e-8
c = 0.25
b_scale = 0.1
components = 2

[time]
t_final = 0.4
dt = 0.02

[data]
initial = sine
boundary = zero

[output]
dir = some/dir
)");
  const ScenarioConfig cfg = load_config(path);
  CHECK(cfg.kind == "parabolic");
  CHECK(cfg.expect == "pass");
  CHECK(cfg.tolerance == 1e-5);
  CHECK(cfg.include_zero);
  CHECK(cfg.mesh_1d);
  CHECK_FALSE(cfg.mesh_2d);
  CHECK(cfg.b == 2.0);
  CHECK(cfg.cells == 48);
  CHECK(cfg.preset == "p-laplace");
  CHECK(cfg.p == 1.5);
  CHECK(cfg.epsilon == 1e-8);
  CHECK(cfg.c == 0.25);
  CHECK(cfg.b_scale == 0.1);
  CHECK(cfg.components == 2);
  CHECK(cfg.t_final == 0.4);
  CHECK(cfg.dt == 0.02);
  CHECK(cfg.initial == "sine");
  CHECK(cfg.boundary == "zero");
  CHECK(cfg.out_dir == "some/dir");
}

TEST_CASE("config parse errors name the file and line") {
  TempDir dir;
  auto expect_error = [&](const std::string& body, int line, const std::string& msg) {
    const std::string path = dir.file("bad.ini", body);
    try {
      load_config(path);
      FAIL("expected a config error for: " << msg);
    } catch (const ConfigError& e) {
      CHECK(e.line == line);
      CHECK(std::string(e.what()) == path + ":" + std::to_string(line) + ": " + msg);
    }
  };

  expect_error("[nope]\n", 1, "unknown section 'nope'");
  expect_error("[scenario]\nkind\n", 2, "expected key = value");
  expect_error("[scenario]\nkind =\n", 2, "empty value for kind");
  expect_error("kind = elliptic\n", 1, "key outside any section");
  expect_error("[scenario]\nbogus = 1\n", 2, "unknown key 'scenario.bogus'");
  expect_error("[scenario]\nkind = strange\n", 2, "bad value 'strange' for scenario.kind");
  expect_error("[mesh]\ncells = abc\n", 2, "bad value 'abc' for mesh.cells");
  expect_error("[mesh]\na = 0\nx0 = 0\n", 3, "mixing 1D and 2D mesh keys");
  expect_error("[scenario]\nexpect = pass\n", 2, "scenario.kind is required");
  expect_error("[scenario\nkind = elliptic\n", 1, "unterminated section header");
}

TEST_CASE("run exits by verdict match and writes the report") {
  TempDir dir;
  const std::string cfg = dir.file("quick.ini", kEllipticQuick);
  const std::string out = dir.sub("out_a");

  std::string stdout_text;
  CHECK(cli(dir, "run --config " + cfg + " --out " + out, &stdout_text) == 0);
  CHECK(stdout_text.find("\"verdict\": \"FAIL\"") != std::string::npos);
  CHECK(fs::exists(out + "/solution.csv"));
  CHECK(fs::exists(out + "/hull.csv"));
  CHECK(slurp(out + "/report.json") == stdout_text);

  // same scenario, demanding a pass: the verdict mismatch flips the code
  const std::string cfg2 = dir.file("quick2.ini", std::string(kEllipticQuick).replace(
                                                      std::string(kEllipticQuick).find("fail"), 4,
                                                      "pass"));
  CHECK(cli(dir, "run --config " + cfg2 + " --out " + dir.sub("out_b")) == 1);
}

TEST_CASE("bad input reaches the user as exit code 2") {
  TempDir dir;
  std::string err;
  CHECK(cli(dir, "run --config " + dir.sub("missing.ini"), nullptr, &err) == 2);
  CHECK(err.find("error: cannot open") != std::string::npos);

  const std::string bad = dir.file("broken.ini", "[scenario]\nkind = elliptic\nbogus = 1\n");
  CHECK(cli(dir, "run --config " + bad, nullptr, &err) == 2);
  CHECK(err.find(":3: unknown key 'scenario.bogus'") != std::string::npos);

  CHECK(cli(dir, "run --no-such-flag", nullptr, &err) == 2);
  CHECK(cli(dir, "", nullptr, &err) == 2);  // a subcommand is required

  const std::string junk = dir.file("junk.csv", "x,u_1\n0,huh\n");
  CHECK(cli(dir, "verify --field " + junk, nullptr, &err) == 2);
  CHECK(err.find("junk.csv:2:") != std::string::npos);
}

TEST_CASE("verify reproduces a dumped verdict byte for byte") {
  TempDir dir;
  const std::string cfg = dir.file("quick.ini", kEllipticQuick);
  const std::string out = dir.sub("out");
  std::string run_json;
  REQUIRE(cli(dir, "run --config " + cfg + " --out " + out, &run_json) == 0);

  std::string verify_json;
  CHECK(cli(dir, "verify --field " + out + "/solution.csv --expect fail", &verify_json) == 0);
  CHECK(verify_json == run_json);

  // the stored hull gives the same answer as the recomputed one
  std::string with_hull;
  CHECK(cli(dir,
            "verify --field " + out + "/solution.csv --hull " + out + "/hull.csv --expect fail",
            &with_hull) == 0);
  CHECK(with_hull == run_json);

  // a huge tolerance flips the verdict, and the expectation tracks it
  CHECK(cli(dir, "verify --field " + out + "/solution.csv --tolerance 10 --expect pass") == 0);
  CHECK(cli(dir, "verify --field " + out + "/solution.csv --expect pass") == 1);
}

TEST_CASE("parabolic runs dump a re-checkable trajectory") {
  TempDir dir;
  const std::string cfg = dir.file("par.ini", R"(
[scenario]
kind = counterexample-parabolic
expect = fail

[mesh]
cells = 32

[time]
t_final = 0.3
dt = 0.01
)");
  const std::string out = dir.sub("out");
  std::string run_json;
  REQUIRE(cli(dir, "run --config " + cfg + " --out " + out, &run_json) == 0);
  CHECK(fs::exists(out + "/trajectory/times.csv"));
  CHECK(fs::exists(out + "/eta.csv"));

  std::string verify_json;
  CHECK(cli(dir, "verify --trajectory " + out + "/trajectory/times.csv --expect fail",
            &verify_json) == 0);
  CHECK(verify_json == run_json);
}

TEST_CASE("reruns write identical bytes") {
  TempDir dir;
  const std::string e_cfg = dir.file("e.ini", R"(
[scenario]
kind = elliptic
expect = pass

[mesh]
x0 = 0
x1 = 1
y0 = 0
y1 = 1
cells_x = 12
cells_y = 12

[coefficients]
preset = smooth-spd
components = 2

[data]
boundary = harmonic-pair
)");
  const std::string p_cfg = dir.file("p.ini", R"(
[scenario]
kind = parabolic
expect = pass

[mesh]
a = 0
b = 1
cells = 24

[coefficients]
preset = p-laplace
p = 3
components = 2

[time]
t_final = 0.1
dt = 0.01

[data]
initial = sine
boundary = zero
)");
  for (const std::string& cfg : {e_cfg, p_cfg}) {
    const std::string out1 = dir.sub("rerun_1");
    const std::string out2 = dir.sub("rerun_2");
    REQUIRE(cli(dir, "run --config " + cfg + " --out " + out1) == 0);
    REQUIRE(cli(dir, "run --config " + cfg + " --out " + out2) == 0);
    const auto files1 = dir_bytes(out1);
    const auto files2 = dir_bytes(out2);
    REQUIRE(!files1.empty());
    REQUIRE(files1.size() == files2.size());
    for (const auto& [name, bytes] : files1) {
      REQUIRE(files2.count(name) == 1);
      CHECK(bytes == files2.at(name));
    }
    fs::remove_all(out1);
    fs::remove_all(out2);
  }
}

TEST_CASE("convergence sweeps write the study table") {
  TempDir dir;
  const std::string cfg = dir.file("conv.ini", R"(
[scenario]
kind = counterexample-elliptic

[convergence]
study = spatial
cells = 16,32
)");
  const std::string out = dir.sub("conv_out");
  std::string table;
  CHECK(cli(dir, "convergence --config " + cfg + " --out " + out, &table) == 0);
  CHECK(table.find("h_or_dt") != std::string::npos);

  const std::string csv = slurp(out + "/convergence.csv");
  REQUIRE(csv.rfind("h_or_dt,error,eoc\n", 0) == 0);
  // two data rows; the first has no EOC yet
  const size_t l1 = csv.find('\n') + 1;
  const size_t l2 = csv.find('\n', l1) + 1;
  const std::string row1 = csv.substr(l1, l2 - l1 - 1);
  const std::string row2 = csv.substr(l2, csv.find('\n', l2) - l2);
  CHECK(row1.back() == ',');
  const double eoc = std::strtod(row2.substr(row2.rfind(',') + 1).c_str(), nullptr);
  CHECK(eoc > 1.5);
  CHECK(eoc < 2.5);
}

TEST_CASE("verify options are validated in process") {
  VerifyOptions both;
  both.field_csv = "a.csv";
  both.trajectory_csv = "b.csv";
  CHECK_THROWS_WITH_AS(run_verify(both),
                       "exactly one of a field CSV or a trajectory index is required",
                       std::runtime_error);
  VerifyOptions bad;
  bad.field_csv = "a.csv";
  bad.expect = "maybe";
  CHECK_THROWS_WITH_AS(run_verify(bad), "expect must be 'pass' or 'fail'", std::runtime_error);

  ScenarioConfig cfg;
  cfg.kind = "mystery";
  CHECK_THROWS_WITH_AS(run_scenario(cfg, {}), "unknown scenario kind 'mystery'",
                       std::runtime_error);
}
