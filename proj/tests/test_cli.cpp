#include "emscat/cli.hpp"
#include "emscat/config.hpp"

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace emscat;
namespace fs = std::filesystem;

namespace {

fs::path scratch_root() { return fs::temp_directory_path() / ("emscat_cli_" + std::to_string(::getpid())); }

struct Cleanup {
  ~Cleanup() { fs::remove_all(scratch_root()); }
} cleanup;

fs::path scratch(const std::string& name) {
  const fs::path p = scratch_root() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + EMSCAT_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST_CASE("config round trip") {
  RunConfig c;
  c.field.family = "gaussian";
  c.field.width = 1.7;
  c.lines.speeds = {8, 0.1 + 0.2};
  c.ladder = {10, 30, 90};
  c.tolerances.rtol = 3e-11;
  c.invert.mode = "b";
  c.small_angle.offsets = {2.5};
  c.seed = 42;
  const std::string text = serialize_config(c);
  const RunConfig r = parse_config(text);
  CHECK(serialize_config(r) == text);
  CHECK(r.lines.speeds[1] == 0.1 + 0.2);
  CHECK(r.field.family == "gaussian");
  CHECK(r.seed == 42);
  // missing keys keep their defaults
  const RunConfig d = parse_config(R"({"ladder": [8, 16, 32]})");
  CHECK(d.ladder == std::vector<double>{8, 16, 32});
  CHECK(d.grid.N == RunConfig{}.grid.N);
}

TEST_CASE("config rejects bad input") {
  CHECK_THROWS_AS(parse_config(R"({"ladderr": [1, 2, 4]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"field": {"famly": "zero"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"tolerances": {"rtol": -1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"field": {"family": "dipole"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"grid": {"N": "many"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/emscat.json"), ConfigError);
}

TEST_CASE("config hash") {
  RunConfig a;
  const std::string h = config_hash(a);
  CHECK(h.size() == 16);
  CHECK(config_hash(RunConfig{}) == h);
  RunConfig b = a;
  b.threads = 7;
  b.out = "elsewhere";
  CHECK(config_hash(b) == h);
  b.seed = 2;
  CHECK(config_hash(b) != h);
  RunConfig c = a;
  c.ladder = {16, 32, 64, 128};
  CHECK(config_hash(c) != h);
}

TEST_CASE("make_field") {
  FieldSpec s;
  s.family = "zero";
  s.dimension = 3;
  CHECK(make_field(s)->dimension() == 3);
  s = FieldSpec{};
  s.scale = 0.5;
  const FieldPtr f = make_field(s);
  CHECK(f->potential(Vec::Zero()) == doctest::Approx(0.5));
  CHECK(f->magnetic(Vec::Zero())(0, 1) == doctest::Approx(0.5));
  s.family = "potential3d";
  CHECK(make_field(s)->dimension() == 3);
}

TEST_CASE("in-process unknown command") {
  std::ostringstream log, err;
  RunConfig c;
  c.out = scratch("unknown").string();
  CHECK(run_command("frobnicate", c, log, err) == 2);
  CHECK_FALSE(err.str().empty());
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("") == 2);
  CHECK(cli("simulate --threads -1") == 2);
  CHECK(cli("simulate --config /nonexistent.json") == 2);

  write(dir / "bad.json", R"({"bogus": 1})");
  CHECK(cli("simulate --config " + (dir / "bad.json").string() + " --out " + dir.string()) == 2);

  write(dir / "ladder.json", R"({"ladder": [16, 32], "invert": {"angles": 8, "offsets": 8}})");
  CHECK(cli("invert --config " + (dir / "ladder.json").string() + " --out " + dir.string()) == 2);
}

TEST_CASE("simulate on the zero field writes zeros") {
  const fs::path dir = scratch("zero");
  write(dir / "zero.json", R"({"field": {"family": "zero"}, "lines": {"angles": 4, "offsets": 3, "speeds": [8, 16]}})");
  REQUIRE(cli("simulate --config " + (dir / "zero.json").string() + " --out " + dir.string()) == 0);
  std::ifstream in(dir / "scattering.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# config_hash=", 0) == 0);
  std::getline(in, line);  // column names
  std::stringstream header(line);
  std::vector<std::string> cols;
  for (std::string c; std::getline(header, c, ',');) cols.push_back(c);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string v;
    for (const std::string& c : cols) {
      std::getline(ss, v, ',');
      if (c.rfind("a_", 0) == 0 || c.rfind("b_", 0) == 0) CHECK(std::abs(std::stod(v)) <= 1e-14);
    }
  }
  CHECK(rows == 4 * 3 * 2);
}

TEST_CASE("determinism and config hash headers") {
  const fs::path one = scratch("det1"), three = scratch("det3");
  const fs::path cfg = one / "cfg.json";
  write(cfg, R"({"lines": {"angles": 4, "offsets": 3, "speeds": [16]}, "seed": 7})");
  const RunConfig parsed = load_config(cfg.string());
  const std::string hash = config_hash(parsed);
  for (const std::string cmd : {"simulate", "asymptotics", "bounds"}) {
    REQUIRE(cli(cmd + " --config " + cfg.string() + " --threads 1 --out " + one.string()) == 0);
    REQUIRE(cli(cmd + " --config " + cfg.string() + " --threads 3 --out " + three.string()) == 0);
  }
  int files = 0;
  for (const auto& e : fs::directory_iterator(one)) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    const std::string a = slurp(e.path()), b = slurp(three / e.path().filename());
    CHECK_MESSAGE(a == b, e.path().filename().string());
    CHECK(a.rfind("# config_hash=" + hash + " seed=7", 0) == 0);
  }
  CHECK(files >= 5);
}

TEST_CASE("verify-small-angle") {
  const fs::path dir = scratch("small");
  CHECK(cli("verify-small-angle --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "small_angle.csv"));
  write(dir / "low.json", R"({"small_angle": {"speeds": [32], "offsets": [1]}})");
  CHECK(cli("verify-small-angle --config " + (dir / "low.json").string() + " --out " + dir.string()) == 4);
}
