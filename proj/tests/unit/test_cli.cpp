#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <ddsplit/error.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "expression.hpp"

namespace fs = std::filesystem;
using namespace ddsolve;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ddsplit_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

int call(std::vector<std::string> args) {
  args.insert(args.begin(), "ddsolve");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return main_entry(static_cast<int>(argv.size()), argv.data());
}

const char* kTwoDomain = R"({
  "kind": "poisson",
  "geometry": {"dim": 1, "length": 1.0, "cuts": [0.5], "nodes": 33},
  "source": 1.0,
  "algorithm": {"gamma": 1, "mu": 10}
})";

}  // namespace

TEST_CASE("config errors name the offending field") {
  try {
    parse_config(R"({"geometry": {"dim": 1, "cuts": [0.5], "nodes": 9}, "source": 1})");
    FAIL("expected ConfigError");
  } catch (const ddsplit::ConfigError& e) {
    CHECK(std::string(e.what()).find("kind") != std::string::npos);
  }
  try {
    parse_config(R"({"kind": "poisson", "geometry": {"dim": 1, "cuts": [0.5], "nodes": 9},
                     "source": 1, "algorithm": {"gama": 1}})");
    FAIL("expected ConfigError");
  } catch (const ddsplit::ConfigError& e) {
    CHECK(std::string(e.what()).find("/algorithm/gama") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("{\"kind\": "), ddsplit::ConfigError);
}

TEST_CASE("expression fields") {
  const Expression e("2*x^2 - sin(y) + exp(0)*3/2");
  CHECK(e(1.5, 0.0) == doctest::Approx(2 * 2.25 + 1.5));
  CHECK(Expression("-x^2")(3.0, 0.0) == doctest::Approx(-9.0));
  CHECK(Expression("2^3^2")(0.0, 0.0) == doctest::Approx(512.0));
  CHECK_THROWS(Expression("x +"));
  CHECK_THROWS(Expression("foo(x)"));
}

TEST_CASE("run exit codes") {
  const fs::path dir = scratch("run");
  const fs::path cfg = write(dir, kTwoDomain);
  const std::string out = (dir / "out").string();
  CHECK(call({"run", cfg.string(), "--out", out}) == 0);
  CHECK(fs::exists(dir / "out" / "trace.csv"));
  CHECK(fs::exists(dir / "out" / "solution.csv"));
  CHECK(fs::exists(dir / "out" / "duals_1_2.csv"));
  CHECK(fs::exists(dir / "out" / "summary.json"));
  std::ifstream trace(dir / "out" / "trace.csv");
  std::string header;
  std::getline(trace, header);
  CHECK(header == "n,residual,branch,theta,dist0,chi,rho");

  CHECK(call({"run", cfg.string(), "--out", out, "--max-iters", "1"}) == 2);
  const fs::path bad = write(scratch("bad"), R"({"geometry": {"dim": 1}})");
  CHECK(call({"run", bad.string()}) == 1);
  CHECK(call({"run", (dir / "missing.json").string()}) == 1);
  CHECK(call({"frobnicate"}) == 1);
}

TEST_CASE("verify and describe") {
  const fs::path dir = scratch("verify");
  const fs::path cfg = write(dir, kTwoDomain);
  std::ostringstream out;
  CommandOptions opt;
  opt.out_dir = (dir / "out").string();
  CHECK(verify_command(cfg, opt, out) == 0);
  CHECK(out.str().find("energy discrepancy") != std::string::npos);

  std::ostringstream d;
  CHECK(describe_command(cfg, d) == 0);
  CHECK(d.str().find("x=0.5") != std::string::npos);

  const fs::path strips = write(scratch("strips"), R"({
    "kind": "poisson",
    "geometry": {"dim": 2, "width": 1.0, "height": 1.0, "cuts": [0.3, 0.6], "nx": [3, 3, 4], "ny": 6},
    "source": 1.0
  })");
  std::ostringstream s;
  CHECK(describe_command(strips, s) == 0);
  CHECK(s.str().find("K={(1,2),(2,3)}") != std::string::npos);

  const fs::path broken = write(scratch("broken"), R"({
    "kind": "poisson",
    "geometry": {"dim": 1, "length": 1.0, "cuts": [0.7, 0.3], "nodes": 30},
    "source": 1.0
  })");
  CHECK(call({"describe", broken.string()}) == 1);
}

TEST_CASE("identical configs give identical traces") {
  const RunConfig c = parse_config(kTwoDomain);
  RunConfig capped = c;
  capped.params.max_iters = 50;
  capped.params.mu = 1.0;
  const SolveOutcome a = solve(capped);
  const SolveOutcome b = solve(capped);
  CHECK(a.trace_csv == b.trace_csv);
  capped.params.threads = 4;
  CHECK(solve(capped).trace_csv == a.trace_csv);
}
