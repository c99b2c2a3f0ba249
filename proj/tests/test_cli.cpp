#include <doctest.h>

#include "config.hpp"
#include "runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace randattract;
using namespace randattract::cli;
namespace fs = std::filesystem;

TEST_CASE("defaults validate") {
  const RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.hash().size() == 16);
  CHECK(cfg.semilinear().u0(0) == 1.0);
}

TEST_CASE("parsing sections and comments") {
  const RunConfig cfg = parse_config(
      "# run\n[noise]\nsigma = 0.2   ; louder\ndt = 0.0078125\n\n[field]\nM = 32\n[problem]\nnonlinearity = pure_cubic\n"
      "forcing = 1:0.5, 3:-1\n[experiment]\nhorizons = 1, 2\n");
  CHECK(cfg.noise.sigma == 0.2);
  CHECK(cfg.noise.dt == 1.0 / 128);
  CHECK(cfg.field.dim == 32);
  CHECK(cfg.problem.nonlinearity == "pure_cubic");
  CHECK(cfg.experiment.horizons == std::vector<double>{1.0, 2.0});
  const VectorXd f = cfg.semilinear().forcing;
  CHECK(f.size() == 32);
  CHECK(f(0) == 0.5);
  CHECK(f(2) == -1.0);
}

TEST_CASE("ellipticity violation names the constraint") {
  CHECK_THROWS_WITH_AS(parse_config("[field]\ndelta = 0.5\namp = 0.5\n").validate(), doctest::Contains("ellipticity"),
                       ConfigError);
}

TEST_CASE("parameter ranges") {
  CHECK_THROWS_WITH_AS(parse_config("[field]\nalpha = 0.25\n").validate(), doctest::Contains("alpha"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[field]\neta = 0.9\n").validate(), doctest::Contains("eta"), ConfigError);
  CHECK_THROWS_AS(parse_config("[field]\nbeta = 0.5\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config("[noise]\ndecay = 0.5\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config("[noise]\ndt = 0.3\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config("[field]\nreference_norm = instantaneous\n").validate(), ConfigError);
}

TEST_CASE("unknown keys and malformed lines") {
  CHECK_THROWS_WITH_AS(parse_config("[noise]\nsigma = 0.1\nsigmaa = 0.2\n"), doctest::Contains("line 3"), ConfigError);
  CHECK_THROWS_AS(parse_config("[noise]\nsigma\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[noise]\nsigma = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_modes("0:1", 4, "problem.u0"), ConfigError);
  CHECK_THROWS_AS(parse_modes("5:1", 4, "problem.u0"), ConfigError);
  CHECK(parse_modes("0", 4, "problem.forcing").isZero(0.0));
}

TEST_CASE("hash follows content, not layout") {
  const RunConfig a = parse_config("[noise]\nsigma = 0.2\n");
  const RunConfig b = parse_config("# comment\n[noise]\n  sigma   =   0.2  \n");
  const RunConfig c = parse_config("[noise]\nsigma = 0.3\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("randattract_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("failed runs leave only the log") {
  const fs::path dir = scratch("fail");
  fs::create_directories(dir);
  const fs::path ini = dir / "bad.ini";
  std::ofstream(ini) << "[field]\namp = 0.6\n";
  std::ostringstream err;
  RunOptions o;
  o.subcommand = "simulate";
  o.config_path = ini.string();
  o.out_dir = (dir / "out").string();
  CHECK(run(o, err) == kValidation);
  CHECK(err.str().find("ellipticity") != std::string::npos);

  o.config_path.clear();
  o.subcommand = "convergence";
  o.levels = 9;
  CHECK(run(o, err) == kValidation);
  CHECK(fs::exists(dir / "out" / "run.log"));
  CHECK_FALSE(fs::exists(dir / "out" / "summary.json"));
  CHECK_FALSE(fs::exists(dir / "out" / "manifest.json"));
  fs::remove_all(dir);
}

TEST_CASE("simulate writes hashed outputs and a manifest") {
  const fs::path dir = scratch("sim");
  fs::create_directories(dir);
  std::ofstream(dir / "run.ini") << "[noise]\npaths = 2\ndt = 0.015625\n[field]\nM = 8\n[experiment]\nhorizon = 0.5\n";
  RunOptions o;
  o.subcommand = "simulate";
  o.config_path = (dir / "run.ini").string();
  o.out_dir = (dir / "out").string();
  o.seed = 99;
  std::ostringstream err;
  REQUIRE(run(o, err) == kSuccess);
  for (const char* f : {"trajectory_0.csv", "trajectory_1.csv", "ensemble.csv", "summary.json", "manifest.json"})
    CHECK(fs::exists(dir / "out" / f));
  std::ifstream csv(dir / "out" / "ensemble.csv");
  std::string first;
  std::getline(csv, first);
  CHECK(first.rfind("# config_hash=", 0) == 0);
  std::ifstream man(dir / "out" / "manifest.json");
  const std::string text((std::istreambuf_iterator<char>(man)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"seeds\"") != std::string::npos);
  CHECK(text.find("99") != std::string::npos);
  CHECK(text.find("100") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("unknown subcommand") {
  std::ostringstream err;
  RunOptions o;
  o.subcommand = "nope";
  CHECK(run(o, err) == kValidation);
}
