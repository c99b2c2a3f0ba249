// Acceptance runner: one line per criterion, nonzero exit if any fails.

#include "randattract/parallel.hpp"
#include "randattract/studies.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

using namespace randattract;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool report(int id, const char* title, const std::vector<Check>& checks) {
  bool ok = !checks.empty();
  std::string worst;
  for (const auto& c : checks) {
    ok = ok && c.passed;
    if (!c.passed) worst += " " + c.name;
  }
  std::printf("[%s] criterion %d: %s (%zu checks)%s%s\n", ok ? "PASS" : "FAIL", id, title, checks.size(),
              worst.empty() ? "" : " failing:", worst.c_str());
  for (const auto& c : checks) std::printf("         %-14s %-44s value=%.6g\n", c.suite.c_str(), c.name.c_str(), c.value);
  std::fflush(stdout);
  return ok;
}

bool determinism() {
  const fs::path base = fs::temp_directory_path() / "randattract_acceptance";
  fs::remove_all(base);
  std::string reports[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path out = base / ("run" + std::to_string(i));
    const std::string cmd = std::string("\"") + RANDATTRACT_CLI + "\" verify --out \"" + out.string() +
                            "\" --threads " + std::to_string(i + 1) + " 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      std::printf("[FAIL] criterion 10: verify run %d exited nonzero\n", i);
      return false;
    }
    reports[i] = slurp(out / "report.json");
  }
  const bool ok = !reports[0].empty() && reports[0] == reports[1];
  std::printf("[%s] criterion 10: repeated verify reports bitwise identical (%zu bytes)\n", ok ? "PASS" : "FAIL",
              reports[0].size());
  fs::remove_all(base);
  return ok;
}

}  // namespace

int main() {
  StudySetup setup;
  setup.threads = default_threads();
  const StudyScale scale = StudyScale::full();

  struct Item {
    int id;
    const char* title;
    std::vector<Check> (*study)(const StudySetup&, const StudyScale&);
  };
  const Item items[] = {
      {1, "evolution family identities", study_evolution},
      {2, "exponential stability and smoothing", study_stability},
      {3, "linear weak consistency", study_weak},
      {4, "strong self-convergence", study_strong},
      {5, "stationarity of the OU process", study_stationarity},
      {6, "temperedness", study_temperedness},
      {7, "transform consistency", study_transform},
      {8, "energy and absorbing structure", study_energy},
      {9, "pullback attractor", study_pullback},
  };

  int failed = 0;
  for (const auto& item : items) {
    try {
      if (!report(item.id, item.title, item.study(setup, scale))) ++failed;
    } catch (const std::exception& e) {
      std::printf("[FAIL] criterion %d: %s threw: %s\n", item.id, item.title, e.what());
      ++failed;
    }
  }
  if (!determinism()) ++failed;
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
