#pragma once

// Verification studies shared by the CLI and the test suites. Every study
// returns named checks with the measured value and the limit it is held to.

#include "randattract/attractor.hpp"
#include "randattract/core.hpp"
#include "randattract/mds.hpp"
#include "randattract/operators.hpp"
#include "randattract/pathwise.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace randattract {

enum class Relation { AtMost, AtLeast, Within };

struct Check {
  std::string suite;
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  double upper = 0.0;  // Within only: value in [limit, upper]
  Relation relation = Relation::AtMost;
  bool passed = false;

  /// Signed slack; positive when the check passes.
  double margin() const;
};

Check at_most(std::string suite, std::string name, double value, double limit);
Check at_least(std::string suite, std::string name, double value, double limit);
Check within(std::string suite, std::string name, double value, double lo, double hi);

/// Base parameters of every study.
struct StudySetup {
  NoiseSpectrum spectrum{64, 1.0};
  DiffusionField field;
  int dim = 64;
  double dt = 1.0 / 256.0;
  double sigma = 0.1;
  double a = 8.0;
  double alpha = 0.2;
  double beta = 0.2;
  double eta = 0.35;
  std::uint64_t seed = 20240601;
  int threads = 1;
};

/// Sizes of the Monte Carlo and refinement studies.
struct StudyScale {
  int cocycle_pairs = 20;
  int decay_pairs = 50;
  int weak_paths = 4096;
  int weak_dim = 16;
  int strong_paths = 64;
  int strong_levels = 4;      // dt = 2^-4 .. 2^-(3 + levels)
  int strong_reference = 10;  // dt = 2^-10
  int temper_paths = 32;
  int temper_dim = 32;
  double temper_horizon = 100.0;
  int transform_levels = 3;
  int energy_runs = 8;
  double energy_horizon = 4.0;
  int ensemble_size = 33;
  double ball_radius = 2.0;

  static StudyScale full();
  static StudyScale light();
};

std::vector<Check> study_evolution(const StudySetup& setup, const StudyScale& scale);
std::vector<Check> study_stability(const StudySetup& setup, const StudyScale& scale);
std::vector<Check> study_weak(const StudySetup& setup, const StudyScale& scale);
std::vector<Check> study_strong(const StudySetup& setup, const StudyScale& scale);
std::vector<Check> study_stationarity(const StudySetup& setup, const StudyScale& scale);
std::vector<Check> study_temperedness(const StudySetup& setup, const StudyScale& scale);
std::vector<Check> study_transform(const StudySetup& setup, const StudyScale& scale);
std::vector<Check> study_energy(const StudySetup& setup, const StudyScale& scale);
std::vector<Check> study_pullback(const StudySetup& setup, const StudyScale& scale);

std::vector<Check> run_all_studies(const StudySetup& setup, const StudyScale& scale);

// ---------------------------------------------------------------------------

struct ConvergenceResult {
  std::vector<double> dts;
  std::vector<double> errors;  // root-mean-square over paths at the final time
  double order = 0.0;          // log2 regression slope
  int reference_level = 10;
};

/// Strong self-convergence at dt = 2^-4 .. 2^-(3 + levels) against a
/// 2^-reference solution on the same paths over [0, horizon]. Every problem
/// is run on the same paths and chains.
std::vector<ConvergenceResult> strong_convergence(const StudySetup& setup,
                                                  const std::vector<SemilinearProblem>& problems,
                                                  int levels, int reference_level, int paths,
                                                  double horizon = 1.0);

/// Sampled path wide enough for a window [t_lo, t_hi] plus the driver history.
WienerPath study_path(const StudySetup& setup, double t_lo, double t_hi, std::uint64_t seed,
                      double dt = 0.0);

SemilinearProblem make_problem(const StudySetup& setup, const NonlinearitySpec& nonlinearity,
                               double sigma, const VectorXd& u0);

double median(std::vector<double> values);

}  // namespace randattract
