#pragma once

// Run configuration: flat key = value text with [section] headers.

#include "randattract/pathwise.hpp"
#include "randattract/studies.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace randattract::cli {

struct NoiseBlock {
  int modes = 64;
  double decay = 1.0;
  double sigma = 0.1;
  double dt = 1.0 / 256.0;
  std::uint64_t seed = 20240601;
  int paths = 4;
};

struct FieldBlock {
  double delta = 0.5;
  double amp = 0.2;
  double kappa = 1.0;
  double a_drv = 8.0;
  int dim = 64;
  double alpha = 0.2;
  double eta = 0.35;
  double beta = 0.2;
  std::string reference_norm = "fixed_laplacian";
};

struct ProblemBlock {
  std::string nonlinearity = "cubic_fisher";
  std::string forcing = "0";  // "n:value,n:value" mode coefficients, or 0
  std::string u0 = "1:1";
  double blowup_threshold = 1e6;
};

struct ExperimentBlock {
  double horizon = 1.0;
  double a = 8.0;
  std::vector<double> horizons{1.0, 2.0, 4.0, 8.0};
  std::vector<double> gammas{0.1};
  std::vector<double> stationarity_t{1.0, 2.0, 4.0};
  std::vector<double> stationarity_s{1.0, 2.0, 4.0};
  double temper_horizon = 100.0;
  int ladder_points = 24;
  int levels = 4;
  int reference_level = 10;
  int ensemble_size = 33;
  double ball_radius = 2.0;
  std::string scale = "light";
};

struct RunConfig {
  NoiseBlock noise;
  FieldBlock field;
  ProblemBlock problem;
  ExperimentBlock experiment;

  /// Re-validates every parameter constraint; throws ConfigError naming it.
  void validate() const;

  NoiseSpectrum spectrum() const;
  DiffusionField diffusion() const;
  NonlinearitySpec nonlinearity() const;
  SemilinearProblem semilinear() const;
  StudySetup setup(int threads) const;

  /// Canonical key = value listing; the hash is taken over it.
  std::string canonical() const;
  std::string hash() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// "n:value,n:value" into a dim-vector; "0" or empty gives zero.
VectorXd parse_modes(const std::string& text, int dim, const std::string& key);

std::uint64_t fnv1a(const std::string& text);

}  // namespace randattract::cli
