#pragma once

// Random diffusion coefficient E(x, t, w) = delta + amp g(x) tanh(zeta(theta_t w)),
// its spectral-Galerkin matrix and fractional powers.

#include "randattract/core.hpp"
#include "randattract/mds.hpp"

#include <functional>
#include <memory>

namespace randattract {

struct DiffusionField {
  double delta = 0.5;
  double amp = 0.2;
  double kappa = 1.0;
  double driver_horizon = 8.0;
  std::function<double(double)> profile = [](double x) { return 1.0 + std::sin(kPi * x); };
  double profile_sup = 2.0;  // sup |g|

  static DiffusionField autonomous(double delta);
  static DiffusionField constant_profile(double delta, double amp);

  /// Throws ConfigError naming the violated constraint.
  void validate() const;
  double ellipticity_floor() const { return delta - amp * profile_sup; }
  double upper_bound() const { return delta + amp * profile_sup; }
};

/// Symmetric Galerkin matrix with its eigendecomposition.
struct GalerkinOperator {
  MatrixXd matrix;
  MatrixXd eigenvectors;
  VectorXd eigenvalues;  // ascending
  double time = 0.0;

  static GalerkinOperator from_matrix(MatrixXd a, double time);
  int dim() const { return static_cast<int>(matrix.rows()); }
};

enum class NormReference { FixedLaplacian, Instantaneous };

struct FractionalNormSpec {
  double alpha = 0.2;
  NormReference reference = NormReference::FixedLaplacian;
};

/// zeta(theta_t w) = int_{-a}^0 e^{kappa s} (theta_t w)(s)[mode 1] ds (trapezoid).
/// Off-grid times interpolate linearly between neighbouring nodes.
double evaluate_driver(const WienerPath& path, double t, const DiffusionField& field);
double driver_at_index(const WienerPath& path, Index k, const DiffusionField& field);

/// Trapezoid weights of the driver functional for one grid step.
class DriverKernel {
 public:
  DriverKernel(const DiffusionField& field, double dt);
  double operator()(const WienerPath& path, Index k) const;
  Index steps() const { return static_cast<Index>(weights_.size()) - 1; }

 private:
  double dt_;
  VectorXd weights_;  // dt * trapezoid weight * e^{-kappa j dt}
};

double evaluate_coefficient(const DiffusionField& field, double x, double t,
                            const WienerPath& path);

/// Grid Hölder seminorm of t -> zeta(theta_t w) on [s, r].
double driver_holder_seminorm(const WienerPath& path, const DiffusionField& field, double gamma,
                              double s, double r);

/// Stiffness matrices of the constant part and of the profile, computed once
/// per (field, M) by composite Gauss-Legendre quadrature. The operator at any
/// time is a linear combination of the two.
class GalerkinAssembler {
 public:
  GalerkinAssembler(const DiffusionField& field, int dim);

  int dim() const { return static_cast<int>(base_.rows()); }
  const DiffusionField& field() const { return field_; }

  /// A_h for a given tanh(zeta) value.
  MatrixXd matrix(double modulation) const;
  GalerkinOperator at(const WienerPath& path, double t) const;

 private:
  DiffusionField field_;
  MatrixXd base_;     // int phi_m' phi_n'
  MatrixXd profile_;  // int g phi_m' phi_n'
};

GalerkinOperator assemble_operator(const DiffusionField& field, double t, const WienerPath& path,
                                   int dim);

struct FixedLaplacian {};

void check_fractional_exponent(double alpha);

VectorXd fractional_apply(const GalerkinOperator& op, double alpha, const VectorXd& vec);
VectorXd fractional_apply(FixedLaplacian, double alpha, const VectorXd& vec);

double fractional_norm(const VectorXd& vec, double alpha);  // FixedLaplacian reference
double fractional_norm(const VectorXd& vec, const FractionalNormSpec& spec,
                       const GalerkinOperator* op = nullptr);

/// Diagonal (n pi)^{2 alpha}, n = 1..dim.
VectorXd fixed_laplacian_weights(int dim, double alpha);

}  // namespace randattract
