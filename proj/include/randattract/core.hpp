#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace randattract {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = VectorX<double>;
using MatrixXd = MatrixX<double>;

using Index = std::int64_t;

inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy. Each maps onto one CLI exit code (see runner.hpp).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct ShiftRangeError : Error {
  using Error::Error;
};
struct AlignmentError : Error {
  using Error::Error;
};
struct OrderingError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
struct DefinitenessError : Error {
  using Error::Error;
};

/// Converts a time to a grid index, rejecting anything more than a tiny
/// relative distance away from a node.
inline Index grid_index(double t, double dt) {
  const double x = t / dt;
  const double k = std::round(x);
  if (std::abs(x - k) > 1e-8 * std::max(1.0, std::abs(x)))
    throw AlignmentError("time " + std::to_string(t) + " is not on the grid with step " +
                         std::to_string(dt));
  return static_cast<Index>(k);
}

/// Uniform grid t_k = t0 + k dt, k = 0..steps. t0 is itself a multiple of dt
/// so that every grid shares nodes with the path grid.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 1.0 / 256.0;
  Index steps = 0;

  static TimeGrid span(double t_begin, double t_end, double dt) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (t_end < t_begin) throw OrderingError("grid end precedes grid start");
    const Index k0 = grid_index(t_begin, dt);
    const Index k1 = grid_index(t_end, dt);
    return TimeGrid{static_cast<double>(k0) * dt, dt, k1 - k0};
  }

  Index first_index() const { return grid_index(t0, dt); }
  Index last_index() const { return first_index() + steps; }
  double time(Index k) const { return t0 + static_cast<double>(k) * dt; }
  double t_end() const { return time(steps); }

  // Local position of time t on this grid (0..steps).
  Index local(double t) const {
    const Index k = grid_index(t, dt) - first_index();
    if (k < 0 || k > steps) throw AlignmentError("time " + std::to_string(t) + " outside grid");
    return k;
  }
};

// ---------------------------------------------------------------------------
// Scalar spectral weights for a frozen symmetric step, evaluated at z = h*lambda
// (lambda <= 0).

template <typename Scalar>
Scalar exp_weight(Scalar z) {
  using std::exp;
  return exp(z);
}

/// phi_1(z) = (e^z - 1)/z, the weight of a constant forcing over one step.
template <typename Scalar>
Scalar phi1_weight(Scalar z) {
  using std::abs;
  using std::expm1;
  if (abs(z) < Scalar(1e-8)) return Scalar(1) + z / Scalar(2);
  return expm1(z) / z;
}

/// sqrt((1 - e^{2z}) / (-2z)): noise weight that reproduces the exact
/// one-step variance of the frozen Ornstein-Uhlenbeck integral.
template <typename Scalar>
Scalar variance_weight(Scalar z) {
  using std::abs;
  using std::expm1;
  using std::sqrt;
  if (abs(z) < Scalar(1e-8)) return Scalar(1) + z / Scalar(2);
  return sqrt(expm1(Scalar(2) * z) / (Scalar(2) * z));
}

/// Q diag(weights) Q^T v without forming the matrix.
template <typename Scalar>
VectorX<Scalar> spectral_apply(const MatrixX<Scalar>& q, const VectorX<Scalar>& weights,
                               const VectorX<Scalar>& v) {
  VectorX<Scalar> w = q.transpose() * v;
  w.array() *= weights.array();
  return q * w;
}

template <typename Scalar>
MatrixX<Scalar> spectral_matrix(const MatrixX<Scalar>& q, const VectorX<Scalar>& weights) {
  return q * weights.asDiagonal() * q.transpose();
}

/// Gauss-Legendre rule on [-1, 1] via the Golub-Welsch eigenproblem.
template <typename Scalar>
std::pair<VectorX<Scalar>, VectorX<Scalar>> gauss_legendre(int n) {
  if (n < 1) throw ConfigError("Gauss-Legendre rule needs at least one node");
  MatrixX<Scalar> jacobi = MatrixX<Scalar>::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const Scalar b = Scalar(i) / std::sqrt(Scalar(4 * i * i - 1));
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(jacobi);
  VectorX<Scalar> nodes = es.eigenvalues();
  VectorX<Scalar> weights = Scalar(2) * es.eigenvectors().row(0).transpose().array().square();
  return {nodes, weights};
}

/// Fixed Dirichlet-Laplacian eigenvalue (n pi)^2 for the 1-based mode n.
inline double laplacian_eigenvalue(int n) {
  const double k = kPi * static_cast<double>(n);
  return k * k;
}

}  // namespace randattract
