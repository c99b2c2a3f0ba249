#include "randattract/operators.hpp"

#include <algorithm>
#include <vector>

namespace randattract {

DiffusionField DiffusionField::autonomous(double delta) {
  DiffusionField f;
  f.delta = delta;
  f.amp = 0.0;
  return f;
}

DiffusionField DiffusionField::constant_profile(double delta, double amp) {
  DiffusionField f;
  f.delta = delta;
  f.amp = amp;
  f.profile = [](double) { return 1.0; };
  f.profile_sup = 1.0;
  return f;
}

void DiffusionField::validate() const {
  if (!(delta > 0.0)) throw ConfigError("ellipticity: delta must be positive");
  if (amp < 0.0) throw ConfigError("modulation amplitude amp must be nonnegative");
  if (!(kappa > 0.0)) throw ConfigError("driver decay kappa must be positive");
  if (!(driver_horizon > 0.0)) throw ConfigError("driver horizon a_drv must be positive");
  if (!profile) throw ConfigError("diffusion profile is not set");
  if (!(amp * profile_sup < delta))
    throw ConfigError("ellipticity violated: amp * sup|g| must be smaller than delta");
}

// ---------------------------------------------------------------------------

namespace {

Index driver_steps(const DiffusionField& field, double dt) {
  const double x = field.driver_horizon / dt;
  const double k = std::round(x);
  if (std::abs(x - k) > 1e-8 * std::max(1.0, x))
    throw ConfigError("driver horizon a_drv must be a multiple of dt");
  return static_cast<Index>(k);
}

}  // namespace

DriverKernel::DriverKernel(const DiffusionField& field, double dt) : dt_(dt) {
  const Index steps = driver_steps(field, dt);
  weights_.resize(steps + 1);
  for (Index j = 0; j <= steps; ++j) {
    const double w = (j == 0 || j == steps) ? 0.5 : 1.0;
    weights_(j) = dt * w * std::exp(-field.kappa * static_cast<double>(j) * dt);
  }
}

double DriverKernel::operator()(const WienerPath& path, Index k) const {
  if (std::abs(path.dt() - dt_) > 1e-12 * dt_)
    throw AlignmentError("driver kernel built for a different time step");
  if (!path.covers(k - steps(), k))
    throw ShiftRangeError("driver window [t - a_drv, t] leaves the sampled path");
  double sum = 0.0;
  for (Index j = 0; j <= steps(); ++j) sum += weights_(j) * path.increment(0, k, k - j);
  return sum;
}

double driver_at_index(const WienerPath& path, Index k, const DiffusionField& field) {
  return DriverKernel(field, path.dt())(path, k);
}

double evaluate_driver(const WienerPath& path, double t, const DiffusionField& field) {
  const double x = t / path.dt();
  const double lo = std::floor(x);
  const double frac = x - lo;
  const Index k = static_cast<Index>(lo);
  if (frac < 1e-9) return driver_at_index(path, k, field);
  if (frac > 1.0 - 1e-9) return driver_at_index(path, k + 1, field);
  return (1.0 - frac) * driver_at_index(path, k, field) +
         frac * driver_at_index(path, k + 1, field);
}

double evaluate_coefficient(const DiffusionField& field, double x, double t,
                            const WienerPath& path) {
  field.validate();
  if (x < 0.0 || x > 1.0) throw ConfigError("coefficient position must lie in [0, 1]");
  return field.delta + field.amp * field.profile(x) * std::tanh(evaluate_driver(path, t, field));
}

double driver_holder_seminorm(const WienerPath& path, const DiffusionField& field, double gamma,
                              double s, double r) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("Hölder exponent must lie in (0, 1)");
  const Index ks = grid_index(s, path.dt());
  const Index kr = grid_index(r, path.dt());
  if (kr <= ks) throw ConfigError("Hölder window is empty");
  std::vector<double> zeta;
  for (Index k = ks; k <= kr; ++k) zeta.push_back(driver_at_index(path, k, field));
  double best = 0.0;
  for (std::size_t i = 0; i < zeta.size(); ++i)
    for (std::size_t j = i + 1; j < zeta.size(); ++j) {
      const double span = static_cast<double>(j - i) * path.dt();
      best = std::max(best, std::abs(zeta[j] - zeta[i]) / std::pow(span, gamma));
    }
  return best;
}

// ---------------------------------------------------------------------------

GalerkinOperator GalerkinOperator::from_matrix(MatrixXd a, double time) {
  GalerkinOperator op;
  op.matrix = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(op.matrix);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  op.eigenvectors = es.eigenvectors();
  op.eigenvalues = es.eigenvalues();
  op.time = time;
  return op;
}

GalerkinAssembler::GalerkinAssembler(const DiffusionField& field, int dim) : field_(field) {
  field_.validate();
  if (dim < 1) throw ConfigError("Galerkin dimension M must be >= 1");

  // 8-point Gauss-Legendre on a 4M-element mesh.
  constexpr int kNodes = 8;
  const int elements = 4 * dim;
  const auto [ref_x, ref_w] = gauss_legendre<double>(kNodes);
  const int total = elements * kNodes;
  const double h = 1.0 / elements;

  MatrixXd dphi(total, dim);
  VectorXd w(total);
  VectorXd g(total);
  for (int e = 0; e < elements; ++e) {
    for (int q = 0; q < kNodes; ++q) {
      const int i = e * kNodes + q;
      const double x = (e + 0.5 * (ref_x(q) + 1.0)) * h;
      w(i) = 0.5 * h * ref_w(q);
      g(i) = field_.profile(x);
      for (int n = 1; n <= dim; ++n)
        dphi(i, n - 1) = std::sqrt(2.0) * kPi * n * std::cos(kPi * n * x);
    }
  }
  base_ = dphi.transpose() * w.asDiagonal() * dphi;
  profile_ = dphi.transpose() * (w.array() * g.array()).matrix().asDiagonal() * dphi;
  base_ = 0.5 * (base_ + base_.transpose()).eval();
  profile_ = 0.5 * (profile_ + profile_.transpose()).eval();
  if (!base_.allFinite() || !profile_.allFinite())
    throw NumericalError("non-finite diffusion coefficient during assembly");
}

MatrixXd GalerkinAssembler::matrix(double modulation) const {
  return -(field_.delta * base_ + (field_.amp * modulation) * profile_);
}

GalerkinOperator GalerkinAssembler::at(const WienerPath& path, double t) const {
  const double mod = field_.amp == 0.0 ? 0.0 : std::tanh(evaluate_driver(path, t, field_));
  return GalerkinOperator::from_matrix(matrix(mod), t);
}

GalerkinOperator assemble_operator(const DiffusionField& field, double t, const WienerPath& path,
                                   int dim) {
  return GalerkinAssembler(field, dim).at(path, t);
}

// ---------------------------------------------------------------------------

void check_fractional_exponent(double alpha) {
  if (!(alpha >= -0.5 && alpha < 1.0))
    throw ConfigError("fractional exponent must lie in [-1/2, 1)");
}

VectorXd fixed_laplacian_weights(int dim, double alpha) {
  VectorXd w(dim);
  for (int n = 1; n <= dim; ++n) w(n - 1) = std::pow(laplacian_eigenvalue(n), alpha);
  return w;
}

VectorXd fractional_apply(const GalerkinOperator& op, double alpha, const VectorXd& vec) {
  check_fractional_exponent(alpha);
  if (op.eigenvalues.maxCoeff() >= 0.0)
    throw DefinitenessError("operator has a nonnegative eigenvalue");
  if (alpha == 0.0) return vec;
  const VectorXd w = (-op.eigenvalues).array().pow(alpha).matrix();
  return spectral_apply(op.eigenvectors, w, vec);
}

VectorXd fractional_apply(FixedLaplacian, double alpha, const VectorXd& vec) {
  check_fractional_exponent(alpha);
  if (alpha == 0.0) return vec;
  return vec.cwiseProduct(fixed_laplacian_weights(static_cast<int>(vec.size()), alpha));
}

double fractional_norm(const VectorXd& vec, double alpha) {
  return fractional_apply(FixedLaplacian{}, alpha, vec).norm();
}

double fractional_norm(const VectorXd& vec, const FractionalNormSpec& spec,
                       const GalerkinOperator* op) {
  if (spec.reference == NormReference::FixedLaplacian) return fractional_norm(vec, spec.alpha);
  if (op == nullptr) throw ConfigError("instantaneous norm needs an assembled operator");
  return fractional_apply(*op, spec.alpha, vec).norm();
}

}  // namespace randattract
