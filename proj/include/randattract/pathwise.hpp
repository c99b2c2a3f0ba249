#pragma once

// Pathwise mild solutions: the linear noise recursion with its
// integration-by-parts corrector, and the semilinear exponential-Euler march.

#include "randattract/core.hpp"
#include "randattract/evolution.hpp"
#include "randattract/mds.hpp"
#include "randattract/operators.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace randattract {

enum class NonlinearityKind { CubicFisher, PureCubic, Zero, Custom };

/// Scalar reaction term F with its dissipativity constants:
/// F(u) u <= -C0 |u|^{1+rho} + C1 and
/// |F(u) - F(v)| <= CF |u - v| (|u|^{rho-1} + |v|^{rho-1} + 1).
struct NonlinearitySpec {
  NonlinearityKind kind = NonlinearityKind::CubicFisher;
  double rho = 3.0;
  double c0 = 0.5;
  double c1 = 0.5;
  double cf = 1.5;
  std::function<double(double)> custom;

  static NonlinearitySpec cubic_fisher();  // u - u^3
  static NonlinearitySpec pure_cubic();    // -u^3
  static NonlinearitySpec zero();
  static NonlinearitySpec custom_fn(std::function<double(double)> fn, double rho);

  double operator()(double u) const;
  bool is_zero() const { return kind == NonlinearityKind::Zero; }
};

/// Interior nodes x_j = j/N of a uniform N-interval grid on (0, 1). The
/// equal-weight rule integrates cos(k pi x) exactly for 0 < k < 2N, so
/// projections of degree-rho polynomials of band-limited inputs are exact for
/// N >= 4 rho M.
class SpatialQuadrature {
 public:
  SpatialQuadrature(int dim, int intervals);
  static SpatialQuadrature for_nonlinearity(int dim, double rho);

  int dim() const { return static_cast<int>(basis_.cols()); }
  int intervals() const { return intervals_; }
  VectorXd synthesize(const VectorXd& coeffs) const { return basis_ * coeffs; }
  VectorXd project(const VectorXd& values) const { return weight_ * (basis_.transpose() * values); }
  /// int_0^1 f dx for f sampled on the nodes (f(0) = f(1) = 0 assumed).
  double integrate(const VectorXd& values) const { return weight_ * values.sum(); }
  /// int |u|^p dx for the function with the given coefficients.
  double lp_power(const VectorXd& coeffs, double p) const;

 private:
  int intervals_;
  double weight_;
  MatrixXd basis_;  // phi_n(x_j) = sqrt(2) sin(n pi x_j)
};

VectorXd nemytskii(const NonlinearitySpec& f, const VectorXd& vec, const SpatialQuadrature& quad);

struct SemilinearProblem {
  DiffusionField field;
  NonlinearitySpec nonlinearity;
  VectorXd forcing;  // constant in time
  double sigma = 0.1;
  VectorXd u0;
  double blowup_threshold = 1e6;  // cap on ||u||_{X_alpha}
  double alpha = 0.2;

  void validate(int dim) const;
};

enum class TrajectoryStatus { Completed, BlowUp };

struct Trajectory {
  TimeGrid grid;
  std::vector<VectorXd> states;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  double blowup_time = 0.0;

  bool completed() const { return status == TrajectoryStatus::Completed; }
  const VectorXd& final_state() const { return states.back(); }
};

/// Galerkin projection of the path increment over [t_k, t_{k+1}].
VectorXd noise_increment(const WienerPath& path, Index k, int dim);

/// int_{t_a}^{t_b} U(t_b, s) A(s) (W_{t_b} - W_s) ds, integrated exactly per
/// frozen step against the linearly interpolated path, with the one-step
/// quadrature term matched to the noise weight.
VectorXd corrector_integral(const PropagatorChain& chain, const WienerPath& path, double t_a,
                            double t_b);

/// h_{k+1} = U h_k + sigma U dW - sigma corrector(t_k, t_{k+1}).
VectorXd linear_pathwise_step(const PropagatorChain& chain, const WienerPath& path, double t_k,
                              double t_k1, const VectorXd& h, double sigma);

/// u_{k+1} = S_k (u_k + dt (F(u_k) + f)) + noise part of the linear step.
Trajectory integrate_semilinear(const SemilinearProblem& problem, const PropagatorChain& chain,
                                const WienerPath& path, const TimeGrid& grid);
Trajectory integrate_semilinear(const SemilinearProblem& problem, const PropagatorChain& chain,
                                const WienerPath& path);

/// Fine-grid solution (dt / refine) restricted to the coarse grid. The path
/// must be sampled at the fine step.
Trajectory autonomous_reference(const SemilinearProblem& problem, const WienerPath& fine_path,
                                const TimeGrid& coarse_grid, int refine, int dim);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, double alpha);
/// Rows (t, mean ||u||_{L2}, var of modes 1..8) over completed members.
void write_ensemble_csv(std::ostream& out, const std::vector<Trajectory>& runs);

}  // namespace randattract
