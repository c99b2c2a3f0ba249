#pragma once

// Transformed equation v = u - sigma Z, energy and absorbing-set functionals,
// and pullback estimation of the random attractor.

#include "randattract/core.hpp"
#include "randattract/evolution.hpp"
#include "randattract/ou.hpp"
#include "randattract/pathwise.hpp"

#include <cstdint>
#include <vector>

namespace randattract {

struct VState {
  VectorXd v;
  double t = 0.0;
};

/// One exponential-Euler step of dv/dt = A v + F(v + sigma Z) + f:
/// v_{k+1} = S_k v_k + dt phi_1(dt A_k) (F(v_k + sigma Z_k) + f).
VState v_step(const PropagatorChain& chain, const VState& current, const VectorXd& z_k,
              double sigma, const NonlinearitySpec& nonlinearity, const VectorXd& forcing,
              const SpatialQuadrature& quad);

/// v-trajectory on the chain grid driven by the given Z states.
Trajectory integrate_transformed(const SemilinearProblem& problem, const PropagatorChain& chain,
                                 const OUTrajectory& z, const VectorXd& v0);

struct TransformReport {
  double discrepancy = 0.0;  // sup_k ||u_k - (v_k + sigma Z_k)||_{L2}
  double scale = 0.0;        // sup_k ||u_k||_{L2}
  double relative() const { return discrepancy / std::max(scale, 1e-300); }
};

/// u from integrate_semilinear against v + sigma Z with v_0 = u_0 - sigma Z(w).
TransformReport transform_consistency(const SemilinearProblem& problem, const StepFactory& factory,
                                      const TimeGrid& grid, double a);

struct EnergyRow {
  double t = 0.0;
  double v_sq = 0.0;       // ||v||^2_{L2}
  double dv_sq_dt = 0.0;   // forward difference
  double lp_power = 0.0;   // int |v|^{rho+1}
  double z_rho1 = 0.0;     // ||sigma Z||^{rho+1}_{X_alpha}
  double z_2rho = 0.0;     // ||sigma Z||^{2 rho}_{X_alpha}
  double bound = 0.0;      // e^{-rate t} ||v0||^2 + B_k
  double margin = 0.0;     // bound / ||v||^2
  bool flagged = false;
};

struct EnergyTable {
  std::vector<EnergyRow> rows;
  double rate = 0.0;  // delta_eff * lambda_1
  double monitor_constant = 0.0;
  double min_margin = 0.0;  // over k >= 1
  int flagged = 0;
};

struct EnergyParams {
  double alpha = 0.2;
  double sigma = 1.0;  // the monitor sees sigma Z
  double monitor_constant = 1.0;
};

EnergyTable energy_monitor(const Trajectory& v, const OUTrajectory& z, const DiffusionField& field,
                           const NonlinearitySpec& nonlinearity, const EnergyParams& params);

/// Smallest monitor constant giving the target margin on a calibration run,
/// never below 2 C1 |D| (the Z-free Gronwall constant).
double calibrate_monitor_constant(const Trajectory& v, const OUTrajectory& z,
                                  const DiffusionField& field,
                                  const NonlinearitySpec& nonlinearity, double alpha,
                                  double sigma, double target_margin = 2.0);

struct AbsorbingDiagnostics {
  double r2_integral = 0.0;    // int_{-a}^0 e^{rate tau} ||Z(theta_tau w)||^{rho+1}_{X_alpha}
  double rrho_integral = 0.0;  // same with exponent 2 rho
  double z_l2 = 0.0;
  double z_eta = 0.0;
};

struct AbsorbingParams {
  double alpha = 0.2;
  double eta = 0.35;
  double rho = 3.0;
  int dim = 64;
};

/// The path must cover [-2a - a_drv, 0].
AbsorbingDiagnostics absorbing_diagnostics(const DiffusionField& field, const WienerPath& path,
                                           double a, const AbsorbingParams& params);

/// sigma ||Z||_{X_eta} + (1 + sigma^{rho+1} r2)^{1/2}: the attractor scale the
/// absorbing radii are built from, with the unnamed constants set to one.
double attractor_scale(const AbsorbingDiagnostics& d, double sigma, double rho);

struct PullbackEstimate {
  std::vector<double> horizons;
  std::vector<std::vector<VectorXd>> endpoints;  // [horizon][member]
  std::vector<std::vector<bool>> alive;
  std::vector<double> diameters;  // X_alpha
  std::vector<double> eta_max;    // max X_eta norm
  std::vector<double> hausdorff_steps;
  std::vector<double> alpha_max;  // max X_alpha norm
  int blowups = 0;
  bool monotone = true;  // diameters non-increasing within the slack

  std::vector<VectorXd> survivors(std::size_t horizon) const;
};

struct PullbackParams {
  double alpha = 0.2;
  double eta = 0.35;
  double monotone_slack = 0.05;
  int threads = 1;
};

/// Pullback from -T_j to 0, realised by integrating on [0, T_j] against
/// theta_{-T_j} w. The path must cover [-max T_j - a_drv, 0].
PullbackEstimate pullback_estimate(const SemilinearProblem& problem, const StepFactory& factory,
                                   const std::vector<double>& horizons,
                                   const std::vector<VectorXd>& ensemble,
                                   const PullbackParams& params);

/// 0, +-R e_n / ||e_n||_{X_alpha} for n = 1..8, then uniform draws in the
/// X_alpha ball of radius R.
std::vector<VectorXd> default_ensemble(int dim, double radius, double alpha, int size,
                                       std::uint64_t seed);

double hausdorff_distance(const std::vector<VectorXd>& a, const std::vector<VectorXd>& b,
                          double alpha);
double cloud_diameter(const std::vector<VectorXd>& a, double alpha);

struct InvarianceProbe {
  double distance = 0.0;   // d_H(phi(s, w, A_T(w)), A_T(theta_s w))
  double increment = 0.0;  // d_H(A_{T/2}, A_T) on theta_s w
};

/// The path must cover [-T - a_drv, s].
InvarianceProbe invariance_probe(const SemilinearProblem& problem, const StepFactory& factory,
                                 double horizon, double s, const std::vector<VectorXd>& ensemble,
                                 const PullbackParams& params);

}  // namespace randattract
