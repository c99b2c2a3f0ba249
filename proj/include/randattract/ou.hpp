#pragma once

// Stationary Ornstein-Uhlenbeck-type process Z(theta_t w): truncated initial
// state, propagation along the shift, stationarity and temperedness checks.

#include "randattract/core.hpp"
#include "randattract/evolution.hpp"
#include "randattract/mds.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace randattract {

struct StationaryState {
  VectorXd z0;  // Z(w)
  double truncation_horizon = 8.0;
  double truncation_bound = 0.0;  // C_hat * max_{[-a,-a/2]} |w| * e^{-lambda_hat a}
};

struct OUTrajectory {
  TimeGrid grid;
  std::vector<VectorXd> states;  // Z(theta_{t_k} w)
  std::vector<double> norm_l2;
  std::vector<double> norm_beta;
  double beta = 0.2;
};

/// Z(w) = int_{-a}^0 U(0, r) A(theta_r w) w_r dr, evaluated by running the
/// local pathwise recursion from time -a with initial value w(-a); on the
/// discrete family the two coincide.
StationaryState construct_initial(const StepFactory& factory, double a);
StationaryState construct_initial(const DiffusionField& field, const WienerPath& path, double a,
                                  int dim);

/// Z along the chain grid; state.z0 is taken as the value at the first grid time.
OUTrajectory propagate(const StationaryState& state, const PropagatorChain& chain,
                       const WienerPath& path, double beta = 0.2);
OUTrajectory propagate(const StationaryState& state, const StepFactory& factory,
                       const TimeGrid& grid, double beta = 0.2);

/// Same recursion without storing steps; visit(j, Z) sees every grid state.
void propagate_streaming(const StationaryState& state, const StepFactory& factory,
                         const TimeGrid& grid,
                         const std::function<void(Index, const VectorXd&)>& visit);

struct StationarityReport {
  double t = 0.0;
  double s = 0.0;
  double residual = 0.0;  // ||Z(t+s, w) - Z(t, theta_s w)||_{L2}
  double truncation_bound = 0.0;
  double z_norm = 0.0;  // ||Z(t+s, w)||_{L2}
};

StationarityReport stationarity_residual(const StepFactory& factory, double t, double s, double a);

struct TemperednessRow {
  double t = 0.0;
  double y = 0.0;                  // ||Z(theta_{-t} w)||_{X_beta}
  std::vector<double> discounted;  // e^{-gamma t} Y per gamma
  double lnplus_over_t = 0.0;
};

struct TemperednessTable {
  double beta = 0.2;
  std::vector<double> gammas;
  std::vector<TemperednessRow> rows;  // ascending t
  double slope = 0.0;                 // least-squares slope of ln+ Y against t
  double log_slope = 0.0;             // same for ln Y
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  const TemperednessRow& at(double t) const;
};

/// Log-spaced grid-aligned ladder on [t_min, t_max] plus the given anchors.
std::vector<double> log_ladder(double t_min, double t_max, int count, double dt,
                               const std::vector<double>& anchors = {});

/// The path must cover [-T - a - a_drv, 0]. The slope is fitted over
/// ladder points in [fit_lo, T] (fit_lo defaults to T/2).
TemperednessTable temperedness_diagnostic(const DiffusionField& field, const WienerPath& path,
                                          int dim, double beta, const std::vector<double>& gammas,
                                          double horizon, double a,
                                          const std::vector<double>& ladder, double fit_lo = -1.0);

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

void write_temperedness_csv(std::ostream& out, const TemperednessTable& table);

}  // namespace randattract
