#include "randattract/ou.hpp"

#include "randattract/io.hpp"
#include "randattract/operators.hpp"
#include "randattract/pathwise.hpp"

#include <algorithm>
#include <ostream>
#include <set>

namespace randattract {

namespace {

VectorXd project(const VectorXd& w, int dim) {
  VectorXd out = VectorXd::Zero(dim);
  const int n = std::min<int>(dim, static_cast<int>(w.size()));
  out.head(n) = w.head(n);
  return out;
}

}  // namespace

StationaryState construct_initial(const StepFactory& factory, double a) {
  if (!(a > 0.0)) throw ConfigError("truncation horizon a must be positive");
  const WienerPath& path = factory.path();
  const TimeGrid grid = TimeGrid::span(-a, 0.0, path.dt());
  if (!path.covers(grid.first_index(), 0))
    throw ShiftRangeError("path does not cover the truncation window [-a, 0]");
  const PropagatorChain chain = build_chain(factory, grid);

  VectorXd z = project(path.value(grid.first_index()), factory.dim());
  for (Index l = 0; l < grid.steps; ++l)
    z = linear_pathwise_step(chain, path, grid.time(l), grid.time(l + 1), z, 1.0);

  const DecayFit env = envelope_fit(chain);
  double tail = 0.0;
  for (Index k = grid.first_index(); k <= grid.first_index() + grid.steps / 2; ++k)
    tail = std::max(tail, project(path.value(k), factory.dim()).norm());

  StationaryState st;
  st.z0 = std::move(z);
  st.truncation_horizon = a;
  st.truncation_bound = env.c_hat * tail * std::exp(-env.lambda_hat * a);
  return st;
}

StationaryState construct_initial(const DiffusionField& field, const WienerPath& path, double a,
                                  int dim) {
  return construct_initial(StepFactory(field, dim, path), a);
}

namespace {

void record(OUTrajectory& traj, const VectorXd& z) {
  traj.norm_l2.push_back(z.norm());
  traj.norm_beta.push_back(fractional_norm(z, traj.beta));
  traj.states.push_back(z);
}

}  // namespace

OUTrajectory propagate(const StationaryState& state, const PropagatorChain& chain,
                       const WienerPath& path, double beta) {
  OUTrajectory traj;
  traj.grid = chain.grid();
  traj.beta = beta;
  VectorXd z = state.z0;
  record(traj, z);
  for (Index l = 0; l < chain.size(); ++l) {
    z = linear_pathwise_step(chain, path, chain.grid().time(l), chain.grid().time(l + 1), z, 1.0);
    if (!z.allFinite()) throw NumericalError("non-finite Ornstein-Uhlenbeck state");
    record(traj, z);
  }
  return traj;
}

OUTrajectory propagate(const StationaryState& state, const StepFactory& factory,
                       const TimeGrid& grid, double beta) {
  return propagate(state, build_chain(factory, grid), factory.path(), beta);
}

void propagate_streaming(const StationaryState& state, const StepFactory& factory,
                         const TimeGrid& grid,
                         const std::function<void(Index, const VectorXd&)>& visit) {
  const WienerPath& path = factory.path();
  const Index k0 = grid.first_index();
  VectorXd z = state.z0;
  visit(0, z);
  for (Index j = 0; j < grid.steps; ++j) {
    const PropagatorStep st = factory.compute(k0 + j);
    z = st.propagate(z) + st.noise(noise_increment(path, k0 + j, factory.dim()));
    if (!z.allFinite()) throw NumericalError("non-finite Ornstein-Uhlenbeck state");
    visit(j + 1, z);
  }
}

StationarityReport stationarity_residual(const StepFactory& factory, double t, double s,
                                         double a) {
  if (t < 0.0 || s < 0.0) throw OrderingError("stationarity check needs s, t >= 0");
  const double dt = factory.path().dt();
  StationarityReport rep;
  rep.t = t;
  rep.s = s;

  const StationaryState base = construct_initial(factory, a);
  const OUTrajectory direct = propagate(base, factory, TimeGrid::span(0.0, t + s, dt), 0.0);

  const StepFactory moved = factory.rebind(wiener_shift(factory.path(), ShiftIndex{grid_index(s, dt)}));
  const StationaryState start = construct_initial(moved, a);
  const OUTrajectory shifted = propagate(start, moved, TimeGrid::span(0.0, t, dt), 0.0);

  const VectorXd& lhs = direct.states.back();
  rep.residual = (lhs - shifted.states.back()).norm();
  rep.truncation_bound = std::max(base.truncation_bound, start.truncation_bound);
  rep.z_norm = lhs.norm();
  return rep;
}

// ---------------------------------------------------------------------------

const TemperednessRow& TemperednessTable::at(double t) const {
  for (const auto& r : rows)
    if (std::abs(r.t - t) <= 1e-9 * std::max(1.0, t)) return r;
  throw ConfigError("time " + std::to_string(t) + " is not on the temperedness ladder");
}

std::vector<double> log_ladder(double t_min, double t_max, int count, double dt,
                               const std::vector<double>& anchors) {
  if (!(t_min > 0.0) || t_max < t_min || count < 2) throw ConfigError("invalid ladder");
  std::set<Index> idx;
  const double ratio = std::log(t_max / t_min) / (count - 1);
  for (int i = 0; i < count; ++i) {
    const double t = t_min * std::exp(ratio * i);
    idx.insert(std::max<Index>(1, static_cast<Index>(std::llround(t / dt))));
  }
  for (double t : anchors) idx.insert(grid_index(t, dt));
  std::vector<double> out;
  for (Index k : idx) out.push_back(static_cast<double>(k) * dt);
  return out;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

TemperednessTable temperedness_diagnostic(const DiffusionField& field, const WienerPath& path,
                                          int dim, double beta, const std::vector<double>& gammas,
                                          double horizon, double a,
                                          const std::vector<double>& ladder, double fit_lo) {
  if (!(beta >= 0.0 && beta < 0.5)) throw ConfigError("temperedness exponent beta must lie in [0, 1/2)");
  if (ladder.empty()) throw ConfigError("empty temperedness ladder");
  const double dt = path.dt();
  const Index back = grid_index(horizon, dt);
  const double need = horizon + a + field.driver_horizon;
  if (path.t_lo() > -need + 0.5 * dt)
    throw ShiftRangeError("coverage: path must reach back to -(T + a + a_drv)");

  // Z(theta_{-t} w) for t in [0, T] is Z(theta_tau theta_{-T} w), tau = T - t.
  const StepFactory factory(field, dim, wiener_shift(path, ShiftIndex{-back}));
  const StationaryState start = construct_initial(factory, a);

  std::vector<Index> want;
  for (double t : ladder) {
    const Index k = grid_index(t, dt);
    if (k < 0 || k > back) throw ConfigError("ladder point outside [0, T]");
    want.push_back(back - k);
  }
  std::sort(want.begin(), want.end());

  TemperednessTable table;
  table.beta = beta;
  table.gammas = gammas;
  table.fit_hi = horizon;
  table.fit_lo = fit_lo < 0.0 ? 0.5 * horizon : fit_lo;

  std::size_t next = 0;
  propagate_streaming(start, factory, TimeGrid::span(0.0, horizon, dt), [&](Index j, const VectorXd& z) {
    while (next < want.size() && want[next] == j) {
      TemperednessRow row;
      row.t = static_cast<double>(back - j) * dt;
      row.y = fractional_norm(z, beta);
      for (double g : gammas) row.discounted.push_back(std::exp(-g * row.t) * row.y);
      row.lnplus_over_t = row.t > 0.0 ? std::max(0.0, std::log(row.y)) / row.t : 0.0;
      table.rows.push_back(std::move(row));
      ++next;
    }
  });
  std::sort(table.rows.begin(), table.rows.end(),
            [](const auto& l, const auto& r) { return l.t < r.t; });

  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> ls;
  for (const auto& r : table.rows)
    if (r.t >= table.fit_lo - 1e-12 && r.t <= table.fit_hi + 1e-12) {
      xs.push_back(r.t);
      ys.push_back(r.y > 0.0 ? std::max(0.0, std::log(r.y)) : 0.0);
      ls.push_back(r.y > 0.0 ? std::log(r.y) : 0.0);
    }
  table.slope = least_squares_slope(xs, ys);
  table.log_slope = least_squares_slope(xs, ls);
  return table;
}

void write_temperedness_csv(std::ostream& out, const TemperednessTable& table) {
  out << "# finite-horizon surrogate of the temperedness limit e^{-gamma t} Y(theta_{-t} w) -> 0\n";
  out << "# beta=" << format_real(table.beta) << " slope=" << format_real(table.slope)
      << " log_slope=" << format_real(table.log_slope)
      << " fit_window=[" << format_real(table.fit_lo) << "," << format_real(table.fit_hi) << "]\n";
  out << "t,Y";
  for (double g : table.gammas) out << ",discounted_gamma_" << format_real(g);
  out << ",lnplus_over_t\n";
  for (const auto& r : table.rows) {
    out << format_real(r.t) << ',' << format_real(r.y);
    for (double d : r.discounted) out << ',' << format_real(d);
    out << ',' << format_real(r.lnplus_over_t) << "\n";
  }
}

}  // namespace randattract
