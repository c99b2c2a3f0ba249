#include "randattract/attractor.hpp"

#include "randattract/operators.hpp"
#include "randattract/parallel.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace randattract {

VState v_step(const PropagatorChain& chain, const VState& current, const VectorXd& z_k,
              double sigma, const NonlinearitySpec& nonlinearity, const VectorXd& forcing,
              const SpatialQuadrature& quad) {
  const Index l = chain.grid().local(current.t);
  if (l >= chain.size()) throw AlignmentError("v step past the end of the chain");
  const PropagatorStep& st = chain.step(l);
  VState next;
  next.t = chain.grid().time(l + 1);
  next.v = st.propagate(current.v);
  const bool reactive = !nonlinearity.is_zero() || forcing.any();
  if (reactive) {
    VectorXd drive = nemytskii(nonlinearity, current.v + sigma * z_k, quad) + forcing;
    next.v += st.dt * st.phi1(drive);
  }
  if (!next.v.allFinite()) throw NumericalError("non-finite transformed state");
  return next;
}

Trajectory integrate_transformed(const SemilinearProblem& problem, const PropagatorChain& chain,
                                 const OUTrajectory& z, const VectorXd& v0) {
  const int dim = chain.dim();
  if (static_cast<Index>(z.states.size()) != chain.size() + 1)
    throw AlignmentError("Z trajectory and chain differ in length");
  const SpatialQuadrature quad = SpatialQuadrature::for_nonlinearity(dim, problem.nonlinearity.rho);
  Trajectory traj;
  traj.grid = chain.grid();
  traj.states.reserve(z.states.size());
  VState cur{v0, chain.grid().t0};
  traj.states.push_back(v0);
  for (Index l = 0; l < chain.size(); ++l) {
    cur = v_step(chain, cur, z.states[static_cast<std::size_t>(l)], problem.sigma,
                 problem.nonlinearity, problem.forcing, quad);
    const double norm =
        fractional_norm(VectorXd(cur.v + problem.sigma * z.states[static_cast<std::size_t>(l + 1)]),
                        problem.alpha);
    if (norm > problem.blowup_threshold) {
      traj.status = TrajectoryStatus::BlowUp;
      traj.blowup_time = cur.t;
      traj.grid.steps = l;
      return traj;
    }
    traj.states.push_back(cur.v);
  }
  return traj;
}

TransformReport transform_consistency(const SemilinearProblem& problem, const StepFactory& factory,
                                      const TimeGrid& grid, double a) {
  const PropagatorChain chain = build_chain(factory, grid);
  const Trajectory u = integrate_semilinear(problem, chain, factory.path());

  const StationaryState z0 = construct_initial(factory, a);
  const OUTrajectory z = propagate(z0, chain, factory.path(), 0.0);
  const Trajectory v = integrate_transformed(problem, chain, z, problem.u0 - problem.sigma * z0.z0);

  TransformReport rep;
  const std::size_t n = std::min(u.states.size(), v.states.size());
  for (std::size_t k = 0; k < n; ++k) {
    rep.discrepancy = std::max(rep.discrepancy,
                               (u.states[k] - v.states[k] - problem.sigma * z.states[k]).norm());
    rep.scale = std::max(rep.scale, u.states[k].norm());
  }
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

double rate_of(const DiffusionField& field) {
  return field.ellipticity_floor() * laplacian_eigenvalue(1);
}

// B_k with C_mon = 1.
std::vector<double> unit_convolution(const OUTrajectory& z, double rate, double dt, double alpha,
                                     double sigma, double rho, std::size_t count) {
  std::vector<double> b(count, 0.0);
  const double decay = std::exp(-rate * dt);
  for (std::size_t k = 1; k < count; ++k) {
    const double g = std::pow(sigma * fractional_norm(z.states[k - 1], alpha), rho + 1.0) + 1.0;
    b[k] = decay * (b[k - 1] + dt * g);
  }
  return b;
}

}  // namespace

EnergyTable energy_monitor(const Trajectory& v, const OUTrajectory& z, const DiffusionField& field,
                           const NonlinearitySpec& nonlinearity, const EnergyParams& params) {
  const std::size_t count = v.states.size();
  if (z.states.size() < count) throw AlignmentError("Z trajectory shorter than v trajectory");
  const int dim = static_cast<int>(v.states.front().size());
  const double rho = nonlinearity.rho;
  const double dt = v.grid.dt;
  const SpatialQuadrature quad = SpatialQuadrature::for_nonlinearity(dim, rho);

  EnergyTable table;
  table.rate = rate_of(field);
  table.monitor_constant = params.monitor_constant;
  table.min_margin = std::numeric_limits<double>::infinity();
  const std::vector<double> b = unit_convolution(z, table.rate, dt, params.alpha, params.sigma, rho, count);
  const double v0_sq = v.states.front().squaredNorm();

  for (std::size_t k = 0; k < count; ++k) {
    EnergyRow row;
    row.t = v.grid.time(static_cast<Index>(k));
    row.v_sq = v.states[k].squaredNorm();
    row.dv_sq_dt = k + 1 < count ? (v.states[k + 1].squaredNorm() - row.v_sq) / dt : 0.0;
    row.lp_power = quad.lp_power(v.states[k], rho + 1.0);
    const double za = params.sigma * fractional_norm(z.states[k], params.alpha);
    row.z_rho1 = std::pow(za, rho + 1.0);
    row.z_2rho = std::pow(za, 2.0 * rho);
    row.bound = std::exp(-table.rate * (row.t - v.grid.t0)) * v0_sq + params.monitor_constant * b[k];
    row.margin = row.v_sq > 0.0 ? row.bound / row.v_sq : std::numeric_limits<double>::infinity();
    row.flagged = row.v_sq > row.bound * (1.0 + 1e-12);
    if (row.flagged) ++table.flagged;
    if (k >= 1) table.min_margin = std::min(table.min_margin, row.margin);
    table.rows.push_back(row);
  }
  return table;
}

double calibrate_monitor_constant(const Trajectory& v, const OUTrajectory& z,
                                  const DiffusionField& field,
                                  const NonlinearitySpec& nonlinearity, double alpha,
                                  double sigma, double target_margin) {
  const std::size_t count = v.states.size();
  const double rate = rate_of(field);
  const std::vector<double> b = unit_convolution(z, rate, v.grid.dt, alpha, sigma, nonlinearity.rho, count);
  const double v0_sq = v.states.front().squaredNorm();
  double c = 2.0 * nonlinearity.c1;  // |D| = 1
  for (std::size_t k = 1; k < count; ++k) {
    const double t = v.grid.time(static_cast<Index>(k)) - v.grid.t0;
    const double need = target_margin * v.states[k].squaredNorm() - std::exp(-rate * t) * v0_sq;
    if (need > 0.0 && b[k] > 0.0) c = std::max(c, need / b[k]);
  }
  return c;
}

// ---------------------------------------------------------------------------

AbsorbingDiagnostics absorbing_diagnostics(const DiffusionField& field, const WienerPath& path,
                                           double a, const AbsorbingParams& params) {
  if (!(a > 0.0)) throw ConfigError("absorbing window a must be positive");
  const double dt = path.dt();
  const Index back = grid_index(a, dt);
  if (path.t_lo() > -(2.0 * a + field.driver_horizon) + 0.5 * dt)
    throw ShiftRangeError("coverage: path must reach back to -(2a + a_drv)");

  // Z(theta_tau w), tau in [-a, 0], is Z(theta_j theta_{-a} w) at j = tau + a.
  const StepFactory factory(field, params.dim, wiener_shift(path, ShiftIndex{-back}));
  const StationaryState start = construct_initial(factory, a);
  const double rate = rate_of(field);

  AbsorbingDiagnostics d;
  propagate_streaming(start, factory, TimeGrid::span(0.0, a, dt), [&](Index j, const VectorXd& z) {
    const double tau = static_cast<double>(j - back) * dt;
    const double w = (j == 0 || j == back) ? 0.5 * dt : dt;
    const double za = fractional_norm(z, params.alpha);
    const double e = std::exp(rate * tau);
    d.r2_integral += w * e * std::pow(za, params.rho + 1.0);
    d.rrho_integral += w * e * std::pow(za, 2.0 * params.rho);
    if (j == back) {
      d.z_l2 = z.norm();
      d.z_eta = fractional_norm(z, params.eta);
    }
  });
  return d;
}

double attractor_scale(const AbsorbingDiagnostics& d, double sigma, double rho) {
  return sigma * d.z_eta + std::sqrt(1.0 + std::pow(sigma, rho + 1.0) * d.r2_integral);
}

// ---------------------------------------------------------------------------

double hausdorff_distance(const std::vector<VectorXd>& a, const std::vector<VectorXd>& b,
                          double alpha) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  const VectorXd w = fixed_laplacian_weights(static_cast<int>(a.front().size()), alpha);
  auto directed = [&](const std::vector<VectorXd>& p, const std::vector<VectorXd>& q) {
    double worst = 0.0;
    for (const auto& x : p) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : q) best = std::min(best, (x - y).cwiseProduct(w).norm());
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

double cloud_diameter(const std::vector<VectorXd>& a, double alpha) {
  if (a.empty()) return 0.0;
  const VectorXd w = fixed_laplacian_weights(static_cast<int>(a.front().size()), alpha);
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      d = std::max(d, (a[i] - a[j]).cwiseProduct(w).norm());
  return d;
}

std::vector<VectorXd> PullbackEstimate::survivors(std::size_t horizon) const {
  std::vector<VectorXd> out;
  for (std::size_t i = 0; i < endpoints[horizon].size(); ++i)
    if (alive[horizon][i]) out.push_back(endpoints[horizon][i]);
  return out;
}

namespace {

void run_members(const SemilinearProblem& problem, const PropagatorChain& chain,
                 const std::vector<VectorXd>& ensemble, int threads, std::vector<VectorXd>& ends,
                 std::vector<bool>& alive) {
  ends.assign(ensemble.size(), VectorXd());
  std::vector<char> ok(ensemble.size(), 0);
  parallel_for(ensemble.size(), threads, [&](std::size_t i) {
    SemilinearProblem p = problem;
    p.u0 = ensemble[i];
    const Trajectory tr = integrate_semilinear(p, chain, chain.path());
    ends[i] = tr.final_state();
    ok[i] = tr.completed() ? 1 : 0;
  });
  alive.assign(ok.begin(), ok.end());
}

}  // namespace

PullbackEstimate pullback_estimate(const SemilinearProblem& problem, const StepFactory& factory,
                                   const std::vector<double>& horizons,
                                   const std::vector<VectorXd>& ensemble,
                                   const PullbackParams& params) {
  if (horizons.empty() || ensemble.empty()) throw ConfigError("pullback needs horizons and members");
  for (std::size_t j = 1; j < horizons.size(); ++j)
    if (!(horizons[j] > horizons[j - 1])) throw OrderingError("pullback horizons must increase");
  const double dt = factory.path().dt();
  const double need = horizons.back() + factory.field().driver_horizon;
  if (factory.path().t_lo() > -need + 0.5 * dt)
    throw ShiftRangeError("coverage: path must reach back to -(T_max + a_drv)");

  PullbackEstimate est;
  est.horizons = horizons;
  for (double t_j : horizons) {
    const Index back = grid_index(t_j, dt);
    const StepFactory moved = factory.rebind(wiener_shift(factory.path(), ShiftIndex{-back}));
    const PropagatorChain chain = build_chain(moved, TimeGrid::span(0.0, t_j, dt), params.threads);
    std::vector<VectorXd> ends;
    std::vector<bool> alive;
    run_members(problem, chain, ensemble, params.threads, ends, alive);
    est.endpoints.push_back(std::move(ends));
    est.alive.push_back(std::move(alive));

    const std::vector<VectorXd> live = est.survivors(est.endpoints.size() - 1);
    est.blowups += static_cast<int>(ensemble.size() - live.size());
    est.diameters.push_back(cloud_diameter(live, params.alpha));
    double eta_max = 0.0;
    double alpha_max = 0.0;
    for (const auto& x : live) {
      eta_max = std::max(eta_max, fractional_norm(x, params.eta));
      alpha_max = std::max(alpha_max, fractional_norm(x, params.alpha));
    }
    est.eta_max.push_back(eta_max);
    est.alpha_max.push_back(alpha_max);
  }
  for (std::size_t j = 1; j < horizons.size(); ++j) {
    est.hausdorff_steps.push_back(
        hausdorff_distance(est.survivors(j - 1), est.survivors(j), params.alpha));
    if (est.diameters[j] > est.diameters[j - 1] * (1.0 + params.monotone_slack)) est.monotone = false;
  }
  return est;
}

std::vector<VectorXd> default_ensemble(int dim, double radius, double alpha, int size,
                                       std::uint64_t seed) {
  if (dim < 1 || size < 1 || !(radius > 0.0)) throw ConfigError("invalid ensemble parameters");
  const VectorXd w = fixed_laplacian_weights(dim, alpha);
  std::vector<VectorXd> out;
  out.push_back(VectorXd::Zero(dim));
  for (int n = 1; n <= std::min(8, dim); ++n)
    for (double sign : {1.0, -1.0}) {
      VectorXd e = VectorXd::Zero(dim);
      e(n - 1) = sign * radius / w(n - 1);
      out.push_back(e);
    }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0xa77u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  while (static_cast<int>(out.size()) < size) {
    VectorXd g(dim);
    for (int i = 0; i < dim; ++i) g(i) = normal(rng);
    const double r = radius * std::pow(uniform(rng), 1.0 / dim);
    out.push_back((r / g.norm()) * g.cwiseQuotient(w));
  }
  out.resize(static_cast<std::size_t>(size));
  return out;
}

InvarianceProbe invariance_probe(const SemilinearProblem& problem, const StepFactory& factory,
                                 double horizon, double s, const std::vector<VectorXd>& ensemble,
                                 const PullbackParams& params) {
  const double dt = factory.path().dt();
  if (factory.path().t_hi() < s - 0.5 * dt) throw ShiftRangeError("coverage: path must reach s");

  const PullbackEstimate here = pullback_estimate(problem, factory, {horizon}, ensemble, params);
  const PropagatorChain forward = build_chain(factory, TimeGrid::span(0.0, s, dt), params.threads);
  std::vector<VectorXd> moved_cloud;
  std::vector<bool> alive;
  run_members(problem, forward, here.survivors(0), params.threads, moved_cloud, alive);
  std::vector<VectorXd> image;
  for (std::size_t i = 0; i < moved_cloud.size(); ++i)
    if (alive[i]) image.push_back(moved_cloud[i]);

  const StepFactory shifted =
      factory.rebind(wiener_shift(factory.path(), ShiftIndex{grid_index(s, dt)}));
  const PullbackEstimate there =
      pullback_estimate(problem, shifted, {0.5 * horizon, horizon}, ensemble, params);

  InvarianceProbe probe;
  probe.distance = hausdorff_distance(image, there.survivors(1), params.alpha);
  probe.increment = there.hausdorff_steps.front();
  return probe;
}

}  // namespace randattract
