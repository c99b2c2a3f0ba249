#include "randattract/studies.hpp"

#include "randattract/evolution.hpp"
#include "randattract/ou.hpp"
#include "randattract/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace randattract {

double Check::margin() const {
  switch (relation) {
    case Relation::AtMost:
      return limit - value;
    case Relation::AtLeast:
      return value - limit;
    case Relation::Within:
      return std::min(value - limit, upper - value);
  }
  return 0.0;
}

Check at_most(std::string suite, std::string name, double value, double limit) {
  Check c{std::move(suite), std::move(name), value, limit, 0.0, Relation::AtMost, false};
  c.passed = value <= limit;
  return c;
}

Check at_least(std::string suite, std::string name, double value, double limit) {
  Check c{std::move(suite), std::move(name), value, limit, 0.0, Relation::AtLeast, false};
  c.passed = value >= limit;
  return c;
}

Check within(std::string suite, std::string name, double value, double lo, double hi) {
  Check c{std::move(suite), std::move(name), value, lo, hi, Relation::Within, false};
  c.passed = value >= lo && value <= hi;
  return c;
}

StudyScale StudyScale::full() { return {}; }

StudyScale StudyScale::light() {
  StudyScale s;
  s.cocycle_pairs = 4;
  s.decay_pairs = 12;
  s.weak_paths = 1024;
  s.strong_paths = 8;
  s.strong_levels = 3;
  s.strong_reference = 8;
  s.temper_paths = 4;
  s.temper_dim = 16;
  s.temper_horizon = 30.0;
  s.energy_runs = 2;
  s.energy_horizon = 2.0;
  s.ensemble_size = 9;
  return s;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

WienerPath study_path(const StudySetup& setup, double t_lo, double t_hi, std::uint64_t seed,
                      double dt) {
  const double step = dt > 0.0 ? dt : setup.dt;
  const double lo = std::min(0.0, std::floor(t_lo - setup.field.driver_horizon) - 1.0);
  const double hi = std::max(0.0, std::ceil(t_hi) + 1.0);
  return sample_two_sided_path(setup.spectrum, lo, hi, step, seed);
}

SemilinearProblem make_problem(const StudySetup& setup, const NonlinearitySpec& nonlinearity,
                               double sigma, const VectorXd& u0) {
  SemilinearProblem p;
  p.field = setup.field;
  p.nonlinearity = nonlinearity;
  p.forcing = VectorXd::Zero(setup.dim);
  p.sigma = sigma;
  p.u0 = u0;
  p.alpha = setup.alpha;
  return p;
}

namespace {

VectorXd unit(int dim, int n, double scale = 1.0) {
  VectorXd e = VectorXd::Zero(dim);
  e(n - 1) = scale;
  return e;
}

VectorXd probe_vector(int dim) {
  VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = 1.0 / (1.0 + i) * (i % 2 == 0 ? 1.0 : -1.0);
  return v;
}

double max_abs_diff(const VectorXd& a, const VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

OUTrajectory zero_ou(const TimeGrid& grid, int dim) {
  OUTrajectory z;
  z.grid = grid;
  z.states.assign(static_cast<std::size_t>(grid.steps + 1), VectorXd::Zero(dim));
  z.norm_l2.assign(z.states.size(), 0.0);
  z.norm_beta.assign(z.states.size(), 0.0);
  return z;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<Check> study_evolution(const StudySetup& setup, const StudyScale& scale) {
  const std::string suite = "evolution";
  const WienerPath path = study_path(setup, 0.0, 4.0, setup.seed);
  const StepFactory factory(setup.field, setup.dim, path);
  const PropagatorChain chain = build_chain(factory, TimeGrid::span(0.0, 4.0, setup.dt), setup.threads);
  const VectorXd v = probe_vector(setup.dim);

  double identity = 0.0;
  for (double t : {0.0, 1.0, 2.5, 4.0}) identity = std::max(identity, max_abs_diff(chain.apply(t, t, v), v));

  double composition = 0.0;
  const double triples[][3] = {{0.0, 1.0, 2.0}, {0.5, 0.5, 3.0}, {1.0, 2.75, 4.0}};
  for (const auto& tr : triples) {
    const VectorXd two = chain.apply(tr[2], tr[1], chain.apply(tr[1], tr[0], v));
    composition = std::max(composition, max_abs_diff(two, chain.apply(tr[2], tr[0], v)));
  }

  const double rate = setup.field.ellipticity_floor() * kPi * kPi;
  double contraction = 0.0;
  double cocycle = 0.0;
  for (const auto& p : sample_pairs(TimeGrid::span(0.0, 2.0, setup.dt), scale.cocycle_pairs, setup.seed)) {
    const CocycleResidual r = cocycle_residual(factory, p.t, p.s);
    cocycle = std::max(cocycle, r.residual / std::max(r.reference, 1e-300));
    const double bound = std::exp(-rate * (p.t - p.s) * (1.0 - 1e-6)) * v.norm();
    contraction = std::max(contraction, chain.apply(p.t, p.s, v).norm() / bound);
  }

  return {at_most(suite, "identity_max_abs", identity, 0.0),
          at_most(suite, "composition_max_abs", composition, 0.0),
          at_most(suite, "cocycle_relative_residual", cocycle, 1e-10),
          at_most(suite, "contraction_ratio", contraction, 1.0)};
}

std::vector<Check> study_stability(const StudySetup& setup, const StudyScale& scale) {
  const std::string suite = "stability";
  const WienerPath fine = study_path(setup, 0.0, 2.0, setup.seed + 1, 0.5 * setup.dt);
  const WienerPath coarse = restrict_path(fine, 2);
  const PropagatorChain c_chain =
      build_chain(setup.field, coarse, TimeGrid::span(0.0, 2.0, setup.dt), setup.dim, setup.threads);
  const DecayFit fit = decay_fit(c_chain, sample_pairs(c_chain.grid(), scale.decay_pairs, setup.seed));

  const TimeGrid short_grid = TimeGrid::span(0.0, 1.0, setup.dt);
  const std::vector<TimePair> pairs =
      sample_pairs(short_grid, std::max(4, scale.decay_pairs / 3), setup.seed + 7, true);
  const PropagatorChain f_chain = build_chain(setup.field, fine, TimeGrid::span(0.0, 1.0, 0.5 * setup.dt),
                                              setup.dim, setup.threads);
  const double s_coarse = smoothing_estimate(c_chain.window(0.0, 1.0), 0.5, pairs);
  const double s_fine = smoothing_estimate(f_chain, 0.5, pairs);
  const double ratio = std::max(s_coarse, s_fine) / std::min(s_coarse, s_fine);

  const double rate = setup.field.ellipticity_floor() * kPi * kPi;
  return {at_most(suite, "decay_c_hat", fit.c_hat, 1.0 + 1e-9),
          within(suite, "decay_lambda_hat", fit.lambda_hat, rate * (1.0 - 1e-12), rate * (1.0 + 1e-12)),
          at_most(suite, "smoothing_constant_half", s_coarse, 1e6),
          at_most(suite, "smoothing_refinement_ratio", ratio, 2.0)};
}

std::vector<Check> study_weak(const StudySetup& setup, const StudyScale& scale) {
  const std::string suite = "weak";
  const int dim = scale.weak_dim;
  const int modes = std::min(8, dim);
  const DiffusionField field = DiffusionField::autonomous(setup.field.delta);
  const int n_paths = scale.weak_paths;
  const double t_end = 1.0;

  std::vector<VectorXd> finals(static_cast<std::size_t>(n_paths));
  parallel_for(finals.size(), setup.threads, [&](std::size_t i) {
    const WienerPath path = sample_two_sided_path(setup.spectrum, 0.0, t_end, setup.dt, setup.seed + i);
    const PropagatorChain chain = build_chain(field, path, TimeGrid::span(0.0, t_end, setup.dt), dim);
    VectorXd h = VectorXd::Zero(dim);
    for (Index l = 0; l < chain.size(); ++l)
      h = linear_pathwise_step(chain, path, chain.grid().time(l), chain.grid().time(l + 1), h, setup.sigma);
    finals[i] = h.head(modes);
  });

  std::vector<Check> out;
  for (int n = 1; n <= modes; ++n) {
    double m2 = 0.0;
    double m4 = 0.0;
    for (const auto& f : finals) {
      const double x2 = f(n - 1) * f(n - 1);
      m2 += x2;
      m4 += x2 * x2;
    }
    m2 /= n_paths;
    m4 /= n_paths;
    const double lambda = field.delta * laplacian_eigenvalue(n);
    const double exact = setup.spectrum.weight(n) * setup.sigma * setup.sigma *
                         (1.0 - std::exp(-2.0 * lambda * t_end)) / (2.0 * lambda);
    const double se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n_paths);
    out.push_back(at_most(suite, "mode_" + std::to_string(n) + "_variance_z", std::abs(m2 - exact) / se, 3.0));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<ConvergenceResult> strong_convergence(const StudySetup& setup,
                                                  const std::vector<SemilinearProblem>& problems,
                                                  int levels, int reference_level, int paths,
                                                  double horizon) {
  if (levels < 2) throw ConfigError("convergence study needs at least two levels");
  const int first = 4;
  const int last = first + levels - 1;
  if (reference_level <= last) throw ConfigError("reference level must be finer than every level");
  const double fine_dt = std::ldexp(1.0, -reference_level);
  if (paths < 1) throw ConfigError("convergence study needs at least one path");

  // sq[kind][level][path]
  std::vector<std::vector<std::vector<double>>> sq(
      problems.size(), std::vector<std::vector<double>>(static_cast<std::size_t>(levels),
                                                     std::vector<double>(static_cast<std::size_t>(paths))));
  parallel_for(static_cast<std::size_t>(paths), setup.threads, [&](std::size_t i) {
    const WienerPath fine = study_path(setup, 0.0, horizon, setup.seed + 1000 + i, fine_dt);
    const StepFactory f_factory(setup.field, setup.dim, fine);
    const PropagatorChain f_chain = build_chain(f_factory, TimeGrid::span(0.0, horizon, fine_dt));
    std::vector<VectorXd> refs;
    for (const auto& p : problems) refs.push_back(integrate_semilinear(p, f_chain, fine).final_state());
    for (int l = 0; l < levels; ++l) {
      const int level = first + l;
      const WienerPath coarse = restrict_path(fine, 1 << (reference_level - level));
      const StepFactory c_factory(setup.field, setup.dim, coarse);
      const PropagatorChain c_chain =
          build_chain(c_factory, TimeGrid::span(0.0, horizon, std::ldexp(1.0, -level)));
      for (std::size_t k = 0; k < problems.size(); ++k) {
        const VectorXd u = integrate_semilinear(problems[k], c_chain, coarse).final_state();
        sq[k][static_cast<std::size_t>(l)][i] = (u - refs[k]).squaredNorm();
      }
    }
  });

  std::vector<ConvergenceResult> out;
  for (std::size_t k = 0; k < problems.size(); ++k) {
    ConvergenceResult r;
    r.reference_level = reference_level;
    std::vector<double> x;
    std::vector<double> y;
    for (int l = 0; l < levels; ++l) {
      double mean = 0.0;
      for (double e : sq[k][static_cast<std::size_t>(l)]) mean += e;
      mean /= paths;
      const double dt = std::ldexp(1.0, -(first + l));
      r.dts.push_back(dt);
      r.errors.push_back(std::sqrt(mean));
      x.push_back(std::log2(dt));
      y.push_back(std::log2(std::max(std::sqrt(mean), 1e-300)));
    }
    r.order = least_squares_slope(x, y);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Check> study_strong(const StudySetup& setup, const StudyScale& scale) {
  const std::string suite = "strong";
  const std::vector<SemilinearProblem> problems{
      make_problem(setup, NonlinearitySpec::zero(), setup.sigma, VectorXd::Zero(setup.dim)),
      make_problem(setup, NonlinearitySpec::cubic_fisher(), setup.sigma, unit(setup.dim, 1))};
  const auto res = strong_convergence(setup, problems, scale.strong_levels, scale.strong_reference,
                                      scale.strong_paths, 1.0);
  return {at_least(suite, "linear_order", res[0].order, 0.4),
          at_least(suite, "cubic_fisher_order", res[1].order, 0.4)};
}

// ---------------------------------------------------------------------------

std::vector<Check> study_stationarity(const StudySetup& setup, const StudyScale&) {
  const std::string suite = "stationarity";
  const WienerPath path = study_path(setup, -setup.a, 8.0, setup.seed + 2);
  const StepFactory factory(setup.field, setup.dim, path);
  double worst = 0.0;
  double worst_tail = 0.0;
  for (double t : {1.0, 2.0, 4.0})
    for (double s : {1.0, 2.0, 4.0}) {
      const StationarityReport r = stationarity_residual(factory, t, s, setup.a);
      worst = std::max(worst, r.residual / (1.0 + r.z_norm));
      worst_tail = std::max(worst_tail, r.residual - 2.0 * r.truncation_bound - 1e-8 * (1.0 + r.z_norm));
    }
  const StationaryState full = construct_initial(factory, setup.a);
  const StationaryState half = construct_initial(factory, 0.5 * setup.a);
  const StepFactory autonomous(DiffusionField::autonomous(setup.field.delta), setup.dim, path);
  const StationarityReport ra = stationarity_residual(autonomous, 2.0, 1.0, setup.a);
  return {at_most(suite, "residual_over_one_plus_z", worst, 1e-8),
          at_most(suite, "residual_minus_truncation_allowance", worst_tail, 0.0),
          at_most(suite, "autonomous_residual_over_one_plus_z", ra.residual / (1.0 + ra.z_norm), 1e-10),
          at_most(suite, "halved_window_change_over_bound",
                  (full.z0 - half.z0).norm() / half.truncation_bound, 1.0)};
}

std::vector<Check> study_temperedness(const StudySetup& setup, const StudyScale& scale) {
  const std::string suite = "temperedness";
  const double horizon = scale.temper_horizon;
  const double early = 0.2 * horizon;
  const double fit_lo = 0.5 * horizon;
  const std::vector<double> ladder = log_ladder(1.0, horizon, 24, setup.dt, {early, fit_lo, horizon});
  const std::size_t n = static_cast<std::size_t>(scale.temper_paths);
  std::vector<double> late(n);
  std::vector<double> first(n);
  std::vector<double> slopes(n);
  std::vector<double> log_slopes(n);
  parallel_for(n, setup.threads, [&](std::size_t i) {
    const WienerPath path = study_path(setup, -(horizon + setup.a), 0.0, setup.seed + 5000 + i);
    const TemperednessTable table = temperedness_diagnostic(setup.field, path, scale.temper_dim, setup.beta,
                                                            {0.1}, horizon, setup.a, ladder, fit_lo);
    late[i] = table.at(horizon).discounted.front();
    first[i] = table.at(early).discounted.front();
    slopes[i] = table.slope;
    log_slopes[i] = table.log_slope;
  });
  return {at_most(suite, "median_discounted_late_over_early", median(late) / median(first), 1.0),
          within(suite, "median_lnplus_slope", median(slopes), -0.05, 0.05),
          within(suite, "median_ln_slope", median(log_slopes), -0.05, 0.05)};
}

// ---------------------------------------------------------------------------

std::vector<Check> study_transform(const StudySetup& setup, const StudyScale& scale) {
  const std::string suite = "transform";
  const double horizon = 1.0;
  const WienerPath path = study_path(setup, -setup.a, horizon, setup.seed + 3);
  const StepFactory factory(setup.field, setup.dim, path);
  const TimeGrid grid = TimeGrid::span(0.0, horizon, setup.dt);

  const SemilinearProblem linear =
      make_problem(setup, NonlinearitySpec::zero(), 1.0, VectorXd::Zero(setup.dim));
  const TransformReport lin = transform_consistency(linear, factory, grid, setup.a);

  const SemilinearProblem fisher =
      make_problem(setup, NonlinearitySpec::cubic_fisher(), setup.sigma, unit(setup.dim, 1));
  std::vector<double> disc;
  for (int l = scale.transform_levels - 1; l >= 0; --l) {
    const int factor = 1 << l;
    const WienerPath coarse = factor == 1 ? path : restrict_path(path, factor);
    const StepFactory f(setup.field, setup.dim, coarse);
    disc.push_back(
        transform_consistency(fisher, f, TimeGrid::span(0.0, horizon, setup.dt * factor), setup.a).discrepancy);
  }
  std::vector<Check> out{at_most(suite, "linear_relative_discrepancy", lin.relative(), 1e-3)};
  for (std::size_t j = 1; j < disc.size(); ++j)
    out.push_back(at_least(suite, "cubic_fisher_ratio_" + std::to_string(j), disc[j - 1] / disc[j], 1.7));
  return out;
}

std::vector<Check> study_energy(const StudySetup& setup, const StudyScale& scale) {
  const std::string suite = "energy";
  const double horizon = scale.energy_horizon;
  const TimeGrid grid = TimeGrid::span(0.0, horizon, setup.dt);
  const double rate = setup.field.ellipticity_floor() * kPi * kPi;
  const VectorXd u0 = unit(setup.dim, 1, 2.0);

  const WienerPath path = study_path(setup, -setup.a, horizon, setup.seed + 4);
  const StepFactory factory(setup.field, setup.dim, path);
  const PropagatorChain chain = build_chain(factory, grid, setup.threads);
  const OUTrajectory none = zero_ou(grid, setup.dim);

  const SemilinearProblem cubic = make_problem(setup, NonlinearitySpec::pure_cubic(), 0.0, u0);
  const Trajectory vc = integrate_transformed(cubic, chain, none, u0);
  double decay = 0.0;
  double rise = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < vc.states.size(); ++k) {
    const double t = grid.time(static_cast<Index>(k));
    decay = std::max(decay, vc.states[k].norm() / (std::exp(-rate * t * (1.0 - 1e-2)) * u0.norm()));
    if (k > 0) rise = std::max(rise, vc.states[k].norm() - vc.states[k - 1].norm());
  }

  const NonlinearitySpec fisher_nl = NonlinearitySpec::cubic_fisher();
  const SemilinearProblem fisher = make_problem(setup, fisher_nl, 0.0, u0);
  const Trajectory vf = integrate_transformed(fisher, chain, none, u0);
  double tail = 0.0;
  for (std::size_t k = vf.states.size() / 2; k < vf.states.size(); ++k)
    tail = std::max(tail, vf.states[k].squaredNorm());
  const double limsup_bound = 2.0 * fisher_nl.c1 / rate * 1.1;

  const double c_mon = calibrate_monitor_constant(vf, none, setup.field, fisher_nl, setup.alpha, 0.0);
  const EnergyTable calib = energy_monitor(vf, none, setup.field, fisher_nl, {setup.alpha, 0.0, c_mon});

  const std::size_t runs = static_cast<std::size_t>(scale.energy_runs);
  std::vector<double> margins(runs);
  parallel_for(runs, setup.threads, [&](std::size_t i) {
    const WienerPath p = study_path(setup, -setup.a, horizon, setup.seed + 7000 + i);
    const StepFactory f(setup.field, setup.dim, p);
    const PropagatorChain c = build_chain(f, grid);
    const StationaryState z0 = construct_initial(f, setup.a);
    const OUTrajectory z = propagate(z0, c, p, setup.alpha);
    const SemilinearProblem prob = make_problem(setup, fisher_nl, setup.sigma, u0);
    const Trajectory v = integrate_transformed(prob, c, z, u0 - setup.sigma * z0.z0);
    margins[i] = energy_monitor(v, z, setup.field, fisher_nl, {setup.alpha, setup.sigma, c_mon}).min_margin;
  });

  return {at_most(suite, "pure_cubic_decay_ratio", decay, 1.0),
          at_most(suite, "pure_cubic_norm_increase", rise, 0.0),
          at_most(suite, "cubic_fisher_limsup_sq_norm", tail, limsup_bound),
          at_least(suite, "calibration_margin", calib.min_margin, 2.0 * (1.0 - 1e-12)),
          at_least(suite, "stochastic_min_margin", *std::min_element(margins.begin(), margins.end()), 1.0)};
}

// ---------------------------------------------------------------------------

std::vector<Check> study_pullback(const StudySetup& setup, const StudyScale& scale) {
  const std::string suite = "pullback";
  const WienerPath path = study_path(setup, -2.0 * setup.a, 1.0, setup.seed + 6);
  const StepFactory factory(setup.field, setup.dim, path);
  const std::vector<VectorXd> ensemble =
      default_ensemble(setup.dim, scale.ball_radius, setup.alpha, scale.ensemble_size, setup.seed);
  PullbackParams params;
  params.alpha = setup.alpha;
  params.eta = setup.eta;
  params.threads = setup.threads;

  const SemilinearProblem linear =
      make_problem(setup, NonlinearitySpec::zero(), setup.sigma, VectorXd::Zero(setup.dim));
  const PullbackEstimate lin = pullback_estimate(linear, factory, {4.0, 8.0}, ensemble, params);
  const VectorXd target = setup.sigma * construct_initial(factory, setup.a).z0;
  double err[2] = {0.0, 0.0};
  for (std::size_t j = 0; j < 2; ++j)
    for (const auto& x : lin.endpoints[j]) err[j] = std::max(err[j], (x - target).norm());

  const SemilinearProblem cubic =
      make_problem(setup, NonlinearitySpec::pure_cubic(), 0.0, VectorXd::Zero(setup.dim));
  const PullbackEstimate pc = pullback_estimate(cubic, factory, {1.0, 8.0}, ensemble, params);

  const SemilinearProblem fisher =
      make_problem(setup, NonlinearitySpec::cubic_fisher(), setup.sigma, VectorXd::Zero(setup.dim));
  const PullbackEstimate pf = pullback_estimate(fisher, factory, {1.0, 2.0, 4.0, 8.0}, ensemble, params);
  double step_ratio = 0.0;
  for (std::size_t j = 1; j < pf.diameters.size(); ++j)
    step_ratio = std::max(step_ratio, pf.diameters[j] / pf.diameters[j - 1]);

  AbsorbingParams ap;
  ap.alpha = setup.alpha;
  ap.eta = setup.eta;
  ap.dim = setup.dim;
  const double scale_fn = attractor_scale(absorbing_diagnostics(setup.field, path, setup.a, ap), setup.sigma, 3.0);
  const InvarianceProbe probe = invariance_probe(fisher, factory, 8.0, 1.0, ensemble, params);

  return {at_most(suite, "linear_error_ratio_8_over_4", err[1] / err[0], 0.1),
          at_most(suite, "linear_error_at_8", err[1], 1e-3),
          at_most(suite, "pure_cubic_diameter_ratio", pc.diameters[1] / pc.diameters[0], 1e-3),
          at_most(suite, "cubic_fisher_diameter_step_ratio", step_ratio, 1.05),
          at_most(suite, "cubic_fisher_blowups", pf.blowups, 0.0),
          at_most(suite, "eta_max_over_scale", pf.eta_max.back() / scale_fn, 10.0),
          at_most(suite, "alpha_max_over_scale", pf.alpha_max.back() / scale_fn, 10.0),
          at_most(suite, "invariance_distance_minus_allowance",
                  probe.distance - 2.0 * probe.increment - 1e-12, 0.0)};
}

std::vector<Check> run_all_studies(const StudySetup& setup, const StudyScale& scale) {
  std::vector<Check> all;
  for (auto study : {study_evolution, study_stability, study_weak, study_strong, study_stationarity,
                     study_temperedness, study_transform, study_energy, study_pullback}) {
    auto part = study(setup, scale);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

}  // namespace randattract
