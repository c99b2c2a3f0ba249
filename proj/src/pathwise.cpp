#include "randattract/pathwise.hpp"

#include "randattract/io.hpp"

#include <algorithm>
#include <ostream>

namespace randattract {

NonlinearitySpec NonlinearitySpec::cubic_fisher() {
  // u^2 - u^4 <= -u^4/2 + 1/2 by Young.
  return {NonlinearityKind::CubicFisher, 3.0, 0.5, 0.5, 1.5, {}};
}

NonlinearitySpec NonlinearitySpec::pure_cubic() {
  return {NonlinearityKind::PureCubic, 3.0, 1.0, 0.0, 1.5, {}};
}

NonlinearitySpec NonlinearitySpec::zero() {
  return {NonlinearityKind::Zero, 3.0, 0.0, 0.0, 0.0, {}};
}

NonlinearitySpec NonlinearitySpec::custom_fn(std::function<double(double)> fn, double rho) {
  return {NonlinearityKind::Custom, rho, 0.0, 0.0, 0.0, std::move(fn)};
}

double NonlinearitySpec::operator()(double u) const {
  switch (kind) {
    case NonlinearityKind::CubicFisher:
      return u - u * u * u;
    case NonlinearityKind::PureCubic:
      return -u * u * u;
    case NonlinearityKind::Zero:
      return 0.0;
    case NonlinearityKind::Custom:
      return custom(u);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

SpatialQuadrature::SpatialQuadrature(int dim, int intervals)
    : intervals_(intervals), weight_(1.0 / intervals), basis_(intervals - 1, dim) {
  if (dim < 1 || intervals < 2) throw ConfigError("spatial quadrature needs M >= 1, N >= 2");
  for (int j = 1; j < intervals; ++j) {
    const double x = static_cast<double>(j) / intervals;
    for (int n = 1; n <= dim; ++n) basis_(j - 1, n - 1) = std::sqrt(2.0) * std::sin(kPi * n * x);
  }
}

SpatialQuadrature SpatialQuadrature::for_nonlinearity(int dim, double rho) {
  const int r = std::max(1, static_cast<int>(std::ceil(rho)));
  return SpatialQuadrature(dim, 4 * r * dim);
}

double SpatialQuadrature::lp_power(const VectorXd& coeffs, double p) const {
  return integrate(synthesize(coeffs).array().abs().pow(p).matrix());
}

VectorXd nemytskii(const NonlinearitySpec& f, const VectorXd& vec, const SpatialQuadrature& quad) {
  if (f.is_zero()) return VectorXd::Zero(vec.size());
  if (!vec.allFinite()) throw NumericalError("non-finite state passed to the reaction term");
  VectorXd values = quad.synthesize(vec);
  for (Index i = 0; i < values.size(); ++i) values(i) = f(values(i));
  VectorXd out = quad.project(values);
  if (!out.allFinite()) throw NumericalError("non-finite reaction term");
  return out;
}

void SemilinearProblem::validate(int dim) const {
  field.validate();
  if (sigma < 0.0) throw ConfigError("noise intensity sigma must be nonnegative");
  if (u0.size() != dim) throw ConfigError("initial state dimension differs from M");
  if (forcing.size() != dim) throw ConfigError("forcing dimension differs from M");
  if (!(blowup_threshold > 0.0)) throw ConfigError("blow-up threshold must be positive");
  if (!std::isfinite(fractional_norm(u0, alpha)) || !std::isfinite(fractional_norm(forcing, alpha)))
    throw ConfigError("u0 and f must have finite X_alpha norm");
}

// ---------------------------------------------------------------------------

VectorXd noise_increment(const WienerPath& path, Index k, int dim) {
  VectorXd dw = VectorXd::Zero(dim);
  const VectorXd inc = path.increment(k, k + 1);
  const int n = std::min<int>(dim, static_cast<int>(inc.size()));
  dw.head(n) = inc.head(n);
  return dw;
}

namespace {

Index chain_offset(const PropagatorChain& chain, const WienerPath& path) {
  if (std::abs(chain.grid().dt - path.dt()) > 1e-12 * path.dt())
    throw AlignmentError("chain and path use different time steps");
  return chain.grid().first_index();
}

}  // namespace

VectorXd corrector_integral(const PropagatorChain& chain, const WienerPath& path, double t_a,
                            double t_b) {
  if (t_b < t_a) throw OrderingError("corrector needs t_a <= t_b");
  const Index off = chain_offset(chain, path);
  const Index la = chain.grid().local(t_a);
  const Index lb = chain.grid().local(t_b);
  const int dim = chain.dim();
  VectorXd c = VectorXd::Zero(dim);
  for (Index l = la; l < lb; ++l) {
    const Index k = off + l;
    const PropagatorStep& st = chain.step(l);
    const VectorXd dw = noise_increment(path, k, dim);
    VectorXd rest = VectorXd::Zero(dim);  // W_b - W_{k+1}
    const VectorXd inc = path.increment(k + 1, off + lb);
    const int n = std::min<int>(dim, static_cast<int>(inc.size()));
    rest.head(n) = inc.head(n);
    c = st.propagate(c) + (st.propagate(rest) - rest) + st.corrector(dw);
  }
  return c;
}

VectorXd linear_pathwise_step(const PropagatorChain& chain, const WienerPath& path, double t_k,
                              double t_k1, const VectorXd& h, double sigma) {
  const Index off = chain_offset(chain, path);
  const Index l = chain.grid().local(t_k);
  if (chain.grid().local(t_k1) != l + 1) throw AlignmentError("linear step needs consecutive times");
  const PropagatorStep& st = chain.step(l);
  if (sigma == 0.0) return st.propagate(h);
  return st.propagate(h) + sigma * st.noise(noise_increment(path, off + l, chain.dim()));
}

Trajectory integrate_semilinear(const SemilinearProblem& problem, const PropagatorChain& chain,
                                const WienerPath& path, const TimeGrid& grid) {
  const int dim = chain.dim();
  problem.validate(dim);
  const Index off = chain_offset(chain, path);
  const Index l0 = chain.grid().local(grid.t0);
  chain.grid().local(grid.t_end());

  const bool reactive = !problem.nonlinearity.is_zero() || problem.forcing.any();
  const SpatialQuadrature quad = SpatialQuadrature::for_nonlinearity(dim, problem.nonlinearity.rho);
  const double dt = grid.dt;

  Trajectory traj;
  traj.grid = grid;
  traj.states.reserve(static_cast<std::size_t>(grid.steps + 1));
  traj.states.push_back(problem.u0);
  VectorXd u = problem.u0;
  for (Index j = 0; j < grid.steps; ++j) {
    const Index l = l0 + j;
    const PropagatorStep& st = chain.step(l);
    VectorXd next =
        reactive ? st.propagate(u + dt * (nemytskii(problem.nonlinearity, u, quad) + problem.forcing))
                 : st.propagate(u);
    if (problem.sigma != 0.0) next += problem.sigma * st.noise(noise_increment(path, off + l, dim));

    const double norm = fractional_norm(next, problem.alpha);
    if (std::isnan(norm)) throw NumericalError("NaN state during semilinear integration");
    if (norm > problem.blowup_threshold) {
      traj.status = TrajectoryStatus::BlowUp;
      traj.blowup_time = grid.time(j + 1);
      traj.grid.steps = j;
      return traj;
    }
    u = std::move(next);
    traj.states.push_back(u);
  }
  return traj;
}

Trajectory integrate_semilinear(const SemilinearProblem& problem, const PropagatorChain& chain,
                                const WienerPath& path) {
  return integrate_semilinear(problem, chain, path, chain.grid());
}

Trajectory autonomous_reference(const SemilinearProblem& problem, const WienerPath& fine_path,
                                const TimeGrid& coarse_grid, int refine, int dim) {
  if (refine < 1 || (refine & (refine - 1)) != 0)
    throw ConfigError("refinement factor must be a power of two");
  const double fine_dt = coarse_grid.dt / refine;
  if (std::abs(fine_path.dt() - fine_dt) > 1e-12 * fine_dt)
    throw AlignmentError("reference path must be sampled at dt / refine");
  const TimeGrid fine_grid = TimeGrid::span(coarse_grid.t0, coarse_grid.t_end(), fine_dt);
  const PropagatorChain chain = build_chain(problem.field, fine_path, fine_grid, dim);
  const Trajectory fine = integrate_semilinear(problem, chain, fine_path);

  Trajectory out;
  out.grid = coarse_grid;
  out.status = fine.status;
  out.blowup_time = fine.blowup_time;
  for (std::size_t k = 0; k < fine.states.size(); k += static_cast<std::size_t>(refine))
    out.states.push_back(fine.states[k]);
  out.grid.steps = static_cast<Index>(out.states.size()) - 1;
  return out;
}

// ---------------------------------------------------------------------------

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, double alpha) {
  out << "# status=" << (traj.completed() ? "completed" : "blowup");
  if (!traj.completed()) out << " blowup_time=" << format_real(traj.blowup_time);
  out << "\n";
  out << "t,norm_l2,norm_x_alpha";
  for (int n = 1; n <= 8; ++n) out << ",mode_" << n;
  out << "\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const VectorXd& u = traj.states[k];
    out << format_real(traj.grid.time(static_cast<Index>(k))) << ',' << format_real(u.norm()) << ','
        << format_real(fractional_norm(u, alpha));
    for (int n = 0; n < 8; ++n) out << ',' << format_real(n < u.size() ? u(n) : 0.0);
    out << "\n";
  }
}

void write_ensemble_csv(std::ostream& out, const std::vector<Trajectory>& runs) {
  std::vector<const Trajectory*> done;
  for (const auto& r : runs)
    if (r.completed()) done.push_back(&r);
  out << "# members=" << runs.size() << " completed=" << done.size() << "\n";
  out << "t,mean_norm";
  for (int n = 1; n <= 8; ++n) out << ",var_mode_" << n;
  out << "\n";
  if (done.empty()) return;
  const std::size_t count = done.front()->states.size();
  const double m = static_cast<double>(done.size());
  for (std::size_t k = 0; k < count; ++k) {
    double mean_norm = 0.0;
    for (const auto* r : done) mean_norm += r->states[k].norm();
    out << format_real(done.front()->grid.time(static_cast<Index>(k))) << ','
        << format_real(mean_norm / m);
    for (int n = 0; n < 8; ++n) {
      double s = 0.0;
      double s2 = 0.0;
      for (const auto* r : done) {
        const double x = n < r->states[k].size() ? r->states[k](n) : 0.0;
        s += x;
        s2 += x * x;
      }
      const double mean = s / m;
      const double var = done.size() > 1 ? (s2 - m * mean * mean) / (m - 1.0) : 0.0;
      out << ',' << format_real(var);
    }
    out << "\n";
  }
}

}  // namespace randattract
