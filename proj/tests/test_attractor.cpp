#include <doctest.h>

#include "randattract/attractor.hpp"
#include "support.hpp"

using namespace randattract;

namespace {

WienerPath path(std::uint64_t seed, double t_lo, double t_hi, int modes = 16) {
  return sample_two_sided_path({modes, 1.0}, t_lo, t_hi, 1.0 / 256, seed);
}

SemilinearProblem make(const NonlinearitySpec& f, double sigma, int dim, const DiffusionField& field = {}) {
  SemilinearProblem p;
  p.field = field;
  p.nonlinearity = f;
  p.sigma = sigma;
  p.forcing = VectorXd::Zero(dim);
  p.u0 = VectorXd::Zero(dim);
  return p;
}

}  // namespace

TEST_CASE("exponential Euler on a manufactured linear problem") {
  // dv/dt = A v + (delta pi^2 - 1) v with A = -delta (n pi)^2: v = e^{-t} e_1
  const double delta = 0.5;
  const double c = delta * kPi * kPi - 1.0;
  const NonlinearitySpec f = NonlinearitySpec::custom_fn([c](double u) { return c * u; }, 1.0);
  const SpatialQuadrature quad = SpatialQuadrature::for_nonlinearity(4, 3.0);
  std::vector<double> errors;
  for (int level = 4; level <= 7; ++level) {
    const double dt = std::ldexp(1.0, -level);
    const WienerPath w = test::synthetic_path(-9.0, 1.0, dt, 4, [](double) { return 0.0; });
    const PropagatorChain chain = build_chain(DiffusionField::autonomous(delta), w, TimeGrid::span(0.0, 1.0, dt), 4);
    VState s{test::unit(4, 1), 0.0};
    const VectorXd zero = VectorXd::Zero(4);
    while (s.t < 1.0 - 0.5 * dt) s = v_step(chain, s, zero, 0.0, f, zero, quad);
    CHECK(s.t == 1.0);
    errors.push_back((s.v - std::exp(-1.0) * test::unit(4, 1)).norm());
  }
  for (std::size_t i = 1; i < errors.size(); ++i) CHECK(test::log2_ratio(errors[i - 1], errors[i]) >= 0.9);
}

TEST_CASE("transform reproduces the linear solution") {
  const WienerPath w = path(1, -17.0, 1.0, 32);
  const StepFactory factory(DiffusionField{}, 16, w);
  SemilinearProblem p = make(NonlinearitySpec::zero(), 0.1, 16);
  p.u0 = test::unit(16, 1);
  const TransformReport r = transform_consistency(p, factory, TimeGrid::span(0.0, 1.0, 1.0 / 256), 8.0);
  CHECK(r.relative() <= 1e-12);
}

TEST_CASE("zero-noise cubic energy decays") {
  const WienerPath w = path(2, -17.0, 2.0);
  const StepFactory factory(DiffusionField{}, 16, w);
  SemilinearProblem p = make(NonlinearitySpec::pure_cubic(), 0.0, 16);
  const PropagatorChain chain = build_chain(factory, TimeGrid::span(0.0, 2.0, 1.0 / 256));
  const OUTrajectory z = propagate(construct_initial(factory, 8.0), chain, w);
  const VectorXd v0 = 2.0 * test::unit(16, 1) - test::unit(16, 2);
  const Trajectory v = integrate_transformed(p, chain, z, v0);
  REQUIRE(v.completed());
  const double rate = p.field.ellipticity_floor() * kPi * kPi * (1.0 - 1e-2);
  for (std::size_t k = 0; k < v.states.size(); k += 32) {
    const double t = v.grid.time(static_cast<Index>(k));
    CHECK(v.states[k].norm() <= std::exp(-rate * t) * v0.norm() * (1.0 + 1e-12));
  }
  EnergyParams ep;
  ep.sigma = 0.0;
  ep.monitor_constant = 2.0 * p.nonlinearity.c1;
  const EnergyTable table = energy_monitor(v, z, p.field, p.nonlinearity, ep);
  CHECK(table.rate == doctest::Approx(0.1 * kPi * kPi));
  CHECK(table.flagged == 0);
  CHECK(table.min_margin >= 1.0);
}

TEST_CASE("calibrated monitor holds on its own run") {
  const WienerPath w = path(3, -17.0, 2.0);
  const StepFactory factory(DiffusionField{}, 16, w);
  SemilinearProblem p = make(NonlinearitySpec::cubic_fisher(), 0.1, 16);
  const PropagatorChain chain = build_chain(factory, TimeGrid::span(0.0, 2.0, 1.0 / 256));
  const OUTrajectory z = propagate(construct_initial(factory, 8.0), chain, w);
  const Trajectory v = integrate_transformed(p, chain, z, test::unit(16, 1));
  const double c = calibrate_monitor_constant(v, z, p.field, p.nonlinearity, 0.2, 0.1);
  CHECK(c >= 2.0 * p.nonlinearity.c1);
  EnergyParams ep;
  ep.sigma = 0.1;
  ep.monitor_constant = c;
  CHECK(energy_monitor(v, z, p.field, p.nonlinearity, ep).min_margin >= 2.0 * (1.0 - 1e-9));
}

TEST_CASE("ensemble geometry") {
  const auto e = default_ensemble(16, 2.0, 0.2, 33, 7);
  REQUIRE(e.size() == 33);
  CHECK(e[0].isZero(0.0));
  for (int i = 1; i <= 16; ++i) CHECK(fractional_norm(e[i], 0.2) == doctest::Approx(2.0));
  for (const auto& x : e) CHECK(fractional_norm(x, 0.2) <= 2.0 * (1.0 + 1e-12));
  const auto again = default_ensemble(16, 2.0, 0.2, 33, 7);
  CHECK(again.back() == e.back());
  CHECK(hausdorff_distance(e, e, 0.2) == 0.0);
  const std::vector<VectorXd> a{e[1]}, b{e[2], e[3]};
  CHECK(hausdorff_distance(a, b, 0.2) == hausdorff_distance(b, a, 0.2));
  CHECK(cloud_diameter({e[1], e[2]}, 0.2) == doctest::Approx(fractional_norm(e[1] - e[2], 0.2)));
}

TEST_CASE("attractor scale") {
  AbsorbingDiagnostics d;
  d.z_eta = 2.0;
  d.r2_integral = 3.0;
  CHECK(attractor_scale(d, 0.5, 3.0) == doctest::Approx(0.5 * 2.0 + std::sqrt(1.0 + 0.0625 * 3.0)));
}

TEST_CASE("zero-noise cubic pullback collapses") {
  const WienerPath w = path(4, -17.0, 0.0);
  const StepFactory factory(DiffusionField{}, 16, w);
  const SemilinearProblem p = make(NonlinearitySpec::pure_cubic(), 0.0, 16);
  const PullbackEstimate est = pullback_estimate(p, factory, {1.0, 4.0, 8.0}, default_ensemble(16, 2.0, 0.2, 9, 1), {});
  CHECK(est.blowups == 0);
  CHECK(est.monotone);
  CHECK(est.diameters[2] <= 1e-3 * est.diameters[0]);
  CHECK(est.hausdorff_steps.size() == 2);
}

TEST_CASE("linear pullback converges to the stationary noise") {
  const WienerPath w = path(5, -17.0, 0.0);
  const StepFactory factory(DiffusionField{}, 16, w);
  const SemilinearProblem p = make(NonlinearitySpec::zero(), 0.1, 16);
  const PullbackEstimate est = pullback_estimate(p, factory, {4.0, 8.0}, default_ensemble(16, 2.0, 0.2, 5, 2), {});
  const VectorXd target = p.sigma * construct_initial(factory, 8.0).z0;
  double err = 0.0;
  for (const auto& x : est.endpoints[1]) err = std::max(err, (x - target).norm());
  CHECK(err <= 1e-3);
}
