#include <doctest.h>

#include "randattract/pathwise.hpp"
#include "support.hpp"

#include <sstream>

using namespace randattract;

TEST_CASE("corrector against a ramp path") {
  // int_0^T e^{-lam tau} (-lam) tau dtau = -(1 - e^{-lam T}(1 + lam T)) / lam
  const DiffusionField f = DiffusionField::autonomous(0.5);
  const double lam = 0.5 * kPi * kPi;
  const double exact = -(1.0 - std::exp(-lam) * (1.0 + lam)) / lam;
  CHECK(exact == doctest::Approx(-0.19399310366));
  std::vector<double> errors;
  for (int level = 5; level <= 8; ++level) {
    const double dt = std::ldexp(1.0, -level);
    const WienerPath ramp = test::synthetic_path(0.0, 1.0, dt, 4, [](double t) { return t; });
    const PropagatorChain chain = build_chain(f, ramp, TimeGrid::span(0.0, 1.0, dt), 4);
    const VectorXd c = corrector_integral(chain, ramp, 0.0, 1.0);
    errors.push_back(std::abs(c(0) - exact));
    CHECK(c.tail(3).isZero(0.0));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) CHECK(test::log2_ratio(errors[i - 1], errors[i]) >= 1.9);
  CHECK(errors.back() <= 5e-6);
}

TEST_CASE("cubic of the first mode") {
  // sin^3 = (3 sin x - sin 3x) / 4
  const SpatialQuadrature quad = SpatialQuadrature::for_nonlinearity(8, 3.0);
  const VectorXd r = nemytskii(NonlinearitySpec::pure_cubic(), test::unit(8, 1), quad);
  CHECK(r(0) == doctest::Approx(-1.5).epsilon(1e-13));
  CHECK(r(2) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(std::abs(r(1)) <= 1e-13);
  CHECK(r.tail(5).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(r(0) / r(2) == doctest::Approx(-3.0));
}

TEST_CASE("reaction terms") {
  CHECK(NonlinearitySpec::cubic_fisher()(2.0) == -6.0);
  CHECK(NonlinearitySpec::pure_cubic()(-2.0) == 8.0);
  CHECK(NonlinearitySpec::zero()(3.0) == 0.0);
  // dissipativity F(u) u <= -C0 |u|^{1+rho} + C1
  for (const auto& f : {NonlinearitySpec::cubic_fisher(), NonlinearitySpec::pure_cubic()})
    for (double u = -5.0; u <= 5.0; u += 0.125) CHECK(f(u) * u <= -f.c0 * std::pow(std::abs(u), 1.0 + f.rho) + f.c1 + 1e-12);
}

TEST_CASE("quadrature integrates squared modes") {
  const SpatialQuadrature quad(8, 64);
  CHECK(quad.lp_power(test::unit(8, 3), 2.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(quad.integrate(quad.synthesize(test::unit(8, 2))) == doctest::Approx(0.0).epsilon(1e-13));
}

namespace {

SemilinearProblem problem(double sigma, const NonlinearitySpec& f, int dim = 16) {
  SemilinearProblem p;
  p.field = DiffusionField{};
  p.nonlinearity = f;
  p.forcing = VectorXd::Zero(dim);
  p.sigma = sigma;
  p.u0 = test::unit(dim, 1);
  return p;
}

Trajectory run(const SemilinearProblem& p, std::uint64_t seed) {
  const WienerPath w = sample_two_sided_path({64, 1.0}, -9.0, 1.0, 1.0 / 256, seed);
  const PropagatorChain chain = build_chain(p.field, w, TimeGrid::span(0.0, 1.0, 1.0 / 256), static_cast<int>(p.u0.size()));
  return integrate_semilinear(p, chain, w);
}

}  // namespace

TEST_CASE("zero noise does not see the increments") {
  const SemilinearProblem p = problem(0.0, NonlinearitySpec::cubic_fisher());
  const WienerPath w = sample_two_sided_path({64, 1.0}, -9.0, 1.0, 1.0 / 256, 3);
  const PropagatorChain chain = build_chain(p.field, w, TimeGrid::span(0.0, 1.0, 1.0 / 256), 16);
  const Trajectory traj = integrate_semilinear(p, chain, w);
  // same generator, different increments
  MatrixXd frozen(64, w.last_index() - w.first_index() + 1);
  for (Index k = w.first_index(); k <= w.last_index(); ++k) frozen.col(k - w.first_index()) = w.value(k);
  for (Index k = 1; k <= w.last_index(); ++k) frozen.col(k - w.first_index()).tail(63) *= -1.0;
  const WienerPath other = WienerPath::from_values(w.dt(), w.first_index(), frozen);
  const Trajectory traj2 = integrate_semilinear(p, build_chain(p.field, other, chain.grid(), 16), other);
  CHECK(traj.final_state() == traj2.final_state());
}

TEST_CASE("noise moves the solution") {
  const Trajectory quiet = run(problem(0.0, NonlinearitySpec::cubic_fisher()), 4);
  const Trajectory loud = run(problem(0.1, NonlinearitySpec::cubic_fisher()), 4);
  CHECK((quiet.final_state() - loud.final_state()).norm() > 1e-3);
  CHECK(run(problem(0.1, NonlinearitySpec::cubic_fisher()), 4).final_state() == loud.final_state());
}

TEST_CASE("blow-up is detected and reported") {
  SemilinearProblem p = problem(0.1, NonlinearitySpec::custom_fn([](double u) { return u * u * u; }, 3.0));
  p.u0 *= 50.0;
  p.blowup_threshold = 1e3;
  const Trajectory traj = run(p, 5);
  CHECK_FALSE(traj.completed());
  CHECK(traj.blowup_time > 0.0);
  CHECK(traj.blowup_time < 1.0);
}

TEST_CASE("problem validation") {
  SemilinearProblem p = problem(0.1, NonlinearitySpec::zero());
  CHECK_NOTHROW(p.validate(16));
  CHECK_THROWS_AS(p.validate(8), ConfigError);
  p.sigma = -1.0;
  CHECK_THROWS_AS(p.validate(16), ConfigError);
}

TEST_CASE("trajectory output") {
  const Trajectory traj = run(problem(0.1, NonlinearitySpec::cubic_fisher(), 8), 6);
  std::ostringstream out;
  write_trajectory_csv(out, traj, 0.2);
  CHECK(out.str().find("t,") != std::string::npos);
  std::ostringstream ens;
  write_ensemble_csv(ens, {traj, traj});
  CHECK(ens.str().size() > 0);
}
