#include <doctest.h>

#include "randattract/evolution.hpp"
#include "support.hpp"

#include <sstream>

using namespace randattract;

namespace {

WienerPath noisy(std::uint64_t seed, double t_hi = 2.0) {
  return sample_two_sided_path({64, 1.0}, -9.0, t_hi, 1.0 / 256, seed);
}

}  // namespace

TEST_CASE("identity and composition") {
  const WienerPath w = noisy(1);
  const PropagatorChain chain = build_chain(DiffusionField{}, w, TimeGrid::span(0.0, 2.0, 1.0 / 256), 32);
  const VectorXd v = VectorXd::LinSpaced(32, 1.0, -1.0);
  CHECK(chain.apply(0.75, 0.75, v) == v);
  CHECK(chain.evolution(1.0, 1.0) == MatrixXd::Identity(32, 32));
  const VectorXd direct = chain.apply(1.5, 0.25, v);
  const VectorXd split = chain.apply(1.5, 1.0, chain.apply(1.0, 0.25, v));
  CHECK(direct == split);
  CHECK_THROWS_AS(chain.apply(0.25, 1.0, v), OrderingError);
  CHECK_THROWS_AS(chain.apply(0.3, 0.25, v), AlignmentError);
}

TEST_CASE("cocycle residual vanishes") {
  const WienerPath w = noisy(2, 4.0);
  for (auto [t, s] : {std::pair{1.0, 0.5}, std::pair{2.0, 1.0}, std::pair{0.25, 3.0}}) {
    const CocycleResidual r = cocycle_residual(DiffusionField{}, w, t, s, 32);
    CHECK(r.residual <= 1e-10 * r.reference);
  }
}

TEST_CASE("midpoint propagator is second order on smooth drivers") {
  // smooth synthetic path, so only the time discretisation of the generator
  // contributes
  const DiffusionField f;
  const int dim = 16;
  auto propagator = [&](int level) {
    const double dt = std::ldexp(1.0, -level);
    const WienerPath w = test::synthetic_path(-9.0, 1.0, dt, 2, [](double t) { return 3.0 * std::sin(2.0 * t); });
    return build_chain(f, w, TimeGrid::span(0.0, 1.0, dt), dim).evolution(1.0, 0.0);
  };
  const MatrixXd ref = propagator(11);
  const double e4 = spectral_norm(propagator(4) - ref);
  const double e5 = spectral_norm(propagator(5) - ref);
  const double e6 = spectral_norm(propagator(6) - ref);
  CHECK(test::log2_ratio(e4, e5) >= 1.9);
  CHECK(test::log2_ratio(e5, e6) >= 1.9);
}

TEST_CASE("contraction at the Poincaré rate") {
  const WienerPath w = noisy(3);
  const PropagatorChain chain = build_chain(DiffusionField{}, w, TimeGrid::span(0.0, 2.0, 1.0 / 256), 64);
  const auto pairs = sample_pairs(chain.grid(), 50, 9);
  const DecayFit fit = decay_fit(chain, pairs);
  CHECK(fit.lambda_hat == doctest::Approx(0.1 * kPi * kPi));
  CHECK(fit.c_hat <= 1.0 + 1e-9);
  const DecayFit env = envelope_fit(chain);
  CHECK(env.c_hat >= fit.c_hat);
  CHECK(env.c_hat <= 1.0 + 1e-9);
}

TEST_CASE("smoothing constant of the heat semigroup") {
  // sup_x x^{1/2} e^{-x} = (2e)^{-1/2}
  const PropagatorChain chain =
      build_chain(DiffusionField::autonomous(1.0), noisy(4), TimeGrid::span(0.0, 1.0, 1.0 / 256), 64);
  const auto pairs = sample_pairs(chain.grid(), 200, 1, true);
  const double c = smoothing_estimate(chain, 0.5, pairs, 0.0);
  CHECK(c <= 0.428882 + 1e-6);
  CHECK(c >= 0.40);
}

TEST_CASE("pair sampling") {
  const TimeGrid g = TimeGrid::span(0.0, 1.0, 1.0 / 64);
  const auto a = sample_pairs(g, 30, 5);
  const auto b = sample_pairs(g, 30, 5);
  REQUIRE(a.size() == 30);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].t == b[i].t);
    CHECK(a[i].s == b[i].s);
    CHECK(a[i].s <= a[i].t);
  }
  for (const auto& p : sample_pairs(g, 30, 5, true)) CHECK(p.s < p.t);
}

TEST_CASE("decay table") {
  const PropagatorChain chain = build_chain(DiffusionField{}, noisy(5), TimeGrid::span(0.0, 1.0, 1.0 / 256), 16);
  const auto pairs = sample_pairs(chain.grid(), 5, 2);
  std::ostringstream out;
  write_decay_csv(out, chain, pairs, decay_fit(chain, pairs));
  std::istringstream in(out.str());
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++rows;
  CHECK(rows == 6);
}
