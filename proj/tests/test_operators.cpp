#include <doctest.h>

#include "randattract/operators.hpp"
#include "support.hpp"

using namespace randattract;

namespace {
WienerPath quiet_path() { return test::synthetic_path(-9.0, 2.0, 1.0 / 64, 4, [](double) { return 0.0; }); }
}  // namespace

TEST_CASE("unit coefficient gives the Dirichlet Laplacian") {
  const GalerkinOperator op = assemble_operator(DiffusionField::autonomous(1.0), 0.0, quiet_path(), 16);
  for (int n = 1; n <= 16; ++n) CHECK(op.matrix(n - 1, n - 1) == doctest::Approx(-laplacian_eigenvalue(n)).epsilon(1e-12));
  MatrixXd off = op.matrix;
  off.diagonal().setZero();
  CHECK(off.cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(laplacian_eigenvalue(1) == doctest::Approx(9.8696044010893586));
}

TEST_CASE("fractional norm of the first mode") {
  CHECK(fractional_norm(test::unit(8, 1), 0.2) == doctest::Approx(1.5807382019317313).epsilon(1e-12));
  CHECK(fractional_norm(test::unit(8, 2), 0.5) == doctest::Approx(2.0 * kPi).epsilon(1e-12));
  CHECK(fixed_laplacian_weights(3, 0.5)(2) == doctest::Approx(3.0 * kPi));
  CHECK_THROWS_AS(check_fractional_exponent(1.0), ConfigError);
}

TEST_CASE("ellipticity is enforced") {
  DiffusionField f;
  f.amp = 0.25;
  CHECK_THROWS_WITH_AS(f.validate(), doctest::Contains("ellipticity"), ConfigError);
  f.amp = 0.2;
  CHECK_NOTHROW(f.validate());
  CHECK(f.ellipticity_floor() == doctest::Approx(0.1));
}

TEST_CASE("driver of a ramp path") {
  // zeta = int_{-a}^0 e^{kappa s} s ds = -(1 - e^{-kappa a}(1 + kappa a)) / kappa^2
  DiffusionField f;
  const double a = f.driver_horizon;
  const double exact = -(1.0 - std::exp(-a) * (1.0 + a));
  double prev = 0.0;
  for (int level = 5; level <= 7; ++level) {
    const double dt = std::ldexp(1.0, -level);
    const WienerPath ramp = test::synthetic_path(-9.0, 1.0, dt, 2, [](double t) { return t; });
    const double err = std::abs(evaluate_driver(ramp, 0.0, f) - exact);
    if (level > 5) CHECK(test::log2_ratio(prev, err) >= 1.9);
    prev = err;
  }
  CHECK(prev <= 1e-4);
}

TEST_CASE("assembled operator is symmetric and uniformly negative") {
  const WienerPath w = sample_two_sided_path({16, 1.0}, -9.0, 2.0, 1.0 / 64, 42);
  const DiffusionField f;
  const GalerkinAssembler assembler(f, 24);
  for (double t : {0.0, 0.5, 1.0, 1.5}) {
    const GalerkinOperator op = assembler.at(w, t);
    CHECK((op.matrix - op.matrix.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(op.eigenvalues.maxCoeff() <= -f.ellipticity_floor() * laplacian_eigenvalue(1) * (1.0 - 1e-12));
    CHECK(op.eigenvalues.minCoeff() >= -f.upper_bound() * laplacian_eigenvalue(24) * (1.0 + 1e-12));
    const GalerkinOperator direct = assemble_operator(f, t, w, 24);
    CHECK((direct.matrix - op.matrix).cwiseAbs().maxCoeff() <= 1e-10 * op.matrix.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("coefficient stays in the ellipticity band") {
  const WienerPath w = sample_two_sided_path({16, 1.0}, -9.0, 2.0, 1.0 / 64, 9);
  const DiffusionField f;
  for (double x = 0.0; x <= 1.0; x += 0.125)
    for (double t : {0.0, 0.25, 1.0}) {
      const double e = evaluate_coefficient(f, x, t, w);
      CHECK(e >= f.ellipticity_floor());
      CHECK(e <= f.upper_bound());
    }
}

TEST_CASE("instantaneous reference norm") {
  const GalerkinOperator op = assemble_operator(DiffusionField::autonomous(1.0), 0.0, quiet_path(), 8);
  const VectorXd v = test::unit(8, 3);
  const double fixed = fractional_norm(v, FractionalNormSpec{0.25, NormReference::FixedLaplacian});
  const double inst = fractional_norm(v, FractionalNormSpec{0.25, NormReference::Instantaneous}, &op);
  CHECK(inst == doctest::Approx(fixed).epsilon(1e-10));
  CHECK_THROWS_AS(fractional_norm(v, FractionalNormSpec{0.25, NormReference::Instantaneous}), ConfigError);
}
