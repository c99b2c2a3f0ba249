#include <doctest.h>

#include "randattract/ou.hpp"
#include "support.hpp"

#include <sstream>

using namespace randattract;

namespace {

WienerPath path(std::uint64_t seed, double t_lo, double t_hi, int modes = 32) {
  return sample_two_sided_path({modes, 1.0}, t_lo, t_hi, 1.0 / 256, seed);
}

}  // namespace

TEST_CASE("stationarity along the shift") {
  const WienerPath w = path(1, -19.0, 4.0);
  const StepFactory factory(DiffusionField{}, 32, w);
  for (auto [t, s] : {std::pair{1.0, 1.0}, std::pair{2.0, 0.5}}) {
    const StationarityReport r = stationarity_residual(factory, t, s, 8.0);
    CHECK(r.residual <= 1e-8 * (1.0 + r.z_norm));
    CHECK(r.truncation_bound >= 0.0);
  }
}

TEST_CASE("autonomous recursion is shift invariant") {
  const WienerPath w = path(2, -19.0, 4.0);
  const StepFactory factory(DiffusionField::autonomous(0.5), 32, w);
  const StationarityReport r = stationarity_residual(factory, 1.0, 2.0, 8.0);
  CHECK(r.residual <= 1e-10 * (1.0 + r.z_norm));
}

TEST_CASE("truncation bound shrinks with the horizon") {
  const WienerPath w = path(3, -26.0, 1.0);
  const StepFactory factory(DiffusionField{}, 32, w);
  const StationaryState s4 = construct_initial(factory, 4.0);
  const StationaryState s8 = construct_initial(factory, 8.0);
  const StationaryState s16 = construct_initial(factory, 16.0);
  CHECK(s8.truncation_bound < s4.truncation_bound);
  CHECK(s16.truncation_bound < s8.truncation_bound);
  // the tail beyond the shorter horizon is covered by its bound
  CHECK((s16.z0 - s8.z0).norm() <= s8.truncation_bound + s16.truncation_bound);
}

TEST_CASE("propagation starts from the stationary state") {
  const WienerPath w = path(4, -13.0, 2.0, 16);
  const StepFactory factory(DiffusionField{}, 16, w);
  const StationaryState s = construct_initial(factory, 4.0);
  const OUTrajectory z = propagate(s, factory, TimeGrid::span(0.0, 1.0, 1.0 / 256), 0.2);
  REQUIRE(z.states.size() == 257);
  CHECK(z.states.front() == s.z0);
  CHECK(z.norm_l2.front() == doctest::Approx(s.z0.norm()));
  std::vector<VectorXd> streamed;
  propagate_streaming(s, factory, TimeGrid::span(0.0, 1.0, 1.0 / 256),
                      [&](Index, const VectorXd& v) { streamed.push_back(v); });
  REQUIRE(streamed.size() == z.states.size());
  CHECK(streamed.back() == z.states.back());
}

TEST_CASE("ladder and slope") {
  const auto ladder = log_ladder(1.0, 100.0, 24, 1.0 / 256, {20.0, 50.0, 100.0});
  CHECK(ladder.front() == 1.0);
  CHECK(ladder.back() == 100.0);
  for (std::size_t i = 1; i < ladder.size(); ++i) CHECK(ladder[i] > ladder[i - 1]);
  for (double t : {20.0, 50.0}) CHECK(std::find(ladder.begin(), ladder.end(), t) != ladder.end());
  for (double t : ladder) CHECK(t * 256.0 == std::round(t * 256.0));
  CHECK(least_squares_slope({1.0, 2.0, 3.0, 4.0}, {3.0, 5.0, 7.0, 9.0}) == doctest::Approx(2.0));
}

TEST_CASE("temperedness table") {
  const WienerPath w = path(5, -47.0, 0.0, 16);
  const auto ladder = log_ladder(1.0, 30.0, 10, 1.0 / 256, {6.0, 15.0, 30.0});
  const TemperednessTable table = temperedness_diagnostic(DiffusionField{}, w, 16, 0.2, {0.1, 0.5}, 30.0, 8.0, ladder);
  REQUIRE(table.rows.size() == ladder.size());
  for (const auto& row : table.rows) {
    CHECK(row.discounted[0] == doctest::Approx(std::exp(-0.1 * row.t) * row.y));
    CHECK(row.discounted[1] <= row.discounted[0]);
  }
  CHECK(table.at(30.0).t == 30.0);
  CHECK(std::abs(table.log_slope) < 0.2);
  std::ostringstream out;
  write_temperedness_csv(out, table);
  CHECK(out.str().find("log_slope") != std::string::npos);
}
