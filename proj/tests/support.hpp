#pragma once

#include "randattract/core.hpp"
#include "randattract/mds.hpp"

#include <cmath>
#include <functional>

namespace randattract::test {

// Deterministic path with w_n(t) = fn(t) in mode 1 and zero elsewhere,
// sampled on [t_lo, t_hi].
inline WienerPath synthetic_path(double t_lo, double t_hi, double dt, int modes,
                                 const std::function<double(double)>& fn) {
  const Index k0 = grid_index(t_lo, dt);
  const Index k1 = grid_index(t_hi, dt);
  MatrixXd values = MatrixXd::Zero(modes, k1 - k0 + 1);
  for (Index k = k0; k <= k1; ++k) values(0, k - k0) = fn(static_cast<double>(k) * dt);
  return WienerPath::from_values(dt, k0, values);
}

inline VectorXd unit(int dim, int n) {
  VectorXd e = VectorXd::Zero(dim);
  e(n - 1) = 1.0;
  return e;
}

inline double log2_ratio(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace randattract::test
