#pragma once

// Two-sided Q-Wiener paths and the Wiener shift.

#include "randattract/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>

namespace randattract {

/// Diagonal trace-class covariance q_n = n^{-2r} in the Dirichlet sine basis.
struct NoiseSpectrum {
  int mode_count = 64;
  double decay_exponent = 1.0;

  static NoiseSpectrum make(int mode_count, double decay_exponent);
  void validate() const;

  double weight(int n) const;  // 1-based mode
  VectorXd weights() const;
  double trace() const;
};

struct ShiftIndex {
  Index offset = 0;
};

/// A sampled two-sided path w_n(t_k) on a uniform grid containing 0.
///
/// Storage is shared and immutable. A shifted path keeps the same raw columns
/// and only moves its origin, so (theta_s w)(t_k) = w(t_k + s) - w(s) is an
/// exact re-indexing plus one subtraction. Increments are read straight from
/// raw columns and therefore do not depend on which shift is being viewed.
class WienerPath {
 public:
  WienerPath() = default;

  /// Wraps explicit values; column j holds time (first_index + j) * dt.
  /// The column at time 0 becomes the anchor.
  static WienerPath from_values(double dt, Index first_index, MatrixXd values,
                                NoiseSpectrum spectrum = {}, std::uint64_t seed = 0);

  double dt() const { return data_->dt; }
  int modes() const { return static_cast<int>(data_->raw.rows()); }
  std::uint64_t seed() const { return data_->seed; }
  const NoiseSpectrum& spectrum() const { return data_->spectrum; }

  Index first_index() const { return -origin_; }
  Index last_index() const { return static_cast<Index>(data_->raw.cols()) - 1 - origin_; }
  double t_lo() const { return static_cast<double>(first_index()) * dt(); }
  double t_hi() const { return static_cast<double>(last_index()) * dt(); }
  bool covers(Index lo, Index hi) const { return lo >= first_index() && hi <= last_index(); }
  Index index_of(double t) const;

  /// w(t_k) relative to this path's origin.
  VectorXd value(Index k) const;
  double value(int mode, Index k) const;

  /// w(t_to) - w(t_from).
  VectorXd increment(Index from, Index to) const;
  double increment(int mode, Index from, Index to) const;

  WienerPath shifted(Index offset) const;

  /// Raw column of time index k; identifies a time on the underlying sample
  /// regardless of shifts.
  Index absolute(Index k) const { return origin_ + k; }
  const void* storage_id() const { return data_.get(); }

 private:
  struct Data {
    double dt = 0.0;
    MatrixXd raw;  // modes x columns
    NoiseSpectrum spectrum;
    std::uint64_t seed = 0;
  };

  void check(Index k) const;

  std::shared_ptr<const Data> data_;
  Index origin_ = 0;
};

WienerPath sample_two_sided_path(const NoiseSpectrum& spectrum, double t_lo, double t_hi, double dt,
                                 std::uint64_t seed);

WienerPath wiener_shift(const WienerPath& path, ShiftIndex s);

/// Every factor-th node of a fine path, keeping 0 on the grid.
WienerPath restrict_path(const WienerPath& fine, int factor);

/// Largest grid Hölder quotient on the window [s, r].
double holder_seminorm(const WienerPath& path, double gamma, double s, double r);

/// Smallest grid time T0 with |w(t)| <= eps |t| for all grid |t| >= T0.
double growth_diagnostic(const WienerPath& path, double eps);

void write_path_csv(std::ostream& out, const WienerPath& path);

}  // namespace randattract
