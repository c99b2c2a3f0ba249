#include "randattract/mds.hpp"

#include "randattract/io.hpp"

#include <algorithm>
#include <ostream>
#include <random>

namespace randattract {

NoiseSpectrum NoiseSpectrum::make(int mode_count, double decay_exponent) {
  NoiseSpectrum s{mode_count, decay_exponent};
  s.validate();
  return s;
}

void NoiseSpectrum::validate() const {
  if (mode_count < 1) throw ConfigError("noise spectrum needs at least one mode (M_w >= 1)");
  if (!(decay_exponent > 0.5))
    throw ConfigError("noise decay exponent r must exceed 1/2 for a trace-class covariance");
}

double NoiseSpectrum::weight(int n) const {
  return std::pow(static_cast<double>(n), -2.0 * decay_exponent);
}

VectorXd NoiseSpectrum::weights() const {
  VectorXd q(mode_count);
  for (int n = 1; n <= mode_count; ++n) q(n - 1) = weight(n);
  return q;
}

double NoiseSpectrum::trace() const { return weights().sum(); }

// ---------------------------------------------------------------------------

WienerPath WienerPath::from_values(double dt, Index first_index, MatrixXd values,
                                   NoiseSpectrum spectrum, std::uint64_t seed) {
  if (!(dt > 0.0)) throw ConfigError("path time step must be positive");
  const Index cols = static_cast<Index>(values.cols());
  if (first_index > 0 || first_index + cols - 1 < 0)
    throw ConfigError("path grid must contain t = 0");
  auto data = std::make_shared<Data>();
  data->dt = dt;
  data->raw = std::move(values);
  data->spectrum = spectrum;
  data->seed = seed;
  WienerPath p;
  p.data_ = std::move(data);
  p.origin_ = -first_index;
  return p;
}

Index WienerPath::index_of(double t) const {
  const Index k = grid_index(t, dt());
  check(k);
  return k;
}

void WienerPath::check(Index k) const {
  if (!data_) throw ConfigError("empty path");
  if (k < first_index() || k > last_index())
    throw ShiftRangeError("time index " + std::to_string(k) + " outside sampled path window [" +
                          std::to_string(first_index()) + ", " + std::to_string(last_index()) +
                          "]; sample a wider path");
}

VectorXd WienerPath::value(Index k) const {
  check(k);
  return data_->raw.col(origin_ + k) - data_->raw.col(origin_);
}

double WienerPath::value(int mode, Index k) const {
  check(k);
  return data_->raw(mode, origin_ + k) - data_->raw(mode, origin_);
}

VectorXd WienerPath::increment(Index from, Index to) const {
  check(from);
  check(to);
  return data_->raw.col(origin_ + to) - data_->raw.col(origin_ + from);
}

double WienerPath::increment(int mode, Index from, Index to) const {
  check(from);
  check(to);
  return data_->raw(mode, origin_ + to) - data_->raw(mode, origin_ + from);
}

WienerPath WienerPath::shifted(Index offset) const {
  if (!data_) throw ConfigError("empty path");
  const Index origin = origin_ + offset;
  if (origin < 0 || origin >= static_cast<Index>(data_->raw.cols()))
    throw ShiftRangeError("shift by " + std::to_string(offset) +
                          " steps leaves the sampled window; sample a wider path");
  WienerPath p = *this;
  p.origin_ = origin;
  return p;
}

// ---------------------------------------------------------------------------

namespace {

Index integral_steps(double span, double dt, const char* what) {
  const double x = span / dt;
  const double k = std::round(x);
  if (std::abs(x - k) > 1e-8 * std::max(1.0, x))
    throw ConfigError(std::string(what) + " is not an integer number of time steps");
  return static_cast<Index>(k);
}

// Forward and backward halves draw from disjoint streams of the same seed.
constexpr std::uint32_t kForwardStream = 0x46574421u;
constexpr std::uint32_t kBackwardStream = 0x42574421u;

void cumulate(MatrixXd& raw, Index origin, Index steps, int direction, const VectorXd& scale,
              std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index j = 1; j <= steps; ++j) {
    const Index col = origin + direction * j;
    const Index prev = col - direction;
    for (Index n = 0; n < raw.rows(); ++n) raw(n, col) = raw(n, prev) + scale(n) * normal(rng);
  }
}

}  // namespace

WienerPath sample_two_sided_path(const NoiseSpectrum& spectrum, double t_lo, double t_hi,
                                 double dt, std::uint64_t seed) {
  spectrum.validate();
  if (!(dt > 0.0)) throw ConfigError("time step dt must be positive");
  if (t_lo > 0.0 || t_hi < 0.0) throw ConfigError("path window must contain t = 0");
  const Index back = integral_steps(-t_lo, dt, "backward path span");
  const Index fwd = integral_steps(t_hi, dt, "forward path span");

  MatrixXd raw = MatrixXd::Zero(spectrum.mode_count, back + fwd + 1);
  const VectorXd scale = (spectrum.weights() * dt).cwiseSqrt();
  cumulate(raw, back, fwd, +1, scale, seed, kForwardStream);
  cumulate(raw, back, back, -1, scale, seed, kBackwardStream);
  return WienerPath::from_values(dt, -back, std::move(raw), spectrum, seed);
}

WienerPath wiener_shift(const WienerPath& path, ShiftIndex s) { return path.shifted(s.offset); }

WienerPath restrict_path(const WienerPath& fine, int factor) {
  if (factor < 1) throw ConfigError("restriction factor must be >= 1");
  if (factor == 1) return fine;
  const Index lo = -((-fine.first_index()) / factor);
  const Index hi = fine.last_index() / factor;
  MatrixXd raw(fine.modes(), hi - lo + 1);
  for (Index k = lo; k <= hi; ++k) raw.col(k - lo) = fine.value(k * factor);
  return WienerPath::from_values(fine.dt() * factor, lo, std::move(raw), fine.spectrum(),
                                 fine.seed());
}

double holder_seminorm(const WienerPath& path, double gamma, double s, double r) {
  if (!(gamma > 0.0 && gamma < 0.5)) throw ConfigError("Hölder exponent must lie in (0, 1/2)");
  const Index ks = path.index_of(s);
  const Index kr = path.index_of(r);
  if (kr <= ks) throw ConfigError("Hölder window is empty");
  double best = 0.0;
  for (Index i = ks; i < kr; ++i) {
    for (Index j = i + 1; j <= kr; ++j) {
      const double dist = path.increment(i, j).norm();
      const double span = static_cast<double>(j - i) * path.dt();
      best = std::max(best, dist / std::pow(span, gamma));
    }
  }
  return best;
}

double growth_diagnostic(const WienerPath& path, double eps) {
  if (!(eps > 0.0)) throw ConfigError("growth tolerance eps must be positive");
  const Index reach = std::max(-path.first_index(), path.last_index());
  Index violated = 0;
  for (Index m = reach; m >= 1; --m) {
    const double limit = eps * static_cast<double>(m) * path.dt();
    const bool bad_fwd = m <= path.last_index() && path.value(m).norm() > limit;
    const bool bad_back = -m >= path.first_index() && path.value(-m).norm() > limit;
    if (bad_fwd || bad_back) {
      violated = m;
      break;
    }
  }
  if (violated == reach) return static_cast<double>(reach) * path.dt();
  return static_cast<double>(violated + 1) * path.dt();
}

void write_path_csv(std::ostream& out, const WienerPath& path) {
  out << "# spectrum: modes=" << path.spectrum().mode_count
      << " r=" << format_real(path.spectrum().decay_exponent) << " seed=" << path.seed()
      << " dt=" << format_real(path.dt()) << "\n";
  out << "t";
  for (int n = 1; n <= path.modes(); ++n) out << ",mode_" << n;
  out << "\n";
  for (Index k = path.first_index(); k <= path.last_index(); ++k) {
    out << format_real(static_cast<double>(k) * path.dt());
    const VectorXd w = path.value(k);
    for (int n = 0; n < path.modes(); ++n) out << ',' << format_real(w(n));
    out << "\n";
  }
}

}  // namespace randattract
