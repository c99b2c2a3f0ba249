#include "randattract/evolution.hpp"

#include "randattract/io.hpp"
#include "randattract/parallel.hpp"

#include <algorithm>
#include <ostream>
#include <random>

namespace randattract {

PropagatorStep PropagatorStep::from_operator(const MatrixXd& a, double dt) {
  PropagatorStep s;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (a + a.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError("step eigendecomposition failed");
  s.eigenvectors = es.eigenvectors();
  s.eigenvalues = es.eigenvalues();
  if (!s.eigenvalues.allFinite()) throw NumericalError("non-finite operator eigenvalues");
  s.dt = dt;
  const Index n = s.eigenvalues.size();
  s.exp_weights.resize(n);
  s.noise_weights.resize(n);
  s.forcing_weights.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double z = dt * s.eigenvalues(i);
    s.exp_weights(i) = exp_weight(z);
    s.noise_weights(i) = variance_weight(z);
    s.forcing_weights(i) = phi1_weight(z);
  }
  return s;
}

// ---------------------------------------------------------------------------

StepFactory::StepFactory(const DiffusionField& field, int dim, WienerPath path)
    : assembler_(std::make_shared<GalerkinAssembler>(field, dim)),
      cache_(std::make_shared<Cache>()),
      path_(std::move(path)) {
  if (field.amp != 0.0) kernel_ = std::make_shared<DriverKernel>(field, path_.dt());
}

StepFactory StepFactory::rebind(const WienerPath& path) const {
  if (path.storage_id() != path_.storage_id())
    throw ConfigError("step cache can only be shared between views of the same path sample");
  StepFactory f = *this;
  f.path_ = path;
  return f;
}

double StepFactory::driver(Index k) const {
  if (!kernel_) return 0.0;
  return (*kernel_)(path_, k);
}

PropagatorStep StepFactory::compute(Index k) const {
  if (!path_.covers(k, k + 1)) throw ShiftRangeError("step leaves the sampled path window");
  double modulation = 0.0;
  if (kernel_) modulation = std::tanh(0.5 * (driver(k) + driver(k + 1)));
  return PropagatorStep::from_operator(assembler_->matrix(modulation), path_.dt());
}

std::shared_ptr<const PropagatorStep> StepFactory::step(Index k) const {
  // Autonomous fields give the same step everywhere.
  const Index key = kernel_ ? path_.absolute(k) : 0;
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->steps.find(key);
    if (it != cache_->steps.end()) return it->second;
  }
  auto s = std::make_shared<const PropagatorStep>(compute(k));
  std::lock_guard<std::mutex> lock(cache_->mutex);
  return cache_->steps.emplace(key, std::move(s)).first->second;
}

// ---------------------------------------------------------------------------

PropagatorChain::PropagatorChain(TimeGrid grid,
                                 std::vector<std::shared_ptr<const PropagatorStep>> steps,
                                 StepFactory factory)
    : grid_(grid), steps_(std::move(steps)), factory_(std::move(factory)) {
  if (static_cast<Index>(steps_.size()) != grid_.steps)
    throw ConfigError("step count does not match the grid");
}

std::pair<Index, Index> PropagatorChain::local_pair(double t, double s) const {
  if (t < s) throw OrderingError("evolution family needs s <= t");
  return {grid_.local(t), grid_.local(s)};
}

VectorXd PropagatorChain::apply_local(Index from, Index to, const VectorXd& v) const {
  if (to < from) throw OrderingError("evolution family needs s <= t");
  VectorXd out = v;
  for (Index k = from; k < to; ++k) out = step(k).propagate(out);
  return out;
}

VectorXd PropagatorChain::apply(double t, double s, const VectorXd& v) const {
  const auto [kt, ks] = local_pair(t, s);
  return apply_local(ks, kt, v);
}

MatrixXd PropagatorChain::evolution(double t, double s) const {
  const auto [kt, ks] = local_pair(t, s);
  MatrixXd u = MatrixXd::Identity(dim(), dim());
  for (Index k = ks; k < kt; ++k) {
    const PropagatorStep& st = step(k);
    MatrixXd w = st.eigenvectors.transpose() * u;
    w = st.exp_weights.asDiagonal() * w;
    u.noalias() = st.eigenvectors * w;
  }
  return u;
}

GalerkinOperator PropagatorChain::operator_at(double t) const {
  grid_.local(t);
  return factory_.assembler().at(factory_.path(), t);
}

PropagatorChain PropagatorChain::window(double t_begin, double t_end) const {
  const Index a = grid_.local(t_begin);
  const Index b = grid_.local(t_end);
  if (b < a) throw OrderingError("window end precedes window start");
  std::vector<std::shared_ptr<const PropagatorStep>> sub(steps_.begin() + a, steps_.begin() + b);
  return PropagatorChain(TimeGrid{grid_.time(a), grid_.dt, b - a}, std::move(sub), factory_);
}

PropagatorChain build_chain(const StepFactory& factory, const TimeGrid& grid, int threads) {
  if (std::abs(grid.dt - factory.path().dt()) > 1e-12 * grid.dt)
    throw AlignmentError("chain grid step differs from the path step");
  const Index k0 = grid.first_index();
  std::vector<std::shared_ptr<const PropagatorStep>> steps(static_cast<std::size_t>(grid.steps));
  parallel_for(steps.size(), threads,
               [&](std::size_t i) { steps[i] = factory.step(k0 + static_cast<Index>(i)); });
  return PropagatorChain(grid, std::move(steps), factory);
}

PropagatorChain build_chain(const DiffusionField& field, const WienerPath& path,
                            const TimeGrid& grid, int dim, int threads) {
  return build_chain(StepFactory(field, dim, path), grid, threads);
}

// ---------------------------------------------------------------------------

double spectral_norm(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues()(0);
}

CocycleResidual cocycle_residual(const StepFactory& factory, double t, double s) {
  if (t < 0.0 || s < 0.0) throw OrderingError("cocycle check needs s, t >= 0");
  const double dt = factory.path().dt();
  const PropagatorChain direct = build_chain(factory, TimeGrid::span(s, t + s, dt));
  // The shifted chain is rebuilt from scratch on the shifted view.
  const WienerPath shifted = wiener_shift(factory.path(), ShiftIndex{grid_index(s, dt)});
  const StepFactory fresh(factory.field(), factory.dim(), shifted);
  const PropagatorChain moved = build_chain(fresh, TimeGrid::span(0.0, t, dt));
  const MatrixXd lhs = direct.evolution(t + s, s);
  const MatrixXd rhs = moved.evolution(t, 0.0);
  return {spectral_norm(lhs - rhs), spectral_norm(lhs)};
}

CocycleResidual cocycle_residual(const DiffusionField& field, const WienerPath& path, double t,
                                 double s, int dim) {
  return cocycle_residual(StepFactory(field, dim, path), t, s);
}

DecayFit decay_fit(const PropagatorChain& chain, const std::vector<TimePair>& pairs) {
  if (pairs.empty()) throw ConfigError("decay fit needs at least one sample pair");
  DecayFit fit;
  fit.lambda_hat = chain.ellipticity_floor() * kPi * kPi;
  for (const auto& p : pairs) {
    const double n = spectral_norm(chain.evolution(p.t, p.s));
    fit.c_hat = std::max(fit.c_hat, n * std::exp(fit.lambda_hat * (p.t - p.s)));
  }
  return fit;
}

DecayFit envelope_fit(const PropagatorChain& chain) {
  DecayFit fit;
  fit.lambda_hat = chain.ellipticity_floor() * kPi * kPi;
  // Largest product of per-step factors over contiguous runs (Kadane in logs).
  double best = 0.0;
  double run = 0.0;
  for (Index k = 0; k < chain.size(); ++k) {
    const PropagatorStep& st = chain.step(k);
    const double r = std::log(st.norm()) + fit.lambda_hat * st.dt;
    run = std::max(0.0, run + r);
    best = std::max(best, run);
  }
  fit.c_hat = std::exp(best);
  return fit;
}

double smoothing_estimate(const PropagatorChain& chain, double alpha,
                          const std::vector<TimePair>& pairs, double lambda) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("smoothing exponent must lie in (0, 1)");
  double best = 0.0;
  for (const auto& p : pairs) {
    if (!(p.t > p.s)) throw OrderingError("smoothing estimate needs t > s");
    const GalerkinOperator op = chain.operator_at(p.t);
    if (op.eigenvalues.maxCoeff() >= 0.0)
      throw DefinitenessError("operator has a nonnegative eigenvalue");
    const VectorXd w = (-op.eigenvalues).array().pow(alpha).matrix();
    const MatrixXd frac = spectral_matrix(op.eigenvectors, w);
    const double tau = p.t - p.s;
    const double value =
        std::pow(tau, alpha) * std::exp(lambda * tau) * spectral_norm(frac * chain.evolution(p.t, p.s));
    best = std::max(best, value);
  }
  return best;
}

double smoothing_estimate(const PropagatorChain& chain, double alpha,
                          const std::vector<TimePair>& pairs) {
  return smoothing_estimate(chain, alpha, pairs, chain.ellipticity_floor() * kPi * kPi);
}

std::vector<TimePair> sample_pairs(const TimeGrid& grid, int count, std::uint64_t seed,
                                   bool strict) {
  if (grid.steps < (strict ? 1 : 0)) throw ConfigError("grid too short for strict pairs");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, grid.steps);
  std::vector<TimePair> pairs;
  while (static_cast<int>(pairs.size()) < count) {
    Index a = pick(rng);
    Index b = pick(rng);
    if (a > b) std::swap(a, b);
    if (strict && a == b) continue;
    pairs.push_back({grid.time(b), grid.time(a)});
  }
  return pairs;
}

void write_decay_csv(std::ostream& out, const PropagatorChain& chain,
                     const std::vector<TimePair>& pairs, const DecayFit& fit) {
  out << "# decay envelope C_hat=" << format_real(fit.c_hat)
      << " lambda_hat=" << format_real(fit.lambda_hat) << "\n";
  out << "t_minus_s,norm,envelope\n";
  for (const auto& p : pairs) {
    const double tau = p.t - p.s;
    out << format_real(tau) << ',' << format_real(spectral_norm(chain.evolution(p.t, p.s))) << ','
        << format_real(fit.c_hat * std::exp(-fit.lambda_hat * tau)) << "\n";
  }
}

}  // namespace randattract
