#pragma once

// Discrete parabolic evolution family U(t, s, w) as a product of frozen
// midpoint exponentials S_k = exp(dt A_h(t_k + dt/2)).

#include "randattract/core.hpp"
#include "randattract/mds.hpp"
#include "randattract/operators.hpp"

#include <iosfwd>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace randattract {

/// One frozen step. The midpoint operator is stored through its
/// eigendecomposition; every matrix function of the step shares it.
struct PropagatorStep {
  MatrixXd eigenvectors;
  VectorXd eigenvalues;  // of A_h at the midpoint
  double dt = 0.0;
  VectorXd exp_weights;       // e^{h lambda}
  VectorXd noise_weights;     // ((1 - e^{2 h lambda}) / (-2 h lambda))^{1/2}
  VectorXd forcing_weights;   // phi_1(h lambda)

  static PropagatorStep from_operator(const MatrixXd& a, double dt);

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  VectorXd propagate(const VectorXd& v) const {
    return spectral_apply(eigenvectors, exp_weights, v);
  }
  /// Noise contribution G dW of the pathwise mild step.
  VectorXd noise(const VectorXd& dw) const {
    return spectral_apply(eigenvectors, noise_weights, dw);
  }
  /// Corrector over the step: int U(t_{k+1}, s) A (W_{k+1} - W_s) ds = (S - G) dW.
  VectorXd corrector(const VectorXd& dw) const {
    return spectral_apply(eigenvectors, VectorXd(exp_weights - noise_weights), dw);
  }
  /// phi_1(h A) v; h * phi_1(h A) f integrates a constant forcing exactly.
  VectorXd phi1(const VectorXd& v) const {
    return spectral_apply(eigenvectors, forcing_weights, v);
  }
  MatrixXd matrix() const { return spectral_matrix(eigenvectors, exp_weights); }
  double norm() const { return exp_weights.maxCoeff(); }
};

/// Computes steps for one path. Steps computed through step() are cached by
/// absolute raw column, so every shifted view of the same sample reuses them.
class StepFactory {
 public:
  StepFactory(const DiffusionField& field, int dim, WienerPath path);

  /// Same cache, different view of the same sample.
  StepFactory rebind(const WienerPath& path) const;

  std::shared_ptr<const PropagatorStep> step(Index k) const;  // cached
  PropagatorStep compute(Index k) const;                      // uncached
  double driver(Index k) const;

  const WienerPath& path() const { return path_; }
  const DiffusionField& field() const { return assembler_->field(); }
  const GalerkinAssembler& assembler() const { return *assembler_; }
  int dim() const { return assembler_->dim(); }

 private:
  struct Cache {
    std::mutex mutex;
    std::unordered_map<Index, std::shared_ptr<const PropagatorStep>> steps;
  };

  std::shared_ptr<const GalerkinAssembler> assembler_;
  std::shared_ptr<const DriverKernel> kernel_;
  std::shared_ptr<Cache> cache_;
  WienerPath path_;
};

struct TimePair {
  double t = 0.0;
  double s = 0.0;
};

/// The discrete evolution family on one grid.
class PropagatorChain {
 public:
  PropagatorChain(TimeGrid grid, std::vector<std::shared_ptr<const PropagatorStep>> steps,
                  StepFactory factory);

  const TimeGrid& grid() const { return grid_; }
  Index size() const { return static_cast<Index>(steps_.size()); }
  int dim() const { return factory_.dim(); }
  const PropagatorStep& step(Index local) const { return *steps_.at(static_cast<std::size_t>(local)); }
  const WienerPath& path() const { return factory_.path(); }
  const StepFactory& factory() const { return factory_; }
  double ellipticity_floor() const { return factory_.field().ellipticity_floor(); }

  /// U(t, s) v.
  VectorXd apply(double t, double s, const VectorXd& v) const;
  /// Steps from local index `from` up to `to`.
  VectorXd apply_local(Index from, Index to, const VectorXd& v) const;
  /// Dense U(t, s).
  MatrixXd evolution(double t, double s) const;
  /// A_h at a grid time of the chain.
  GalerkinOperator operator_at(double t) const;

  /// Sub-chain on [t_begin, t_end] sharing the same steps.
  PropagatorChain window(double t_begin, double t_end) const;

 private:
  std::pair<Index, Index> local_pair(double t, double s) const;

  TimeGrid grid_;
  std::vector<std::shared_ptr<const PropagatorStep>> steps_;
  StepFactory factory_;
};

PropagatorChain build_chain(const DiffusionField& field, const WienerPath& path,
                            const TimeGrid& grid, int dim, int threads = 1);
PropagatorChain build_chain(const StepFactory& factory, const TimeGrid& grid, int threads = 1);

struct CocycleResidual {
  double residual = 0.0;   // ||U(t+s, s, w) - U(t, 0, theta_s w)||_2
  double reference = 0.0;  // ||U(t+s, s, w)||_2
};

CocycleResidual cocycle_residual(const DiffusionField& field, const WienerPath& path, double t,
                                 double s, int dim);
CocycleResidual cocycle_residual(const StepFactory& factory, double t, double s);

struct DecayFit {
  double c_hat = 1.0;
  double lambda_hat = 0.0;
};

double spectral_norm(const MatrixXd& m);

/// Minimal C with ||U(t,s)|| <= C e^{-lambda (t-s)} on the samples, lambda
/// pinned to the Poincaré rate floor * pi^2.
DecayFit decay_fit(const PropagatorChain& chain, const std::vector<TimePair>& pairs);

/// Envelope over every sub-interval of the chain from the per-step spectral
/// norms; an upper bound for decay_fit on any sample set.
DecayFit envelope_fit(const PropagatorChain& chain);

/// max over pairs of (t-s)^alpha e^{lambda (t-s)} ||(-A_h(t))^alpha U(t,s)||_2.
double smoothing_estimate(const PropagatorChain& chain, double alpha,
                          const std::vector<TimePair>& pairs, double lambda);
double smoothing_estimate(const PropagatorChain& chain, double alpha,
                          const std::vector<TimePair>& pairs);

/// Deterministic sample of grid pairs s <= t on the chain grid.
std::vector<TimePair> sample_pairs(const TimeGrid& grid, int count, std::uint64_t seed,
                                   bool strict = false);

/// Rows (t - s, ||U(t,s)||, C e^{-lambda (t-s)}).
void write_decay_csv(std::ostream& out, const PropagatorChain& chain,
                     const std::vector<TimePair>& pairs, const DecayFit& fit);

}  // namespace randattract
