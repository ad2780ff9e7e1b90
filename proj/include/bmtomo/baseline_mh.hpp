#pragma once

#include <cstdint>
#include <limits>

#include "bmtomo/langevin.hpp"
#include "bmtomo/measurement.hpp"
#include "bmtomo/qstate.hpp"

namespace bmtomo {

// Metropolis-Hastings baseline over mixtures rho = V diag(gamma) V^*, with
// gamma on the simplex under a Dirichlet(alpha) prior and each column of V
// uniform on the complex unit sphere. Shares likelihood_bm's data term.
// This is a reimplementation in the spirit of the original prob-estimator;
// its proposal kernel is our own.

struct MixtureState {
  RVector gamma;  // length d, on the simplex
  CMatrix v;      // d x d, unit-norm columns

  void validate() const;
};

DensityMatrix mixture_density(const MixtureState& state);

/// Draw from the prior: gamma ~ Dirichlet(alpha), columns uniform on the
/// sphere.
MixtureState sample_mixture_prior(int d, double alpha, Rng& rng);

/// Proposal scale s controls both moves:
///   gamma' ~ Dirichlet(kappa * gamma + alpha) with kappa = kappa_unit / s^2,
///   v_j'   = (v_j + s z) / ||v_j + s z||, z standard complex Gaussian.
/// s = 0 freezes both moves.
struct MhSettings {
  double lambda = 1.0;
  double proposal_scale = 0.1;
  double kappa_unit = 1.0;  // kappa = 100 at the default scale
  double alpha = std::numeric_limits<double>::quiet_NaN();  // NaN: 1/d
  bool move_weights = true;  // false: column moves only, gamma held fixed

  double alpha_for(int d) const;
  double kappa() const;
};

/// Cached log target so the chain evaluates the likelihood once per step.
struct MhChain {
  MixtureState state;
  double log_target = 0.0;
  long proposals = 0;
  long accepted = 0;
};

double mh_log_target(const MixtureState& state, const EmpiricalFrequencies& freqs,
                     const MeasurementDesign& design, const MhSettings& settings);

MhChain start_chain(MixtureState state, const EmpiricalFrequencies& freqs,
                    const MeasurementDesign& design, const MhSettings& settings);

/// One joint proposal of gamma and column `column` of V, accepted with the
/// Metropolis-Hastings ratio exp(-lambda L) x Dirichlet prior x proposal
/// correction. Returns whether the move was accepted.
bool mh_step(MhChain& chain, int column, const EmpiricalFrequencies& freqs,
             const MeasurementDesign& design, const MhSettings& settings, Rng& rng);

struct ProbEstimatorConfig {
  long iterations = 10000;  // one iteration = one proposal per column
  long burnin = 2000;
  std::optional<double> lambda;  // unset: m / 2
  double proposal_scale = 0.1;   // starting scale
  double kappa_unit = 1.0;
  std::optional<double> alpha;   // unset: 1/d
  bool adapt_during_burnin = true;
  double target_acceptance = 0.25;
  std::uint64_t seed = 0;
  bool record_iteration_times = false;

  void validate() const;
};

/// Runs the chain, averages mixture_density over post-burn-in iterations.
/// During burn-in the proposal scale is tuned by Robbins-Monro toward
/// target_acceptance; it is frozen afterwards.
EstimateResult run_prob_estimator(const EmpiricalFrequencies& freqs,
                                  const MeasurementDesign& design,
                                  const ProbEstimatorConfig& config,
                                  const DensityMatrix* target = nullptr);

}  // namespace bmtomo
