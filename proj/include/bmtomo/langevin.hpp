#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "bmtomo/measurement.hpp"
#include "bmtomo/prior.hpp"
#include "bmtomo/qstate.hpp"
#include "bmtomo/types.hpp"

namespace bmtomo {

/// How the Gaussian increment of a Langevin step is scaled.
enum class NoiseConvention {
  InverseBeta,      // sqrt(2 eta) / beta   (CLI name "algorithm1", default)
  InverseSqrtBeta,  // sqrt(2 eta / beta)   (CLI name "eq7")
};

std::string to_string(NoiseConvention c);
NoiseConvention parse_noise_convention(const std::string& s);

struct SamplerConfig {
  double eta = 1e-5;
  double beta = 1e3;
  double theta = 100.0;
  std::optional<double> lambda;  // unset: m / 2
  long iterations = 10000;
  long burnin = 2000;
  std::uint64_t seed = 0;
  NoiseConvention noise = NoiseConvention::InverseBeta;
  bool inject_noise = true;  // false is the beta -> infinity limit
  bool record_iteration_times = false;

  void validate() const;
  double effective_lambda(long m) const { return lambda ? *lambda : 0.5 * static_cast<double>(m); }
  double noise_coefficient() const;
};

/// Default prior scale: 100 when the rank budget is below d (rank treated as
/// known), 0.1 for r = d.
double default_theta(int r, int d);

/// sum_{a,s} (phat_{a,s} - tr(P_s^a Y Y^*))^2
double likelihood_bm(const BMFactor& y, const EmpiricalFrequencies& freqs,
                     const MeasurementDesign& design);

/// Negative log posterior over the 2d x 2r real embedding T = psi(Y),
///   f(T) = lambda sum (phat - sqrt2 tr(Pt T T^T))^2
///          + ((2d+r+2)/4) log det((theta^2/sqrt2) I + sqrt2 T T^T),
/// with Pt = psi(P) and additive constants dropped.
///
/// value() evaluates the formula literally on real matrices. gradient()
/// uses psi(A) psi(B) = psi(AB)/sqrt2 to contract the data term on the
/// complex side, -4 lambda psi(G Y) with G = sum (phat - tr(P Y Y^*)) P,
/// and the Woodbury form for the prior term. The design and frequencies must
/// outlive the posterior.
class BmPosterior {
 public:
  BmPosterior(const MeasurementDesign& design, const EmpiricalFrequencies& freqs, double lambda,
              PriorParams prior);

  double value(const RealFactor& t) const;
  RMatrix gradient(const RealFactor& t) const;
  double likelihood(const BMFactor& y) const;

  double lambda() const { return lambda_; }
  const PriorParams& prior() const { return prior_; }
  const MeasurementDesign& design() const { return design_; }

 private:
  const std::vector<RMatrix>& embedded_operators() const;

  const MeasurementDesign& design_;
  const EmpiricalFrequencies& freqs_;
  double lambda_;
  PriorParams prior_;
  mutable std::once_flag embedded_once_;
  mutable std::vector<RMatrix> embedded_;
};

double neg_log_posterior_real(const RealFactor& t, const EmpiricalFrequencies& freqs,
                              const MeasurementDesign& design, const SamplerConfig& config);
RMatrix grad_neg_log_posterior_real(const RealFactor& t, const EmpiricalFrequencies& freqs,
                                    const MeasurementDesign& design, const SamplerConfig& config);

struct ChainState {
  RealFactor t;
  long step = 0;
  Rng rng;
};

/// d x r complex matrix with independent standard normal real and imaginary
/// parts.
CMatrix draw_complex_noise(int d, int r, Rng& rng);

/// T - eta * grad + coeff * noise. Pure; the noise must already be embedded.
RealFactor langevin_update(const RealFactor& t, const RMatrix& grad, const RMatrix& embedded_noise,
                           double eta, double noise_coeff);

/// One Langevin move in place. Throws DivergenceError carrying the step
/// index if the new iterate has non-finite entries.
void langevin_step(ChainState& state, const BmPosterior& posterior, const SamplerConfig& config);

struct EstimateResult {
  EstimateResult(std::string name, int r, DensityMatrix rho)
      : estimator(std::move(name)), rank(r), rho_hat(std::move(rho)) {}

  std::string estimator;  // "bm" or "prob"
  int rank = 0;
  DensityMatrix rho_hat;
  double trace_before_normalization = 0.0;
  // Per iteration, when a target is supplied: error of the normalized
  // running posterior mean (the current iterate while still in burn-in),
  // and of the normalized current iterate.
  std::vector<double> error_trace;
  std::vector<double> instantaneous_error_trace;
  std::optional<double> initial_error;
  std::vector<double> iteration_seconds;  // only with record_iteration_times
  double wall_time_per_iteration = 0.0;
  double acceptance_rate = 1.0;
  double proposal_scale = 0.0;  // prob-estimator only: scale after burn-in tuning
  long iterations = 0;
  long burnin = 0;
};

/// Langevin chain from init_factor(), averaging psi^{-1}(T) psi^{-1}(T)^*
/// over the post-burn-in iterates and normalizing the trace at the end.
EstimateResult run_bm_sampler(int r, const EmpiricalFrequencies& freqs,
                              const MeasurementDesign& design, const SamplerConfig& config,
                              const DensityMatrix* target = nullptr);

}  // namespace bmtomo
