#include "bmtomo/baseline_mh.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace bmtomo {

void MixtureState::validate() const {
  const Eigen::Index d = gamma.size();
  if (d < 1 || v.rows() != d || v.cols() != d) {
    throw DimensionError("mixture state: gamma must have length d and V must be d x d");
  }
  if (gamma.minCoeff() < 0.0 || std::abs(gamma.sum() - 1.0) > 1e-12) {
    throw StructureError("mixture state: gamma is not on the simplex");
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    if (std::abs(v.col(j).norm() - 1.0) > 1e-12) {
      throw StructureError("mixture state: column " + std::to_string(j) + " is not unit norm");
    }
  }
}

namespace {

CMatrix mixture_matrix(const MixtureState& s) {
  CMatrix scaled = s.v;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) scaled.col(j) *= std::sqrt(s.gamma[j]);
  CMatrix rho = scaled * scaled.adjoint();
  return rho;
}

double log_dirichlet_density(const RVector& x, const RVector& a) {
  double out = std::lgamma(a.sum());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out += (a[i] - 1.0) * std::log(x[i]) - std::lgamma(a[i]);
  }
  return out;
}

Eigen::VectorXcd unit_sphere_vector(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXcd z(d);
  for (int i = 0; i < d; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    z[i] = Complex(re, im);
  }
  return z / z.norm();
}

}  // namespace

DensityMatrix mixture_density(const MixtureState& state) {
  state.validate();
  CMatrix rho = mixture_matrix(state);
  rho = (0.5 * (rho + rho.adjoint())).eval();
  return DensityMatrix(std::move(rho));
}

MixtureState sample_mixture_prior(int d, double alpha, Rng& rng) {
  MixtureState s;
  s.gamma = dirichlet_sample(d, alpha, rng);
  s.v.resize(d, d);
  for (int j = 0; j < d; ++j) s.v.col(j) = unit_sphere_vector(d, rng);
  return s;
}

double MhSettings::alpha_for(int d) const { return std::isnan(alpha) ? 1.0 / d : alpha; }

double MhSettings::kappa() const {
  return proposal_scale > 0.0 ? kappa_unit / (proposal_scale * proposal_scale)
                              : std::numeric_limits<double>::infinity();
}

double mh_log_target(const MixtureState& state, const EmpiricalFrequencies& freqs,
                     const MeasurementDesign& design, const MhSettings& settings) {
  const CMatrix rho = mixture_matrix(state);
  const double misfit = (freqs.values - operator_traces(design, rho)).squaredNorm();
  const double alpha = settings.alpha_for(design.dim());
  double log_prior = 0.0;
  for (Eigen::Index i = 0; i < state.gamma.size(); ++i) log_prior += (alpha - 1.0) * std::log(state.gamma[i]);
  return -settings.lambda * misfit + log_prior;
}

MhChain start_chain(MixtureState state, const EmpiricalFrequencies& freqs,
                    const MeasurementDesign& design, const MhSettings& settings) {
  state.validate();
  if (state.gamma.size() != design.dim()) throw DimensionError("start_chain: state/design mismatch");
  MhChain chain{std::move(state)};
  chain.log_target = mh_log_target(chain.state, freqs, design, settings);
  return chain;
}

bool mh_step(MhChain& chain, int column, const EmpiricalFrequencies& freqs,
             const MeasurementDesign& design, const MhSettings& settings, Rng& rng) {
  const int d = design.dim();
  if (column < 0 || column >= d) throw ParameterError("mh_step: column out of range");
  ++chain.proposals;
  const double s = settings.proposal_scale;
  if (!(s > 0.0)) {
    // Degenerate kernel: the proposal is the current state, ratio 1.
    ++chain.accepted;
    return true;
  }
  const double alpha = settings.alpha_for(d);
  const double kappa = settings.kappa();

  MixtureState prop = chain.state;
  const RVector forward = kappa * chain.state.gamma.array() + alpha;
  if (settings.move_weights) prop.gamma = dirichlet_sample(forward, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXcd col = chain.state.v.col(column);
  for (int i = 0; i < d; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    col[i] += s * Complex(re, im);
  }
  prop.v.col(column) = col / col.norm();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);

  if (prop.gamma.minCoeff() <= 0.0) return false;  // underflowed draw, zero prior density

  const double log_target = mh_log_target(prop, freqs, design, settings);
  double log_ratio = log_target - chain.log_target;
  if (settings.move_weights) {
    const RVector backward = kappa * prop.gamma.array() + alpha;
    log_ratio += log_dirichlet_density(chain.state.gamma, backward) - log_dirichlet_density(prop.gamma, forward);
  }
  if (std::log(u) < log_ratio) {
    chain.state = std::move(prop);
    chain.log_target = log_target;
    ++chain.accepted;
    return true;
  }
  return false;
}

void ProbEstimatorConfig::validate() const {
  if (iterations < 1) throw ParameterError("prob-estimator: iterations must be >= 1");
  if (burnin < 0 || burnin >= iterations) throw ParameterError("prob-estimator: need 0 <= burnin < iterations");
  if (lambda && !(*lambda > 0.0)) throw ParameterError("prob-estimator: lambda must be positive");
  if (!(proposal_scale >= 0.0)) throw ParameterError("prob-estimator: proposal scale must be >= 0");
  if (!(kappa_unit > 0.0)) throw ParameterError("prob-estimator: kappa_unit must be positive");
  if (alpha && !(*alpha > 0.0)) throw ParameterError("prob-estimator: alpha must be positive");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw ParameterError("prob-estimator: target acceptance must lie in (0, 1)");
  }
}

EstimateResult run_prob_estimator(const EmpiricalFrequencies& freqs,
                                  const MeasurementDesign& design,
                                  const ProbEstimatorConfig& config, const DensityMatrix* target) {
  config.validate();
  const int d = design.dim();
  if (target && target->dim() != d) throw DimensionError("run_prob_estimator: target dimension mismatch");

  MhSettings settings;
  settings.lambda = config.lambda ? *config.lambda : 0.5 * static_cast<double>(freqs.m);
  settings.proposal_scale = config.proposal_scale;
  settings.kappa_unit = config.kappa_unit;
  settings.alpha = config.alpha ? *config.alpha : 1.0 / d;

  Rng init_rng(mix_seed(config.seed, 1));
  Rng rng(mix_seed(config.seed, 2));
  MhChain chain = start_chain(sample_mixture_prior(d, settings.alpha, init_rng), freqs, design, settings);

  std::optional<double> initial_error;
  if (target) initial_error = (mixture_matrix(chain.state) - target->matrix()).norm();

  CMatrix sum = CMatrix::Zero(d, d);
  long samples = 0;
  long post_proposals = 0, post_accepted = 0;
  std::vector<double> error_trace, inst_trace, seconds;
  using Clock = std::chrono::steady_clock;
  Clock::duration total{0};
  double log_scale = std::log(std::max(settings.proposal_scale, 1e-12));

  for (long k = 1; k <= config.iterations; ++k) {
    const auto start = Clock::now();
    int accepted = 0;
    for (int j = 0; j < d; ++j) accepted += mh_step(chain, j, freqs, design, settings, rng) ? 1 : 0;
    CMatrix current;
    if (k > config.burnin) {
      current = mixture_matrix(chain.state);
      sum += current;
      ++samples;
      post_proposals += d;
      post_accepted += accepted;
    } else if (config.adapt_during_burnin && settings.proposal_scale > 0.0) {
      const double rate = static_cast<double>(accepted) / d;
      log_scale += (rate - config.target_acceptance) / std::pow(static_cast<double>(k), 0.6);
      log_scale = std::clamp(log_scale, std::log(1e-6), std::log(10.0));
      settings.proposal_scale = std::exp(log_scale);
    }
    const auto elapsed = Clock::now() - start;
    total += elapsed;
    if (config.record_iteration_times) seconds.push_back(std::chrono::duration<double>(elapsed).count());

    if (target) {
      if (current.size() == 0) current = mixture_matrix(chain.state);
      const double inst = (current - target->matrix()).norm();
      inst_trace.push_back(inst);
      error_trace.push_back(samples > 0 ? (sum / static_cast<double>(samples) - target->matrix()).norm()
                                        : inst);
    }
  }

  const double tr = sum.trace().real();
  CMatrix rho = sum / tr;
  rho = (0.5 * (rho + rho.adjoint())).eval();

  EstimateResult out{"prob", d, DensityMatrix(std::move(rho))};
  out.trace_before_normalization = tr / static_cast<double>(samples);
  out.error_trace = std::move(error_trace);
  out.instantaneous_error_trace = std::move(inst_trace);
  out.initial_error = initial_error;
  out.iteration_seconds = std::move(seconds);
  out.wall_time_per_iteration =
      std::chrono::duration<double>(total).count() / static_cast<double>(config.iterations);
  out.acceptance_rate =
      post_proposals > 0 ? static_cast<double>(post_accepted) / static_cast<double>(post_proposals) : 0.0;
  out.proposal_scale = settings.proposal_scale;
  out.iterations = config.iterations;
  out.burnin = config.burnin;
  return out;
}

}  // namespace bmtomo
