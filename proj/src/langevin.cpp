#include "bmtomo/langevin.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

#include "bmtomo/realify.hpp"

namespace bmtomo {

std::string to_string(NoiseConvention c) {
  return c == NoiseConvention::InverseBeta ? "algorithm1" : "eq7";
}

NoiseConvention parse_noise_convention(const std::string& s) {
  if (s == "algorithm1") return NoiseConvention::InverseBeta;
  if (s == "eq7") return NoiseConvention::InverseSqrtBeta;
  throw ParameterError("unknown noise convention '" + s + "'");
}

void SamplerConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ParameterError("sampler: eta must be positive");
  if (!(beta > 0.0)) throw ParameterError("sampler: beta must be positive");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ParameterError("sampler: theta must be positive");
  if (lambda && !(*lambda > 0.0)) throw ParameterError("sampler: lambda must be positive");
  if (iterations < 1) throw ParameterError("sampler: iterations must be >= 1");
  if (burnin < 0 || burnin >= iterations) {
    throw ParameterError("sampler: need 0 <= burnin < iterations");
  }
}

double SamplerConfig::noise_coefficient() const {
  if (!inject_noise) return 0.0;
  return noise == NoiseConvention::InverseBeta ? std::sqrt(2.0 * eta) / beta
                                               : std::sqrt(2.0 * eta / beta);
}

double default_theta(int r, int d) { return r < d ? 100.0 : 0.1; }

namespace {

void check_frequencies(const EmpiricalFrequencies& freqs, const MeasurementDesign& design) {
  if (freqs.values.rows() != design.num_experiments() ||
      freqs.values.cols() != design.outcomes_per_experiment()) {
    throw DimensionError("frequency table shape " + std::to_string(freqs.values.rows()) + "x" +
                         std::to_string(freqs.values.cols()) + " does not match the design");
  }
}

}  // namespace

double likelihood_bm(const BMFactor& y, const EmpiricalFrequencies& freqs,
                     const MeasurementDesign& design) {
  check_frequencies(freqs, design);
  if (y.rows() != design.dim()) throw DimensionError("likelihood_bm: factor has wrong row count");
  const CMatrix rho = y * y.adjoint();
  return (freqs.values - operator_traces(design, rho)).squaredNorm();
}

BmPosterior::BmPosterior(const MeasurementDesign& design, const EmpiricalFrequencies& freqs,
                         double lambda, PriorParams prior)
    : design_(design), freqs_(freqs), lambda_(lambda), prior_(prior) {
  check_frequencies(freqs, design);
  if (!(lambda > 0.0)) throw ParameterError("posterior: lambda must be positive");
  prior_.validate();
  if (prior_.d != design.dim()) throw DimensionError("posterior: prior dimension != design dimension");
}

const std::vector<RMatrix>& BmPosterior::embedded_operators() const {
  std::call_once(embedded_once_, [this] {
    embedded_.reserve(design_.num_operators());
    for (const Experiment& e : design_.experiments()) {
      for (const MeasurementOperator& op : e.outcomes) embedded_.push_back(embed(op.dense));
    }
  });
  return embedded_;
}

double BmPosterior::value(const RealFactor& t) const {
  const int d = prior_.d;
  const int r = prior_.r;
  if (t.rows() != 2 * d || t.cols() != 2 * r) throw DimensionError("posterior: factor shape mismatch");
  if (!t.allFinite()) throw NumericalError("posterior: non-finite factor entries");

  const RMatrix gram = t * t.transpose();
  const std::vector<RMatrix>& ops = embedded_operators();
  const double sqrt2 = std::sqrt(2.0);
  const int outcomes = design_.outcomes_per_experiment();
  double data = 0.0;
  std::size_t k = 0;
  for (int a = 0; a < design_.num_experiments(); ++a) {
    for (int s = 0; s < outcomes; ++s, ++k) {
      // tr(Pt G) = sum_ij Pt_ij G_ji, and G is symmetric.
      const double tr = ops[k].cwiseProduct(gram).sum();
      const double resid = freqs_.values(a, s) - sqrt2 * tr;
      data += resid * resid;
    }
  }

  RMatrix prior_matrix = sqrt2 * gram;
  prior_matrix.diagonal().array() += prior_.theta * prior_.theta / sqrt2;
  Eigen::LLT<RMatrix> llt(prior_matrix);
  if (llt.info() != Eigen::Success) throw NumericalError("posterior: prior matrix not positive definite");
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return lambda_ * data + (2.0 * d + r + 2.0) / 4.0 * log_det;
}

RMatrix BmPosterior::gradient(const RealFactor& t) const {
  const int d = prior_.d;
  if (t.rows() != 2 * d || t.cols() != 2 * prior_.r) {
    throw DimensionError("posterior: factor shape mismatch");
  }
  const CMatrix y = unembed(t);
  const CMatrix rho = y * y.adjoint();
  CMatrix weighted = CMatrix::Zero(d, d);
  const int outcomes = design_.outcomes_per_experiment();
  for (int a = 0; a < design_.num_experiments(); ++a) {
    const Experiment& e = design_.experiment(a);
    for (int s = 0; s < outcomes; ++s) {
      const MeasurementOperator& op = e.outcomes[static_cast<std::size_t>(s)];
      const double resid = freqs_.values(a, s) - op.trace_with(rho);
      for (const auto& entry : op.entries) weighted(entry.row, entry.col) += resid * entry.value;
    }
  }
  RMatrix g = grad_neg_log_prior_real(t, prior_);
  g.noalias() -= (4.0 * lambda_) * embed(weighted * y);
  return g;
}

double BmPosterior::likelihood(const BMFactor& y) const { return likelihood_bm(y, freqs_, design_); }

namespace {

BmPosterior posterior_for(const RealFactor& t, const EmpiricalFrequencies& freqs,
                          const MeasurementDesign& design, const SamplerConfig& config) {
  if (t.rows() != 2 * design.dim() || t.cols() % 2 != 0 || t.cols() == 0) {
    throw DimensionError("real factor shape does not match the design");
  }
  const PriorParams prior{config.theta, design.dim(), static_cast<int>(t.cols() / 2)};
  return BmPosterior(design, freqs, config.effective_lambda(freqs.m), prior);
}

}  // namespace

double neg_log_posterior_real(const RealFactor& t, const EmpiricalFrequencies& freqs,
                              const MeasurementDesign& design, const SamplerConfig& config) {
  return posterior_for(t, freqs, design, config).value(t);
}

RMatrix grad_neg_log_posterior_real(const RealFactor& t, const EmpiricalFrequencies& freqs,
                                    const MeasurementDesign& design, const SamplerConfig& config) {
  return posterior_for(t, freqs, design, config).gradient(t);
}

CMatrix draw_complex_noise(int d, int r, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix w(d, r);
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < d; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      w(i, j) = Complex(re, im);
    }
  }
  return w;
}

RealFactor langevin_update(const RealFactor& t, const RMatrix& grad, const RMatrix& embedded_noise,
                           double eta, double noise_coeff) {
  RealFactor next = t - eta * grad;
  if (noise_coeff != 0.0) next += noise_coeff * embedded_noise;
  return next;
}

void langevin_step(ChainState& state, const BmPosterior& posterior, const SamplerConfig& config) {
  const long step = state.step + 1;
  RMatrix grad;
  try {
    grad = posterior.gradient(state.t);
  } catch (const NumericalError& e) {
    throw DivergenceError(step, std::string("gradient failed at step ") + std::to_string(step) +
                                    ": " + e.what());
  }
  const double coeff = config.noise_coefficient();
  if (coeff != 0.0) {
    const CMatrix w = draw_complex_noise(posterior.prior().d, posterior.prior().r, state.rng);
    state.t = langevin_update(state.t, grad, embed(w), config.eta, coeff);
  } else {
    state.t -= config.eta * grad;
  }
  state.step = step;
  if (!state.t.allFinite()) {
    throw DivergenceError(step, "Langevin iterate became non-finite at step " + std::to_string(step) +
                                    " (gradient norm " + std::to_string(grad.norm()) + ")");
  }
}

namespace {

CMatrix normalized(const CMatrix& m) { return m / m.trace().real(); }

double error_to(const CMatrix& est, const DensityMatrix& target) {
  return (est - target.matrix()).norm();
}

}  // namespace

EstimateResult run_bm_sampler(int r, const EmpiricalFrequencies& freqs,
                              const MeasurementDesign& design, const SamplerConfig& config,
                              const DensityMatrix* target) {
  config.validate();
  const SystemSize size = SystemSize::qubits(design.qubits());
  if (r < 1 || r > size.d) throw ParameterError("run_bm_sampler: rank must lie in [1, d]");
  if (target && target->dim() != size.d) throw DimensionError("run_bm_sampler: target dimension mismatch");

  const BmPosterior posterior(design, freqs, config.effective_lambda(freqs.m),
                              PriorParams{config.theta, size.d, r});
  const BMFactor y0 = init_factor(size, r, mix_seed(config.seed, 1));
  ChainState state{embed(y0), 0, Rng(mix_seed(config.seed, 2))};

  std::optional<double> initial_error;
  if (target) initial_error = error_to(normalized(y0 * y0.adjoint()), *target);

  const int d = size.d;
  CMatrix sum = CMatrix::Zero(d, d);
  long samples = 0;
  std::vector<double> error_trace, inst_trace, seconds;
  if (target) {
    error_trace.reserve(static_cast<std::size_t>(config.iterations));
    inst_trace.reserve(static_cast<std::size_t>(config.iterations));
  }
  if (config.record_iteration_times) seconds.reserve(static_cast<std::size_t>(config.iterations));

  using Clock = std::chrono::steady_clock;
  Clock::duration total{0};
  for (long k = 1; k <= config.iterations; ++k) {
    const auto start = Clock::now();
    langevin_step(state, posterior, config);
    CMatrix y;
    if (k > config.burnin) {
      y = unembed(state.t);
      sum.noalias() += y * y.adjoint();
      ++samples;
    }
    const auto elapsed = Clock::now() - start;
    total += elapsed;
    if (config.record_iteration_times) seconds.push_back(std::chrono::duration<double>(elapsed).count());

    if (target) {
      if (y.size() == 0) y = unembed(state.t);
      const CMatrix inst = normalized(y * y.adjoint());
      const double inst_err = error_to(inst, *target);
      inst_trace.push_back(inst_err);
      error_trace.push_back(samples > 0 ? error_to(normalized(sum), *target) : inst_err);
    }
  }

  const double tr = sum.trace().real() / static_cast<double>(samples);
  CMatrix rho = sum / sum.trace().real();
  rho = (0.5 * (rho + rho.adjoint())).eval();

  EstimateResult out{"bm", r, DensityMatrix(std::move(rho))};
  out.trace_before_normalization = tr;
  out.error_trace = std::move(error_trace);
  out.instantaneous_error_trace = std::move(inst_trace);
  out.initial_error = initial_error;
  out.iteration_seconds = std::move(seconds);
  out.wall_time_per_iteration =
      std::chrono::duration<double>(total).count() / static_cast<double>(config.iterations);
  out.iterations = config.iterations;
  out.burnin = config.burnin;
  return out;
}

}  // namespace bmtomo
