#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bmtomo/langevin.hpp"
#include "bmtomo/oracles.hpp"
#include "bmtomo/realify.hpp"

using namespace bmtomo;

namespace {

CMatrix random_complex(int p, int q, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  CMatrix m(p, q);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

struct Problem {
  MeasurementDesign design;
  DensityMatrix target;
  EmpiricalFrequencies freqs;
};

Problem make_problem(DesignMode mode, int n, TargetKind kind, long m, std::uint64_t seed) {
  MeasurementDesign design = build_design(mode, n);
  DensityMatrix target = make_target({kind}, SystemSize::qubits(n), seed);
  EmpiricalFrequencies freqs = simulate_counts(design, target, m, seed + 1000);
  return {std::move(design), std::move(target), std::move(freqs)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

}  // namespace

TEST(SamplerConfig, DefaultsAndValidation) {
  SamplerConfig c;
  EXPECT_EQ(c.eta, 1e-5);
  EXPECT_EQ(c.beta, 1e3);
  EXPECT_EQ(c.iterations, 10000);
  EXPECT_EQ(c.burnin, 2000);
  EXPECT_EQ(c.effective_lambda(4096), 2048.0);
  EXPECT_NO_THROW(c.validate());
  EXPECT_DOUBLE_EQ(c.noise_coefficient(), std::sqrt(2e-5) / 1e3);
  c.noise = NoiseConvention::InverseSqrtBeta;
  EXPECT_DOUBLE_EQ(c.noise_coefficient(), std::sqrt(2e-5 / 1e3));
  c.burnin = c.iterations;
  EXPECT_THROW(c.validate(), ParameterError);
  SamplerConfig bad;
  bad.eta = 0.0;
  EXPECT_THROW(bad.validate(), ParameterError);
  EXPECT_EQ(default_theta(2, 4), 100.0);
  EXPECT_EQ(default_theta(4, 4), 0.1);
}

TEST(NoiseConventionNames, RoundTrip) {
  EXPECT_EQ(parse_noise_convention("algorithm1"), NoiseConvention::InverseBeta);
  EXPECT_EQ(parse_noise_convention("eq7"), NoiseConvention::InverseSqrtBeta);
  EXPECT_EQ(to_string(NoiseConvention::InverseSqrtBeta), "eq7");
  EXPECT_THROW(parse_noise_convention("other"), ParameterError);
}

TEST(Likelihood, ZeroOnExactProbabilities) {
  for (DesignMode mode : {DesignMode::PerQubit, DesignMode::WholeSystem}) {
    const MeasurementDesign design = build_design(mode, 2);
    const BMFactor y = init_factor(SystemSize::qubits(2), 2, 4);
    const DensityMatrix rho(y * y.adjoint());
    const EmpiricalFrequencies exact{born_probabilities(design, rho), 1};
    EXPECT_NEAR(likelihood_bm(y, exact, design), 0.0, 1e-28);
  }
}

TEST(Likelihood, ZeroFactorGivesSumOfSquares) {
  const Problem p = make_problem(DesignMode::PerQubit, 2, TargetKind::Rank2, 100, 1);
  EXPECT_NEAR(likelihood_bm(CMatrix::Zero(4, 2), p.freqs, p.design), p.freqs.values.squaredNorm(), 1e-14);
}

TEST(Likelihood, MatchesDenseOracle) {
  Rng rng(10);
  for (DesignMode mode : {DesignMode::PerQubit, DesignMode::WholeSystem}) {
    for (int n = 1; n <= 3; ++n) {
      const Problem p = make_problem(mode, n, TargetKind::Rank2, 50, static_cast<std::uint64_t>(n));
      for (int k = 0; k < 5; ++k) {
        const CMatrix y = random_complex(1 << n, 1 + k % 2, rng, 0.3);
        EXPECT_NEAR(likelihood_bm(y, p.freqs, p.design), oracles::dense_likelihood_oracle(y, p.freqs, p.design),
                    1e-12);
      }
    }
  }
}

TEST(Likelihood, RejectsShapeMismatch) {
  const Problem p = make_problem(DesignMode::PerQubit, 2, TargetKind::Rank2, 10, 0);
  EXPECT_THROW(likelihood_bm(CMatrix::Zero(8, 1), p.freqs, p.design), DimensionError);
  const MeasurementDesign other = build_design(DesignMode::WholeSystem, 2);
  EXPECT_THROW(likelihood_bm(CMatrix::Zero(4, 1), p.freqs, other), DimensionError);
}

TEST(Posterior, ValueAtOrigin) {
  const Problem p = make_problem(DesignMode::WholeSystem, 2, TargetKind::Rank2, 200, 2);
  SamplerConfig c;
  c.theta = 0.7;
  c.lambda = 13.0;
  const int d = 4, r = 2;
  const double expected = 13.0 * p.freqs.values.squaredNorm() +
                          (2.0 * d + r + 2.0) / 4.0 * (2.0 * d * std::log(0.49 / std::sqrt(2.0)));
  EXPECT_NEAR(neg_log_posterior_real(RMatrix::Zero(8, 4), p.freqs, p.design, c), expected, 1e-12 * std::abs(expected));
}

TEST(Posterior, MatchesComplexSide) {
  Rng rng(11);
  for (DesignMode mode : {DesignMode::PerQubit, DesignMode::WholeSystem}) {
    const Problem p = make_problem(mode, 2, TargetKind::Rank2, 300, 3);
    for (int r : {1, 2, 4}) {
      SamplerConfig c;
      c.theta = 1.5;
      c.lambda = 150.0;
      const PriorParams prior{c.theta, 4, r};
      for (int k = 0; k < 10; ++k) {
        const CMatrix y = random_complex(4, r, rng, 0.4);
        // psi(theta^2 I + Y Y^*) has determinant det(...)^2 / 2^d.
        const double expected = 150.0 * likelihood_bm(y, p.freqs, p.design) + neg_log_prior(y, prior) -
                                0.5 * prior.exponent() * 4 * std::log(2.0);
        EXPECT_NEAR(neg_log_posterior_real(embed(y), p.freqs, p.design, c), expected,
                    1e-9 * std::max(1.0, std::abs(expected)));
      }
    }
  }
}

TEST(Posterior, DoublingLambdaDoublesDataTerm) {
  Rng rng(12);
  const Problem p = make_problem(DesignMode::PerQubit, 2, TargetKind::Rank2, 300, 4);
  const CMatrix y = random_complex(4, 2, rng, 0.5);
  SamplerConfig a;
  a.lambda = 40.0;
  SamplerConfig b = a;
  b.lambda = 80.0;
  const double fa = neg_log_posterior_real(embed(y), p.freqs, p.design, a);
  const double fb = neg_log_posterior_real(embed(y), p.freqs, p.design, b);
  EXPECT_NEAR(fb - fa, 40.0 * likelihood_bm(y, p.freqs, p.design), 1e-9 * std::abs(fb));
}

TEST(Posterior, GradientVanishesAtOrigin) {
  const Problem p = make_problem(DesignMode::WholeSystem, 2, TargetKind::Rank2, 200, 5);
  SamplerConfig c;
  EXPECT_EQ(grad_neg_log_posterior_real(RMatrix::Zero(8, 4), p.freqs, p.design, c), RMatrix::Zero(8, 4));
}

TEST(Posterior, GradientMatchesFiniteDifferences) {
  Rng rng(13);
  for (DesignMode mode : {DesignMode::PerQubit, DesignMode::WholeSystem}) {
    for (int n = 1; n <= 3; ++n) {
      const int d = 1 << n;
      const Problem p = make_problem(mode, n, TargetKind::Rank2, 256, static_cast<std::uint64_t>(7 + n));
      for (int r : {1, 2, d}) {
        SamplerConfig c;
        c.theta = default_theta(r, d);
        for (int k = 0; k < 5; ++k) {
          const RMatrix t = embed(random_complex(d, r, rng, 0.5 / std::sqrt(static_cast<double>(d * r))));
          const RMatrix analytic = grad_neg_log_posterior_real(t, p.freqs, p.design, c);
          const RMatrix fd = oracles::finite_diff_gradient(
              [&](const RMatrix& x) { return neg_log_posterior_real(x, p.freqs, p.design, c); }, t);
          EXPECT_LT((analytic - fd).norm(), 1e-5 * analytic.norm())
              << to_string(mode) << " n=" << n << " r=" << r;
        }
      }
    }
  }
}

TEST(Posterior, GradientKeepsBlockStructure) {
  Rng rng(14);
  const Problem p = make_problem(DesignMode::PerQubit, 2, TargetKind::Rank2, 128, 6);
  SamplerConfig c;
  c.theta = 0.5;
  for (int k = 0; k < 10; ++k) {
    const RMatrix g = grad_neg_log_posterior_real(embed(random_complex(4, 3, rng, 0.3)), p.freqs, p.design, c);
    EXPECT_LT(block_structure_defect(g), 1e-12 * std::max(1.0, g.norm()));
  }
}

TEST(LangevinUpdate, ScriptedStep) {
  Rng rng(15);
  const RMatrix t0 = embed(random_complex(4, 2, rng));
  const RMatrix g = embed(random_complex(4, 2, rng));
  const RMatrix w = embed(random_complex(4, 2, rng));
  const double eta = 1e-3, coeff = 0.25;
  const RMatrix expected = t0 - eta * g + coeff * w;
  EXPECT_EQ(langevin_update(t0, g, w, eta, coeff), expected);
}

TEST(LangevinStep, NoNoiseAtStationaryPointLeavesStateUnchanged) {
  const Problem p = make_problem(DesignMode::WholeSystem, 2, TargetKind::Rank2, 64, 7);
  SamplerConfig c;
  c.inject_noise = false;
  const BmPosterior post(p.design, p.freqs, 32.0, PriorParams{c.theta, 4, 2});
  ChainState s{RMatrix::Zero(8, 4), 0, Rng(1)};
  langevin_step(s, post, c);
  EXPECT_EQ(s.t, RMatrix::Zero(8, 4));
  EXPECT_EQ(s.step, 1);
}

TEST(LangevinStep, MatchesScriptedOracle) {
  const Problem p = make_problem(DesignMode::PerQubit, 2, TargetKind::Rank2, 512, 8);
  SamplerConfig c;
  const BmPosterior post(p.design, p.freqs, 256.0, PriorParams{c.theta, 4, 2});
  const RMatrix t0 = embed(init_factor(SystemSize::qubits(2), 2, 3));
  ChainState s{t0, 0, Rng(77)};
  Rng copy(77);
  const RMatrix g = post.gradient(t0);
  const CMatrix w = draw_complex_noise(4, 2, copy);
  const RMatrix expected = t0 - c.eta * g + (std::sqrt(2.0 * c.eta) / c.beta) * embed(w);
  langevin_step(s, post, c);
  EXPECT_EQ(s.t, expected);
}

TEST(LangevinStep, SeedDeterminism) {
  const Problem p = make_problem(DesignMode::WholeSystem, 2, TargetKind::Rank2, 512, 9);
  SamplerConfig c;
  const BmPosterior post(p.design, p.freqs, 256.0, PriorParams{c.theta, 4, 2});
  const RMatrix t0 = embed(init_factor(SystemSize::qubits(2), 2, 5));
  ChainState a{t0, 0, Rng(5)};
  ChainState b{t0, 0, Rng(5)};
  for (int k = 0; k < 200; ++k) {
    langevin_step(a, post, c);
    langevin_step(b, post, c);
  }
  EXPECT_EQ(a.t, b.t);
}

TEST(LangevinStep, InjectedNoiseVariance) {
  // Zero data weight keeps the drift tiny; the drift is subtracted exactly anyway.
  const Problem p = make_problem(DesignMode::WholeSystem, 1, TargetKind::Rank1, 16, 10);
  for (NoiseConvention conv : {NoiseConvention::InverseBeta, NoiseConvention::InverseSqrtBeta}) {
    SamplerConfig c;
    c.noise = conv;
    const BmPosterior post(p.design, p.freqs, 8.0, PriorParams{c.theta, 2, 1});
    const RMatrix t0 = embed(init_factor(SystemSize::qubits(1), 1, 0));
    const RMatrix drift = t0 - c.eta * post.gradient(t0);
    ChainState s{t0, 0, Rng(123)};
    double acc = 0.0;
    long count = 0;
    for (int k = 0; k < 100000; ++k) {
      s.t = t0;
      langevin_step(s, post, c);
      const CMatrix w = unembed(s.t - drift);
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        acc += w(i).real() * w(i).real() + w(i).imag() * w(i).imag();
        count += 2;
      }
    }
    const double coeff = c.noise_coefficient();
    EXPECT_NEAR(acc / count, coeff * coeff, 0.03 * coeff * coeff) << to_string(conv);
  }
  EXPECT_NEAR(SamplerConfig{}.noise_coefficient() * SamplerConfig{}.noise_coefficient(), 2e-5 / 1e6, 1e-20);
}

TEST(LangevinStep, DivergenceCarriesStepIndex) {
  const Problem p = make_problem(DesignMode::WholeSystem, 2, TargetKind::Rank2, 4096, 11);
  SamplerConfig c;
  c.eta = 1.0;
  const BmPosterior post(p.design, p.freqs, 2048.0, PriorParams{c.theta, 4, 2});
  ChainState s{embed(init_factor(SystemSize::qubits(2), 2, 1)), 0, Rng(3)};
  long thrown_at = -1;
  for (int k = 0; k < 1000 && thrown_at < 0; ++k) {
    try {
      langevin_step(s, post, c);
    } catch (const DivergenceError& e) {
      thrown_at = e.step();
    }
  }
  ASSERT_GT(thrown_at, 0);
  EXPECT_EQ(thrown_at, s.step + (s.t.allFinite() ? 1 : 0));
}

TEST(Sampler, SingleRetainedSampleIsLastIterate) {
  const Problem p = make_problem(DesignMode::WholeSystem, 2, TargetKind::Rank2, 256, 12);
  SamplerConfig c;
  c.iterations = 51;
  c.burnin = 50;
  c.seed = 4;
  const EstimateResult res = run_bm_sampler(2, p.freqs, p.design, c);

  // Replay the chain with the sampler's documented sub-streams.
  const BmPosterior post(p.design, p.freqs, 128.0, PriorParams{c.theta, 4, 2});
  ChainState s{embed(init_factor(SystemSize::qubits(2), 2, mix_seed(c.seed, 1))), 0, Rng(mix_seed(c.seed, 2))};
  for (long k = 0; k < c.iterations; ++k) langevin_step(s, post, c);
  const CMatrix y = unembed(s.t);
  const CMatrix g = y * y.adjoint();
  EXPECT_LT((res.rho_hat.matrix() - g / g.trace().real()).norm(), 1e-13);
  EXPECT_NEAR(res.trace_before_normalization, g.trace().real(), 1e-13);
}

TEST(Sampler, OutputIsDensityAndTracesHaveFullLength) {
  const Problem p = make_problem(DesignMode::PerQubit, 2, TargetKind::Rank2, 1024, 13);
  for (int r : {1, 2, 4}) {
    SamplerConfig c;
    c.iterations = 600;
    c.burnin = 100;
    c.theta = default_theta(r, 4);
    const EstimateResult res = run_bm_sampler(r, p.freqs, p.design, c, &p.target);
    EXPECT_TRUE(check_density(res.rho_hat.matrix()).ok());
    EXPECT_NEAR(res.rho_hat.matrix().trace().real(), 1.0, 1e-14);
    EXPECT_EQ(res.error_trace.size(), 600u);
    EXPECT_EQ(res.instantaneous_error_trace.size(), 600u);
    EXPECT_NEAR(res.error_trace.back(), frobenius_error(res.rho_hat, p.target), 1e-12);
    EXPECT_EQ(res.estimator, "bm");
    EXPECT_EQ(res.rank, r);
  }
}

TEST(Sampler, SingleQubitPureStateImprovesOnInitialization) {
  int better = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Problem p = make_problem(DesignMode::WholeSystem, 1, TargetKind::Rank1, 4096, seed);
    SamplerConfig c;
    c.theta = 100.0;
    c.seed = seed;
    const EstimateResult res = run_bm_sampler(1, p.freqs, p.design, c, &p.target);
    ASSERT_TRUE(res.initial_error.has_value());
    if (frobenius_error(res.rho_hat, p.target) < *res.initial_error) ++better;
  }
  EXPECT_GE(better, 9);
}

TEST(Sampler, MedianErrorNonIncreasingInShots) {
  double previous = std::numeric_limits<double>::infinity();
  for (long m : {64L, 256L, 1024L, 4096L}) {
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Problem p = make_problem(DesignMode::WholeSystem, 2, TargetKind::Rank2, m, seed);
      SamplerConfig c;
      c.theta = default_theta(2, 4);
      c.seed = seed;
      const EstimateResult res = run_bm_sampler(2, p.freqs, p.design, c);
      const double e = frobenius_error(res.rho_hat, p.target);
      errs.push_back(e * e);
    }
    const double med = median(errs);
    EXPECT_LE(med, previous) << "m=" << m;
    previous = med;
  }
}

TEST(Sampler, RankTwoCannotFitMaximallyMixedState) {
  // Eigenvalues 1/4 each: the best rank-2 approximation leaves 2 * (1/4)^2.
  const double floor = 2.0 * 0.0625;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Problem p = make_problem(DesignMode::WholeSystem, 2, TargetKind::MaximallyMixed, 1024, seed);
    SamplerConfig c;
    c.theta = default_theta(2, 4);
    c.seed = seed;
    const EstimateResult res = run_bm_sampler(2, p.freqs, p.design, c);
    const double e = frobenius_error(res.rho_hat, p.target);
    EXPECT_GE(e * e, floor - 0.01) << "seed=" << seed;
  }
}
