#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bmtomo/harness.hpp"

using namespace bmtomo;
using namespace bmtomo::harness;

namespace {

ExperimentConfig small_accuracy_config() {
  ExperimentConfig c;
  c.kind = ExperimentKind::AccuracyBoxplot;
  c.n_values = {2};
  c.target = TargetKind::Rank2;
  c.estimators = {EstimatorSpec::parse("bm:2"), EstimatorSpec::parse("bm:4"), EstimatorSpec::parse("prob")};
  c.m_values = {1024};
  for (std::uint64_t s = 0; s < 10; ++s) c.seeds.push_back(s);
  c.iterations = 300;
  c.burnin = 100;
  return c;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ResultRecord without_clock_fields(ResultRecord r) {
  r.timestamp.clear();
  for (auto& run : r.runs) run.seconds_per_iteration = 0.0;
  r.timings.clear();
  r.config.workers = 1;  // pool size is echoed but must not change results
  return r;
}

}  // namespace

TEST(EstimatorSpecParse, Forms) {
  EXPECT_EQ(EstimatorSpec::parse("bm:2").resolved_rank(8), 2);
  EXPECT_EQ(EstimatorSpec::parse("bm:d").resolved_rank(8), 8);
  EXPECT_EQ(EstimatorSpec::parse("prob").label(), "prob");
  EXPECT_EQ(EstimatorSpec::parse("bm:d").label(), "bm:d");
  EXPECT_THROW(EstimatorSpec::parse("bm:0"), ParameterError);
  EXPECT_THROW(EstimatorSpec::parse("lasso"), ParameterError);
}

TEST(LambdaSpecParse, Forms) {
  EXPECT_EQ(LambdaSpec::parse("m/2").resolve(4096), 2048.0);
  EXPECT_EQ(LambdaSpec::parse("12.5").resolve(4096), 12.5);
  EXPECT_EQ(LambdaSpec::parse("m/2").label(), "m/2");
  EXPECT_THROW(LambdaSpec::parse("-1"), ParameterError);
  EXPECT_THROW(LambdaSpec::parse("m/3"), ParameterError);
}

TEST(ExperimentKindNames, RoundTrip) {
  for (const char* s : {"accuracy_boxplot", "convergence_trace", "slope_vs_m", "timing_table"}) {
    EXPECT_EQ(to_string(parse_experiment_kind(s)), s);
  }
  EXPECT_THROW(parse_experiment_kind("fig5"), ParameterError);
}

TEST(ConfigValidation, RejectsBadConfigs) {
  ExperimentConfig c = small_accuracy_config();
  EXPECT_NO_THROW(c.validate());
  c.seeds.clear();
  EXPECT_THROW(c.validate(), ParameterError);
  c = small_accuracy_config();
  c.m_values = {0};
  EXPECT_THROW(c.validate(), ParameterError);
  c = small_accuracy_config();
  c.estimators = {EstimatorSpec::parse("bm:5")};
  EXPECT_THROW(c.validate(), ParameterError);
  c = small_accuracy_config();
  c.estimators.clear();
  EXPECT_THROW(c.validate(), ParameterError);
}

TEST(ConfigDefaults, ConvergenceTraceProtocol) {
  ExperimentConfig c;
  c.kind = ExperimentKind::ConvergenceTrace;
  EXPECT_EQ(c.effective_iterations(), 2000);
  EXPECT_EQ(c.effective_burnin(), 800);
  c.kind = ExperimentKind::AccuracyBoxplot;
  EXPECT_EQ(c.effective_iterations(), 10000);
  EXPECT_EQ(c.effective_burnin(), 2000);
  EXPECT_EQ(default_m_grid(), (std::vector<long>{32, 64, 128, 256, 512, 1024, 2048, 4096}));
}

TEST(SlopeRegression, ExactPowerLaw) {
  const std::vector<long> grid = default_m_grid();
  std::vector<double> inv, flat;
  for (long m : grid) {
    inv.push_back(3.0 / static_cast<double>(m));
    flat.push_back(0.25);
  }
  EXPECT_NEAR(slope_regression(grid, inv), -1.0, 1e-12);
  EXPECT_NEAR(slope_regression(grid, flat), 0.0, 1e-12);
}

TEST(SlopeRegression, SkipsLeadingPoints) {
  // Only the last three points follow 1/m^2; the first two are outliers.
  const std::vector<long> grid{1, 2, 4, 8, 16};
  const std::vector<double> err{100.0, 100.0, 1.0 / 16, 1.0 / 64, 1.0 / 256};
  EXPECT_NEAR(slope_regression(grid, err), -2.0, 1e-12);
}

TEST(SlopeRegression, DegenerateInputs) {
  EXPECT_THROW(slope_regression({32, 64}, {1.0, 0.5}), ParameterError);
  EXPECT_THROW(slope_regression({32, 64, 128}, {1.0, 0.5, 0.25}), ParameterError);  // one point left
  EXPECT_THROW(slope_regression({8, 8, 8, 8, 8}, {1, 1, 1, 1, 1}), ParameterError);
  EXPECT_THROW(slope_regression({8, 16, 32, 64}, {1.0, 0.5, 0.0, 0.1}), ParameterError);
  EXPECT_THROW(slope_regression({8, 16, 32, 64}, {1.0, 0.5}), ParameterError);
}

TEST(RunExperiment, AccuracyRowsPerSeedAndEstimator) {
  const ResultRecord rec = run_experiment(small_accuracy_config());
  ASSERT_EQ(rec.runs.size(), 30u);
  const auto rows = lines(final_errors_csv(rec));
  ASSERT_EQ(rows.size(), 31u);
  EXPECT_EQ(rows.front(), kFinalErrorsHeader);
  for (const auto& r : rec.runs) {
    ASSERT_TRUE(r.final_error.has_value()) << r.estimator;
    EXPECT_GT(*r.final_error, 0.0);
    EXPECT_EQ(r.iterations, 300);
    EXPECT_EQ(r.burnin, 100);
  }
}

TEST(RunExperiment, ConvergenceTracesHaveFullLength) {
  ExperimentConfig c;
  c.kind = ExperimentKind::ConvergenceTrace;
  c.n_values = {2};
  c.estimators = {EstimatorSpec::parse("bm:2"), EstimatorSpec::parse("prob")};
  c.m_values = {1024};
  c.seeds = {0, 1};
  c.iterations = 2000;
  c.burnin = 800;
  const ResultRecord rec = run_experiment(c);
  ASSERT_EQ(rec.runs.size(), 4u);
  for (const auto& r : rec.runs) {
    EXPECT_EQ(r.trace_running.size(), 2000u);
    EXPECT_EQ(r.trace_instantaneous.size(), 2000u);
  }
  const auto rows = lines(traces_csv(rec));
  EXPECT_EQ(rows.front(), kTracesHeader);
  EXPECT_EQ(rows.size(), 1u + 4u * 2000u);
}

TEST(RunExperiment, SlopeRecordsPerEstimator) {
  ExperimentConfig c;
  c.kind = ExperimentKind::SlopeVsM;
  c.n_values = {1};
  c.target = TargetKind::Rank1;
  c.estimators = {EstimatorSpec::parse("bm:1")};
  c.m_values = {64, 128, 256, 512, 1024};
  c.seeds = {0, 1, 2};
  c.iterations = 400;
  c.burnin = 100;
  const ResultRecord rec = run_experiment(c);
  ASSERT_EQ(rec.slopes.size(), 1u);
  const SlopeRecord& s = rec.slopes.front();
  EXPECT_EQ(s.m_grid, c.m_values);
  ASSERT_EQ(s.mean_error_sq.size(), 5u);
  EXPECT_NEAR(s.slope, slope_regression(s.m_grid, s.mean_error_sq), 1e-15);
  const auto rows = lines(slope_csv(rec));
  EXPECT_EQ(rows.front(), kSlopeHeader);
  EXPECT_EQ(rows.size(), 6u);
}

TEST(ResultJson, RoundTripsToEqualRecord) {
  const ResultRecord rec = run_experiment(small_accuracy_config());
  const ResultRecord back = result_from_json(to_json(rec));
  EXPECT_EQ(back, rec);
  EXPECT_EQ(to_json(back), to_json(rec));
}

TEST(ResultJson, RejectsMalformedInput) {
  EXPECT_ANY_THROW(result_from_json("{"));
  EXPECT_ANY_THROW(result_from_json("{}"));
}

TEST(CsvSchema, HeadersMatchDocumentedOrder) {
  EXPECT_EQ(std::string(kFinalErrorsHeader),
            "experiment,n,target,estimator,rank,m,seed,final_error,final_error_sq,iterations,burnin");
  EXPECT_EQ(std::string(kTracesHeader), "estimator,seed,iteration,error_running_mean,error_instantaneous");
  EXPECT_EQ(std::string(kSlopeHeader), "estimator,m,mean_final_error_sq,seeds");
  EXPECT_EQ(std::string(kTimingHeader),
            "n,estimator,rank,median_seconds_per_iteration,mean_seconds_per_iteration,timed_iterations");
}

TEST(Determinism, IdenticalConfigsGiveIdenticalFiles) {
  ExperimentConfig c = small_accuracy_config();
  c.seeds = {3, 4};
  c.workers = 3;
  const ResultRecord a = run_experiment(c);
  c.workers = 1;
  const ResultRecord b = run_experiment(c);
  EXPECT_EQ(final_errors_csv(a), final_errors_csv(b));
  EXPECT_EQ(to_json(without_clock_fields(a)), to_json(without_clock_fields(b)));

  const auto dir = std::filesystem::temp_directory_path() / "bmtomo_harness_test";
  std::filesystem::remove_all(dir);
  const auto first = emit_plotdata(a, dir / "a");
  const auto second = emit_plotdata(b, dir / "b");
  ASSERT_EQ(first.size(), second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(first[i].filename(), second[i].filename());
    if (first[i].extension() == ".csv") EXPECT_EQ(slurp(first[i]), slurp(second[i]));
  }
  std::filesystem::remove_all(dir);
}

TEST(Timing, RankTwoCheaperThanFullRankAtThreeQubits) {
  ExperimentConfig c;
  c.kind = ExperimentKind::TimingTable;
  c.n_values = {2, 3};
  c.estimators = {EstimatorSpec::parse("bm:2"), EstimatorSpec::parse("bm:d")};
  c.m_values = {256};
  c.seeds = {0};
  const ResultRecord rec = run_experiment(c);
  ASSERT_EQ(rec.timings.size(), 4u);
  double r2 = 0.0, rd = 0.0;
  for (const auto& t : rec.timings) {
    EXPECT_EQ(t.timed_iterations, 1000);
    EXPECT_GT(t.median_seconds, 0.0);
    if (t.n == 3) (t.estimator == "bm:2" ? r2 : rd) = t.median_seconds;
  }
  EXPECT_LT(r2, rd);
  const auto rows = lines(timing_csv(rec));
  EXPECT_EQ(rows.front(), kTimingHeader);
  EXPECT_EQ(rows.size(), 5u);
}
