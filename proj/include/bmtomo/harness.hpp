#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bmtomo/langevin.hpp"
#include "bmtomo/measurement.hpp"
#include "bmtomo/qstate.hpp"

namespace bmtomo::harness {

std::string software_version();

enum class ExperimentKind { AccuracyBoxplot, ConvergenceTrace, SlopeVsM, TimingTable };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& s);

/// "bm:<r>", "bm:d" (rank budget = d) or "prob".
struct EstimatorSpec {
  enum class Kind { Bm, Prob };
  Kind kind = Kind::Bm;
  int rank = 0;  // bm only; 0 means d

  static EstimatorSpec parse(const std::string& s);
  std::string label() const;
  int resolved_rank(int d) const;
  bool operator==(const EstimatorSpec&) const = default;
};

/// Likelihood weight: either the literal "m/2" or a fixed positive value.
struct LambdaSpec {
  bool half_m = true;
  double value = 0.0;

  static LambdaSpec parse(const std::string& s);
  double resolve(long m) const { return half_m ? 0.5 * static_cast<double>(m) : value; }
  std::string label() const;
  bool operator==(const LambdaSpec&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::AccuracyBoxplot;
  std::vector<int> n_values{2};  // exactly one unless kind == TimingTable
  TargetKind target = TargetKind::Rank2;
  double mixing_weight = 0.98;
  std::vector<EstimatorSpec> estimators;
  std::vector<long> m_values{4096};  // one value, or the grid for SlopeVsM
  std::vector<std::uint64_t> seeds;
  DesignMode design = DesignMode::WholeSystem;
  std::optional<long> iterations;  // default 10^4 (2000 for convergence_trace)
  std::optional<long> burnin;      // default 2000 (800 for convergence_trace)
  std::optional<double> eta;
  std::optional<double> beta;
  std::optional<double> theta;     // default: 100 if r < d, 0.1 if r = d
  LambdaSpec lambda;
  NoiseConvention noise = NoiseConvention::InverseBeta;
  long timing_warmup = 100;
  long timing_iterations = 1000;
  int workers = 1;
  std::string out_dir = ".";

  void validate() const;
  long effective_iterations() const;
  long effective_burnin() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Default m-grid for slope runs: 2^5 ... 2^12.
std::vector<long> default_m_grid();

struct RunRecord {
  std::string estimator;  // label, e.g. "bm:2"
  int rank = 0;
  int n = 0;
  long m = 0;
  std::uint64_t seed = 0;
  std::optional<double> final_error;  // unset when the chain diverged
  std::optional<std::string> failure;
  long iterations = 0;
  long burnin = 0;
  double theta = 0.0;   // effective prior scale (bm only)
  double lambda = 0.0;  // effective likelihood weight
  double seconds_per_iteration = 0.0;
  double acceptance_rate = 1.0;
  double trace_before_normalization = 0.0;
  std::optional<DensityCheck> validity;  // of the returned estimate
  std::vector<double> trace_running;
  std::vector<double> trace_instantaneous;

  bool operator==(const RunRecord&) const = default;
};

struct SlopeRecord {
  std::string estimator;
  std::vector<long> m_grid;
  std::vector<double> mean_error_sq;
  double slope = 0.0;
  bool operator==(const SlopeRecord&) const = default;
};

struct TimingRecord {
  int n = 0;
  std::string estimator;
  int rank = 0;
  double median_seconds = 0.0;
  double mean_seconds = 0.0;
  long timed_iterations = 0;
  bool operator==(const TimingRecord&) const = default;
};

struct ResultRecord {
  std::string software_version;
  std::string timestamp;
  ExperimentConfig config;
  std::vector<RunRecord> runs;
  std::vector<SlopeRecord> slopes;
  std::vector<TimingRecord> timings;
  bool operator==(const ResultRecord&) const = default;
};

/// OLS slope of log(errors) against log(m) after dropping the first `skip`
/// grid points. Needs at least two remaining distinct m values and positive
/// errors; throws ParameterError otherwise.
double slope_regression(const std::vector<long>& m_grid, const std::vector<double>& errors,
                        int skip = 2);

/// Runs one estimator on one (n, m, seed) cell. Divergence is captured in
/// the record, not thrown.
RunRecord run_cell(const ExperimentConfig& config, const MeasurementDesign& design,
                   const EstimatorSpec& estimator, long m, std::uint64_t seed, bool keep_traces);

ResultRecord run_experiment(const ExperimentConfig& config);

std::string to_json(const ResultRecord& record);
ResultRecord result_from_json(const std::string& text);

/// Column order of the final-error CSV.
inline constexpr const char* kFinalErrorsHeader =
    "experiment,n,target,estimator,rank,m,seed,final_error,final_error_sq,iterations,burnin";
inline constexpr const char* kTracesHeader =
    "estimator,seed,iteration,error_running_mean,error_instantaneous";
inline constexpr const char* kSlopeHeader = "estimator,m,mean_final_error_sq,seeds";
inline constexpr const char* kTimingHeader =
    "n,estimator,rank,median_seconds_per_iteration,mean_seconds_per_iteration,timed_iterations";

std::string final_errors_csv(const ResultRecord& record);
std::string traces_csv(const ResultRecord& record);
std::string slope_csv(const ResultRecord& record);
std::string timing_csv(const ResultRecord& record);

/// Writes <kind>_final_errors.csv, and where applicable <kind>_traces.csv,
/// slope_vs_m_summary.csv, timing_table.csv, plus <kind>_result.json into
/// `dir`. Returns the written paths.
std::vector<std::filesystem::path> emit_plotdata(const ResultRecord& record,
                                                 const std::filesystem::path& dir);

}  // namespace bmtomo::harness
