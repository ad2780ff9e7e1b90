#include "bmtomo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bmtomo/baseline_mh.hpp"

#ifndef BMTOMO_VERSION
#define BMTOMO_VERSION "0.0.0"
#endif

namespace bmtomo::harness {

using nlohmann::json;

std::string software_version() { return BMTOMO_VERSION; }

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::AccuracyBoxplot: return "accuracy_boxplot";
    case ExperimentKind::ConvergenceTrace: return "convergence_trace";
    case ExperimentKind::SlopeVsM: return "slope_vs_m";
    case ExperimentKind::TimingTable: return "timing_table";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
  if (s == "accuracy_boxplot") return ExperimentKind::AccuracyBoxplot;
  if (s == "convergence_trace") return ExperimentKind::ConvergenceTrace;
  if (s == "slope_vs_m") return ExperimentKind::SlopeVsM;
  if (s == "timing_table") return ExperimentKind::TimingTable;
  throw ParameterError("unknown experiment kind '" + s + "'");
}

EstimatorSpec EstimatorSpec::parse(const std::string& s) {
  if (s == "prob") return {Kind::Prob, 0};
  if (s.rfind("bm:", 0) == 0) {
    const std::string rest = s.substr(3);
    if (rest == "d") return {Kind::Bm, 0};
    std::size_t used = 0;
    int r = 0;
    try {
      r = std::stoi(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != rest.size() || rest.empty() || r < 1) {
      throw ParameterError("bad estimator rank in '" + s + "'");
    }
    return {Kind::Bm, r};
  }
  throw ParameterError("unknown estimator '" + s + "' (expected bm:<r>, bm:d or prob)");
}

std::string EstimatorSpec::label() const {
  if (kind == Kind::Prob) return "prob";
  return rank == 0 ? std::string("bm:d") : "bm:" + std::to_string(rank);
}

int EstimatorSpec::resolved_rank(int d) const {
  if (kind == Kind::Prob || rank == 0) return d;
  return rank;
}

LambdaSpec LambdaSpec::parse(const std::string& s) {
  if (s == "m/2") return {true, 0.0};
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError("lambda must be 'm/2' or a positive number, got '" + s + "'");
  }
  return {false, v};
}

std::string LambdaSpec::label() const {
  if (half_m) return "m/2";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<long> default_m_grid() {
  std::vector<long> grid;
  for (int k = 5; k <= 12; ++k) grid.push_back(1L << k);
  return grid;
}

long ExperimentConfig::effective_iterations() const {
  if (iterations) return *iterations;
  return kind == ExperimentKind::ConvergenceTrace ? 2000 : 10000;
}

long ExperimentConfig::effective_burnin() const {
  if (burnin) return *burnin;
  return kind == ExperimentKind::ConvergenceTrace ? 800 : 2000;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ParameterError("config: seed list is empty");
  if (estimators.empty()) throw ParameterError("config: no estimators given");
  if (n_values.empty()) throw ParameterError("config: no system size given");
  if (kind != ExperimentKind::TimingTable && n_values.size() != 1) {
    throw ParameterError("config: several n values are only allowed for timing_table");
  }
  for (int n : n_values) {
    const SystemSize size = SystemSize::qubits(n);
    if (n > MeasurementDesign::kDefaultMaxQubits) {
      throw ParameterError("config: n = " + std::to_string(n) + " exceeds the design limit of " +
                           std::to_string(MeasurementDesign::kDefaultMaxQubits) + " qubits");
    }
    for (const auto& e : estimators) {
      if (e.kind == EstimatorSpec::Kind::Bm && e.rank > size.d) {
        throw ParameterError("config: estimator " + e.label() + " has rank above d = " +
                             std::to_string(size.d));
      }
    }
  }
  if (m_values.empty()) throw ParameterError("config: no m given");
  for (long m : m_values) {
    if (m < 1) throw ParameterError("config: m must be >= 1");
  }
  if (kind != ExperimentKind::SlopeVsM && m_values.size() != 1) {
    throw ParameterError("config: an m-grid is only allowed for slope_vs_m");
  }
  if (kind == ExperimentKind::TimingTable) {
    if (timing_warmup < 0 || timing_iterations < 1) {
      throw ParameterError("config: timing needs warm-up >= 0 and timed iterations >= 1");
    }
  } else {
    const long it = effective_iterations();
    const long bi = effective_burnin();
    if (it < 1 || bi < 0 || bi >= it) throw ParameterError("config: need 0 <= burnin < iterations");
  }
  if (eta && !(*eta > 0.0)) throw ParameterError("config: eta must be positive");
  if (beta && !(*beta > 0.0)) throw ParameterError("config: beta must be positive");
  if (theta && !(*theta > 0.0)) throw ParameterError("config: theta must be positive");
  if (!lambda.half_m && !(lambda.value > 0.0)) throw ParameterError("config: lambda must be positive");
  if (!(mixing_weight > 0.0 && mixing_weight < 1.0)) {
    throw ParameterError("config: mixing weight must lie in (0, 1)");
  }
  if (workers < 1) throw ParameterError("config: workers must be >= 1");
}

double slope_regression(const std::vector<long>& m_grid, const std::vector<double>& errors, int skip) {
  if (m_grid.size() != errors.size()) throw ParameterError("slope_regression: grid/error size mismatch");
  if (skip < 0) throw ParameterError("slope_regression: skip must be >= 0");
  if (m_grid.size() < 3 || m_grid.size() < static_cast<std::size_t>(skip) + 2) {
    throw ParameterError("slope_regression: degenerate grid, need at least two points after skipping " +
                         std::to_string(skip));
  }
  std::vector<double> x, y;
  for (std::size_t i = static_cast<std::size_t>(skip); i < m_grid.size(); ++i) {
    if (m_grid[i] < 1) throw ParameterError("slope_regression: m must be >= 1");
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i])) {
      throw ParameterError("slope_regression: errors must be positive and finite");
    }
    x.push_back(std::log(static_cast<double>(m_grid[i])));
    y.push_back(std::log(errors[i]));
  }
  const double k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ParameterError("slope_regression: degenerate grid, all m equal");
  return sxy / sxx;
}

namespace {

std::uint64_t target_seed(std::uint64_t seed) { return mix_seed(seed, 101); }
std::uint64_t data_seed(std::uint64_t seed, long m) {
  return mix_seed(mix_seed(seed, 102), static_cast<std::uint64_t>(m));
}
std::uint64_t chain_seed(std::uint64_t seed) { return mix_seed(seed, 103); }

SamplerConfig sampler_config(const ExperimentConfig& config, int r, int d) {
  SamplerConfig sc;
  if (config.eta) sc.eta = *config.eta;
  if (config.beta) sc.beta = *config.beta;
  sc.theta = config.theta ? *config.theta : default_theta(r, d);
  sc.iterations = config.effective_iterations();
  sc.burnin = config.effective_burnin();
  sc.noise = config.noise;
  return sc;
}

EstimateResult run_estimator(const ExperimentConfig& config, const MeasurementDesign& design,
                             const EstimatorSpec& est, const EmpiricalFrequencies& freqs,
                             std::uint64_t seed, long iterations, long burnin, bool times,
                             const DensityMatrix* target, double& theta_out, double& lambda_out) {
  const int d = design.dim();
  lambda_out = config.lambda.resolve(freqs.m);
  if (est.kind == EstimatorSpec::Kind::Prob) {
    ProbEstimatorConfig pc;
    pc.iterations = iterations;
    pc.burnin = burnin;
    pc.lambda = lambda_out;
    pc.seed = seed;
    pc.record_iteration_times = times;
    theta_out = 0.0;
    return run_prob_estimator(freqs, design, pc, target);
  }
  const int r = est.resolved_rank(d);
  SamplerConfig sc = sampler_config(config, r, d);
  sc.iterations = iterations;
  sc.burnin = burnin;
  sc.lambda = lambda_out;
  sc.seed = seed;
  sc.record_iteration_times = times;
  theta_out = sc.theta;
  return run_bm_sampler(r, freqs, design, sc, target);
}

}  // namespace

RunRecord run_cell(const ExperimentConfig& config, const MeasurementDesign& design,
                   const EstimatorSpec& estimator, long m, std::uint64_t seed, bool keep_traces) {
  const int d = design.dim();
  RunRecord rec;
  rec.estimator = estimator.label();
  rec.rank = estimator.resolved_rank(d);
  rec.n = design.qubits();
  rec.m = m;
  rec.seed = seed;
  rec.iterations = config.effective_iterations();
  rec.burnin = config.effective_burnin();
  rec.lambda = config.lambda.resolve(m);
  if (estimator.kind == EstimatorSpec::Kind::Bm) {
    rec.theta = config.theta ? *config.theta : default_theta(rec.rank, d);
  }

  const DensityMatrix target =
      make_target(TargetSpec{config.target, config.mixing_weight}, SystemSize::from_dimension(d),
                  target_seed(seed));
  const EmpiricalFrequencies freqs = simulate_counts(design, target, m, data_seed(seed, m));
  try {
    EstimateResult res = run_estimator(config, design, estimator, freqs, chain_seed(seed), rec.iterations,
                                       rec.burnin, false, keep_traces ? &target : nullptr, rec.theta,
                                       rec.lambda);
    rec.validity = check_density(res.rho_hat.matrix());
    if (!rec.validity->ok()) throw NumericalError("estimate is not a density matrix: " + rec.validity->describe());
    rec.final_error = frobenius_error(res.rho_hat, target);
    rec.seconds_per_iteration = res.wall_time_per_iteration;
    rec.acceptance_rate = res.acceptance_rate;
    rec.trace_before_normalization = res.trace_before_normalization;
    if (keep_traces) {
      rec.trace_running = std::move(res.error_trace);
      rec.trace_instantaneous = std::move(res.instantaneous_error_trace);
    }
  } catch (const DivergenceError& e) {
    rec.failure = std::string("divergence at step ") + std::to_string(e.step()) + ": " + e.what();
  } catch (const NumericalError& e) {
    rec.failure = std::string("numerical failure: ") + e.what();
  } catch (const StructureError& e) {
    rec.failure = std::string("invalid estimate: ") + e.what();
  }
  return rec;
}

namespace {

void run_pool(std::vector<std::function<void()>>& tasks, int workers) {
  const int count = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
  if (count == 1) {
    for (auto& t : tasks) t();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(tasks.size());
  std::vector<std::thread> pool;
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
        try {
          tasks[i]();
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<TimingRecord> run_timing(const ExperimentConfig& config) {
  std::vector<TimingRecord> out;
  const std::uint64_t seed = config.seeds.front();
  const long m = config.m_values.front();
  for (int n : config.n_values) {
    const MeasurementDesign design = build_design(config.design, n);
    const int d = design.dim();
    const DensityMatrix target = make_target(TargetSpec{config.target, config.mixing_weight},
                                             SystemSize::qubits(n), target_seed(seed));
    const EmpiricalFrequencies freqs = simulate_counts(design, target, m, data_seed(seed, m));
    for (const auto& est : config.estimators) {
      double theta = 0.0, lambda = 0.0;
      const long total = config.timing_warmup + config.timing_iterations;
      EstimateResult res = run_estimator(config, design, est, freqs, chain_seed(seed), total,
                                         config.timing_warmup, true, nullptr, theta, lambda);
      std::vector<double> t(res.iteration_seconds.begin() + config.timing_warmup,
                            res.iteration_seconds.end());
      TimingRecord rec;
      rec.n = n;
      rec.estimator = est.label();
      rec.rank = est.resolved_rank(d);
      rec.timed_iterations = static_cast<long>(t.size());
      double sum = 0.0;
      for (double v : t) sum += v;
      rec.mean_seconds = sum / static_cast<double>(t.size());
      std::sort(t.begin(), t.end());
      const std::size_t h = t.size() / 2;
      rec.median_seconds = t.size() % 2 ? t[h] : 0.5 * (t[h - 1] + t[h]);
      out.push_back(rec);
    }
  }
  return out;
}

}  // namespace

ResultRecord run_experiment(const ExperimentConfig& config) {
  config.validate();
  ResultRecord record;
  record.software_version = software_version();
  record.timestamp = utc_timestamp();
  record.config = config;

  if (config.kind == ExperimentKind::TimingTable) {
    record.timings = run_timing(config);
    return record;
  }

  const MeasurementDesign design = build_design(config.design, config.n_values.front());
  const bool traces = config.kind == ExperimentKind::ConvergenceTrace;
  const auto& est = config.estimators;
  const auto& ms = config.m_values;
  const auto& seeds = config.seeds;
  record.runs.resize(est.size() * ms.size() * seeds.size());
  std::vector<std::function<void()>> tasks;
  std::size_t slot = 0;
  for (const auto& e : est) {
    for (long m : ms) {
      for (std::uint64_t s : seeds) {
        RunRecord* dest = &record.runs[slot++];
        tasks.emplace_back([&config, &design, e, m, s, traces, dest] {
          *dest = run_cell(config, design, e, m, s, traces);
        });
      }
    }
  }
  run_pool(tasks, config.workers);

  if (config.kind == ExperimentKind::SlopeVsM) {
    for (std::size_t i = 0; i < est.size(); ++i) {
      SlopeRecord sr;
      sr.estimator = est[i].label();
      sr.m_grid = ms;
      bool complete = true;
      for (std::size_t j = 0; j < ms.size(); ++j) {
        double acc = 0.0;
        long count = 0;
        for (std::size_t k = 0; k < seeds.size(); ++k) {
          const RunRecord& r = record.runs[(i * ms.size() + j) * seeds.size() + k];
          if (r.final_error) {
            acc += *r.final_error * *r.final_error;
            ++count;
          }
        }
        if (count == 0) complete = false;
        sr.mean_error_sq.push_back(count ? acc / static_cast<double>(count)
                                         : std::numeric_limits<double>::quiet_NaN());
      }
      sr.slope = complete && ms.size() >= 4 ? slope_regression(ms, sr.mean_error_sq)
                                            : std::numeric_limits<double>::quiet_NaN();
      record.slopes.push_back(std::move(sr));
    }
  }
  return record;
}

// ---- JSON ----

namespace {

json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double get_num(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.kind);
  j["n"] = c.n_values;
  j["target"] = to_string(c.target);
  j["mixing_weight"] = c.mixing_weight;
  std::vector<std::string> est;
  for (const auto& e : c.estimators) est.push_back(e.label());
  j["estimators"] = est;
  j["m"] = c.m_values;
  j["seeds"] = c.seeds;
  j["design"] = to_string(c.design);
  j["iterations"] = c.effective_iterations();
  j["burnin"] = c.effective_burnin();
  j["iterations_overridden"] = c.iterations.has_value();
  j["burnin_overridden"] = c.burnin.has_value();
  SamplerConfig defaults;
  j["eta"] = c.eta.value_or(defaults.eta);
  j["beta"] = c.beta.value_or(defaults.beta);
  j["eta_overridden"] = c.eta.has_value();
  j["beta_overridden"] = c.beta.has_value();
  j["theta"] = c.theta ? json(*c.theta) : json("default");
  j["lambda"] = c.lambda.label();
  j["noise_convention"] = to_string(c.noise);
  j["timing_warmup"] = c.timing_warmup;
  j["timing_iterations"] = c.timing_iterations;
  j["workers"] = c.workers;
  j["out"] = c.out_dir;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.kind = parse_experiment_kind(j.at("experiment").get<std::string>());
  c.n_values = j.at("n").get<std::vector<int>>();
  c.target = parse_target_kind(j.at("target").get<std::string>());
  c.mixing_weight = j.at("mixing_weight").get<double>();
  c.estimators.clear();
  for (const auto& s : j.at("estimators")) c.estimators.push_back(EstimatorSpec::parse(s.get<std::string>()));
  c.m_values = j.at("m").get<std::vector<long>>();
  c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.design = parse_design_mode(j.at("design").get<std::string>());
  if (j.at("iterations_overridden").get<bool>()) c.iterations = j.at("iterations").get<long>();
  if (j.at("burnin_overridden").get<bool>()) c.burnin = j.at("burnin").get<long>();
  if (j.at("eta_overridden").get<bool>()) c.eta = j.at("eta").get<double>();
  if (j.at("beta_overridden").get<bool>()) c.beta = j.at("beta").get<double>();
  if (!j.at("theta").is_string()) c.theta = j.at("theta").get<double>();
  c.lambda = LambdaSpec::parse(j.at("lambda").get<std::string>());
  c.noise = parse_noise_convention(j.at("noise_convention").get<std::string>());
  c.timing_warmup = j.at("timing_warmup").get<long>();
  c.timing_iterations = j.at("timing_iterations").get<long>();
  c.workers = j.at("workers").get<int>();
  c.out_dir = j.at("out").get<std::string>();
  return c;
}

}  // namespace

std::string to_json(const ResultRecord& record) {
  json j;
  j["software_version"] = record.software_version;
  j["timestamp"] = record.timestamp;
  j["config"] = config_json(record.config);
  json runs = json::array();
  for (const auto& r : record.runs) {
    json o;
    o["estimator"] = r.estimator;
    o["rank"] = r.rank;
    o["n"] = r.n;
    o["m"] = r.m;
    o["seed"] = r.seed;
    o["final_error"] = r.final_error ? num(*r.final_error) : json(nullptr);
    o["final_error_sq"] = r.final_error ? num(*r.final_error * *r.final_error) : json(nullptr);
    o["failure"] = r.failure ? json(*r.failure) : json(nullptr);
    o["iterations"] = r.iterations;
    o["burnin"] = r.burnin;
    o["theta"] = r.theta;
    o["lambda"] = r.lambda;
    o["seconds_per_iteration"] = r.seconds_per_iteration;
    o["acceptance_rate"] = r.acceptance_rate;
    o["trace_before_normalization"] = num(r.trace_before_normalization);
    o["hermitian_defect"] = r.validity ? num(r.validity->hermitian_defect) : json(nullptr);
    o["min_eigenvalue"] = r.validity ? num(r.validity->min_eigenvalue) : json(nullptr);
    o["trace_defect"] = r.validity ? num(r.validity->trace_defect) : json(nullptr);
    o["error_running_mean"] = r.trace_running;
    o["error_instantaneous"] = r.trace_instantaneous;
    runs.push_back(std::move(o));
  }
  j["runs"] = std::move(runs);
  json slopes = json::array();
  for (const auto& s : record.slopes) {
    json o;
    o["estimator"] = s.estimator;
    o["m"] = s.m_grid;
    json errs = json::array();
    for (double e : s.mean_error_sq) errs.push_back(num(e));
    o["mean_final_error_sq"] = std::move(errs);
    o["slope"] = num(s.slope);
    slopes.push_back(std::move(o));
  }
  j["slopes"] = std::move(slopes);
  json timings = json::array();
  for (const auto& t : record.timings) {
    json o;
    o["n"] = t.n;
    o["estimator"] = t.estimator;
    o["rank"] = t.rank;
    o["median_seconds_per_iteration"] = t.median_seconds;
    o["mean_seconds_per_iteration"] = t.mean_seconds;
    o["timed_iterations"] = t.timed_iterations;
    timings.push_back(std::move(o));
  }
  j["timings"] = std::move(timings);
  return j.dump(2) + "\n";
}

ResultRecord result_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("result json: ") + e.what());
  }
  ResultRecord rec;
  try {
    rec.software_version = j.at("software_version").get<std::string>();
    rec.timestamp = j.at("timestamp").get<std::string>();
    rec.config = config_from_json(j.at("config"));
    for (const auto& o : j.at("runs")) {
      RunRecord r;
      r.estimator = o.at("estimator").get<std::string>();
      r.rank = o.at("rank").get<int>();
      r.n = o.at("n").get<int>();
      r.m = o.at("m").get<long>();
      r.seed = o.at("seed").get<std::uint64_t>();
      if (!o.at("final_error").is_null()) r.final_error = o.at("final_error").get<double>();
      if (!o.at("failure").is_null()) r.failure = o.at("failure").get<std::string>();
      r.iterations = o.at("iterations").get<long>();
      r.burnin = o.at("burnin").get<long>();
      r.theta = o.at("theta").get<double>();
      r.lambda = o.at("lambda").get<double>();
      r.seconds_per_iteration = o.at("seconds_per_iteration").get<double>();
      r.acceptance_rate = o.at("acceptance_rate").get<double>();
      r.trace_before_normalization = get_num(o.at("trace_before_normalization"));
      if (!o.at("hermitian_defect").is_null()) {
        r.validity = DensityCheck{get_num(o.at("hermitian_defect")), get_num(o.at("min_eigenvalue")),
                                  get_num(o.at("trace_defect"))};
      }
      r.trace_running = o.at("error_running_mean").get<std::vector<double>>();
      r.trace_instantaneous = o.at("error_instantaneous").get<std::vector<double>>();
      rec.runs.push_back(std::move(r));
    }
    for (const auto& o : j.at("slopes")) {
      SlopeRecord s;
      s.estimator = o.at("estimator").get<std::string>();
      s.m_grid = o.at("m").get<std::vector<long>>();
      for (const auto& e : o.at("mean_final_error_sq")) s.mean_error_sq.push_back(get_num(e));
      s.slope = get_num(o.at("slope"));
      rec.slopes.push_back(std::move(s));
    }
    for (const auto& o : j.at("timings")) {
      TimingRecord t;
      t.n = o.at("n").get<int>();
      t.estimator = o.at("estimator").get<std::string>();
      t.rank = o.at("rank").get<int>();
      t.median_seconds = o.at("median_seconds_per_iteration").get<double>();
      t.mean_seconds = o.at("mean_seconds_per_iteration").get<double>();
      t.timed_iterations = o.at("timed_iterations").get<long>();
      rec.timings.push_back(t);
    }
  } catch (const json::exception& e) {
    throw ParameterError(std::string("result json: ") + e.what());
  }
  return rec;
}

// ---- CSV ----

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string final_errors_csv(const ResultRecord& record) {
  std::ostringstream os;
  os << kFinalErrorsHeader << "\n";
  const std::string kind = to_string(record.config.kind);
  const std::string target = to_string(record.config.target);
  for (const auto& r : record.runs) {
    const double e = r.final_error ? *r.final_error : std::numeric_limits<double>::quiet_NaN();
    os << kind << ',' << r.n << ',' << target << ',' << r.estimator << ',' << r.rank << ',' << r.m << ','
       << r.seed << ',' << fmt(e) << ',' << fmt(e * e) << ',' << r.iterations << ',' << r.burnin << "\n";
  }
  return os.str();
}

std::string traces_csv(const ResultRecord& record) {
  std::ostringstream os;
  os << kTracesHeader << "\n";
  for (const auto& r : record.runs) {
    for (std::size_t i = 0; i < r.trace_running.size(); ++i) {
      const double inst = i < r.trace_instantaneous.size() ? r.trace_instantaneous[i]
                                                           : std::numeric_limits<double>::quiet_NaN();
      os << r.estimator << ',' << r.seed << ',' << (i + 1) << ',' << fmt(r.trace_running[i]) << ','
         << fmt(inst) << "\n";
    }
  }
  return os.str();
}

std::string slope_csv(const ResultRecord& record) {
  std::ostringstream os;
  os << kSlopeHeader << "\n";
  const std::size_t seeds = record.config.seeds.size();
  for (const auto& s : record.slopes) {
    for (std::size_t j = 0; j < s.m_grid.size(); ++j) {
      os << s.estimator << ',' << s.m_grid[j] << ',' << fmt(s.mean_error_sq[j]) << ',' << seeds << "\n";
    }
  }
  return os.str();
}

std::string timing_csv(const ResultRecord& record) {
  std::ostringstream os;
  os << kTimingHeader << "\n";
  for (const auto& t : record.timings) {
    os << t.n << ',' << t.estimator << ',' << t.rank << ',' << fmt(t.median_seconds) << ','
       << fmt(t.mean_seconds) << ',' << t.timed_iterations << "\n";
  }
  return os.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> emit_plotdata(const ResultRecord& record, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  const std::string kind = to_string(record.config.kind);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    const auto p = dir / name;
    write_file(p, text);
    written.push_back(p);
  };
  if (record.config.kind == ExperimentKind::TimingTable) {
    emit("timing_table.csv", timing_csv(record));
  } else {
    emit(kind + "_final_errors.csv", final_errors_csv(record));
  }
  if (record.config.kind == ExperimentKind::ConvergenceTrace) emit(kind + "_traces.csv", traces_csv(record));
  if (record.config.kind == ExperimentKind::SlopeVsM) emit("slope_vs_m_summary.csv", slope_csv(record));
  emit(kind + "_result.json", to_json(record));
  return written;
}

}  // namespace bmtomo::harness
