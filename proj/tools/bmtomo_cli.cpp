// Command-line front end for the tomography experiments.
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bmtomo/harness.hpp"

namespace {

using namespace bmtomo;
using namespace bmtomo::harness;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long parse_long(const std::string& s, const char* what) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ParameterError(std::string("bad ") + what + " '" + s + "'");
  return v;
}

// "1,2,5" or "0..9" (inclusive)
std::vector<long> parse_list(const std::string& s, const char* what) {
  std::vector<long> out;
  for (const auto& part : split(s, ',')) {
    const auto dots = part.find("..");
    if (dots != std::string::npos) {
      const long lo = parse_long(part.substr(0, dots), what);
      const long hi = parse_long(part.substr(dots + 2), what);
      if (hi < lo) throw ParameterError(std::string("empty range in ") + what + " '" + part + "'");
      for (long v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      out.push_back(parse_long(part, what));
    }
  }
  return out;
}

void print_summary(const ResultRecord& rec) {
  if (!rec.timings.empty()) {
    std::printf("%-4s %-8s %-5s %16s %16s\n", "n", "estim", "rank", "median_s/iter", "mean_s/iter");
    for (const auto& t : rec.timings) {
      std::printf("%-4d %-8s %-5d %16.6g %16.6g\n", t.n, t.estimator.c_str(), t.rank, t.median_seconds,
                  t.mean_seconds);
    }
    return;
  }
  std::size_t failed = 0;
  for (const auto& r : rec.runs) failed += r.failure ? 1 : 0;
  std::printf("%zu runs, %zu failed\n", rec.runs.size(), failed);
  for (const auto& s : rec.slopes) {
    std::printf("slope %s: %.4f\n", s.estimator.c_str(), s.slope);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian quantum state tomography experiments"};
  app.set_version_flag("--version", software_version());

  std::string experiment = "accuracy_boxplot";
  std::string n_arg = "2";
  std::string target = "rank2";
  std::vector<std::string> estimators;
  std::string m_arg;
  std::string m_grid_arg;
  std::string seeds_arg = "0..9";
  std::optional<long> iterations, burnin, timing_warmup, timing_iterations;
  std::optional<double> eta, beta, theta;
  std::string lambda = "m/2";
  std::string design = "whole-system";
  std::string noise = "algorithm1";
  std::string out = ".";
  int workers = 1;

  app.add_option("--experiment", experiment, "accuracy_boxplot|convergence_trace|slope_vs_m|timing_table")
      ->check(CLI::IsMember({"accuracy_boxplot", "convergence_trace", "slope_vs_m", "timing_table"}));
  app.add_option("--n", n_arg, "number of qubits; comma list allowed for timing_table");
  app.add_option("--target", target, "rank1|rank2|approx-rank2|mixed")
      ->check(CLI::IsMember({"rank1", "rank2", "approx-rank2", "mixed"}));
  app.add_option("--estimator", estimators, "bm:<r>, bm:d or prob (repeatable)");
  app.add_option("--m", m_arg, "shots per experiment");
  app.add_option("--m-grid", m_grid_arg, "comma list of m values for slope_vs_m (default 32..4096 in powers of 2)");
  app.add_option("--seeds", seeds_arg, "comma list or inclusive range a..b");
  app.add_option("--iterations", iterations, "chain length");
  app.add_option("--burnin", burnin, "burn-in length");
  app.add_option("--eta", eta, "Langevin step size");
  app.add_option("--beta", beta, "inverse temperature");
  app.add_option("--theta", theta, "prior scale (default 100 if r < d, else 0.1)");
  app.add_option("--lambda", lambda, "likelihood weight, number or m/2");
  app.add_option("--design", design, "per-qubit|whole-system")->check(CLI::IsMember({"per-qubit", "whole-system"}));
  app.add_option("--noise-convention", noise, "algorithm1|eq7")->check(CLI::IsMember({"algorithm1", "eq7"}));
  app.add_option("--timing-warmup", timing_warmup, "warm-up iterations for timing_table (default 100)");
  app.add_option("--timing-iterations", timing_iterations, "timed iterations for timing_table (default 1000)");
  app.add_option("--out", out, "output directory");
  app.add_option("--workers", workers, "worker threads (timing runs always use one)")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg;
    cfg.kind = parse_experiment_kind(experiment);
    cfg.n_values.clear();
    for (long v : parse_list(n_arg, "--n")) cfg.n_values.push_back(static_cast<int>(v));
    cfg.target = parse_target_kind(target);
    if (estimators.empty()) estimators = {"bm:2", "bm:d", "prob"};
    for (const auto& e : estimators) cfg.estimators.push_back(EstimatorSpec::parse(e));
    if (!m_grid_arg.empty() && !m_arg.empty()) throw ParameterError("give either --m or --m-grid, not both");
    if (!m_grid_arg.empty()) {
      cfg.m_values = parse_list(m_grid_arg, "--m-grid");
    } else if (!m_arg.empty()) {
      cfg.m_values = {parse_long(m_arg, "--m")};
    } else if (cfg.kind == ExperimentKind::SlopeVsM) {
      cfg.m_values = default_m_grid();
    }
    cfg.seeds.clear();
    for (long s : parse_list(seeds_arg, "--seeds")) {
      if (s < 0) throw ParameterError("seeds must be non-negative");
      cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    cfg.iterations = iterations;
    cfg.burnin = burnin;
    cfg.eta = eta;
    cfg.beta = beta;
    cfg.theta = theta;
    cfg.lambda = LambdaSpec::parse(lambda);
    cfg.design = parse_design_mode(design);
    cfg.noise = parse_noise_convention(noise);
    if (timing_warmup) cfg.timing_warmup = *timing_warmup;
    if (timing_iterations) cfg.timing_iterations = *timing_iterations;
    cfg.workers = cfg.kind == ExperimentKind::TimingTable ? 1 : workers;
    cfg.out_dir = out;

    const ResultRecord rec = run_experiment(cfg);
    for (const auto& p : emit_plotdata(rec, out)) std::printf("wrote %s\n", p.string().c_str());
    print_summary(rec);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
