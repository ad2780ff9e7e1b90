#include "bmtomo/measurement.hpp"

#include <algorithm>
#include <cmath>

namespace bmtomo {

std::string to_string(DesignMode mode) {
  return mode == DesignMode::PerQubit ? "per-qubit" : "whole-system";
}

DesignMode parse_design_mode(const std::string& s) {
  if (s == "per-qubit") return DesignMode::PerQubit;
  if (s == "whole-system") return DesignMode::WholeSystem;
  throw ParameterError("unknown design mode '" + s + "'");
}

CMatrix pauli_matrix(char label) {
  CMatrix p(2, 2);
  const Complex i(0.0, 1.0);
  switch (label) {
    case 'I':
      p << 1.0, 0.0, 0.0, 1.0;
      break;
    case 'x':
    case 'X':
      p << 0.0, 1.0, 1.0, 0.0;
      break;
    case 'y':
    case 'Y':
      p << 0.0, -i, i, 0.0;
      break;
    case 'z':
    case 'Z':
      p << 1.0, 0.0, 0.0, -1.0;
      break;
    default:
      throw ParameterError(std::string("invalid Pauli label '") + label + "'");
  }
  return p;
}

double MeasurementOperator::trace_with(const CMatrix& x) const {
  double acc = 0.0;
  for (const Entry& e : entries) {
    acc += (e.value * x(e.col, e.row)).real();
  }
  return acc;
}

namespace {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

MeasurementOperator make_operator(CMatrix dense) {
  MeasurementOperator op;
  for (Eigen::Index j = 0; j < dense.cols(); ++j) {
    for (Eigen::Index i = 0; i < dense.rows(); ++i) {
      if (dense(i, j) != Complex(0.0, 0.0)) {
        op.entries.push_back({static_cast<int>(i), static_cast<int>(j), dense(i, j)});
      }
    }
  }
  op.dense = std::move(dense);
  return op;
}

// All strings of length n over `alphabet`, lexicographic in alphabet order.
std::vector<std::string> label_strings(const std::string& alphabet, int n) {
  std::vector<std::string> out{""};
  for (int q = 0; q < n; ++q) {
    std::vector<std::string> next;
    next.reserve(out.size() * alphabet.size());
    for (const auto& prefix : out) {
      for (char c : alphabet) next.push_back(prefix + c);
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

MeasurementDesign::MeasurementDesign(DesignMode mode, int n, std::vector<Experiment> experiments)
    : mode_(mode), n_(n), experiments_(std::move(experiments)) {}

int MeasurementDesign::outcomes_per_experiment() const {
  return mode_ == DesignMode::PerQubit ? dim() : 2;
}

std::size_t MeasurementDesign::num_operators() const {
  return experiments_.size() * static_cast<std::size_t>(outcomes_per_experiment());
}

MeasurementDesign build_design(DesignMode mode, int n, int max_qubits) {
  if (n < 1) throw ParameterError("build_design: need at least one qubit");
  if (n > max_qubits) {
    throw ParameterError("build_design: n=" + std::to_string(n) + " exceeds memory cap of " +
                         std::to_string(max_qubits) + " qubits");
  }
  const int d = 1 << n;
  const CMatrix id2 = CMatrix::Identity(2, 2);
  std::vector<Experiment> experiments;

  if (mode == DesignMode::PerQubit) {
    for (const auto& label : label_strings("xyz", n)) {
      Experiment e;
      e.label = label;
      // Eigenprojectors (I +- sigma)/2 of each single-qubit observable.
      std::vector<CMatrix> plus(n), minus(n);
      for (int q = 0; q < n; ++q) {
        const CMatrix s = pauli_matrix(label[q]);
        plus[q] = 0.5 * (id2 + s);
        minus[q] = 0.5 * (id2 - s);
      }
      for (int s = 0; s < d; ++s) {
        CMatrix op = CMatrix::Identity(1, 1);
        for (int q = 0; q < n; ++q) {
          const bool minus_outcome = (s >> (n - 1 - q)) & 1;
          op = kron(op, minus_outcome ? minus[q] : plus[q]);
        }
        e.outcomes.push_back(make_operator(std::move(op)));
      }
      experiments.push_back(std::move(e));
    }
  } else {
    for (const auto& label : label_strings("Ixyz", n)) {
      Experiment e;
      e.label = label;
      CMatrix sigma = CMatrix::Identity(1, 1);
      for (int q = 0; q < n; ++q) sigma = kron(sigma, pauli_matrix(label[q]));
      const CMatrix id = CMatrix::Identity(d, d);
      e.outcomes.push_back(make_operator(0.5 * (id + sigma)));
      e.outcomes.push_back(make_operator(0.5 * (id - sigma)));
      experiments.push_back(std::move(e));
    }
  }
  return MeasurementDesign(mode, n, std::move(experiments));
}

RMatrix operator_traces(const MeasurementDesign& design, const CMatrix& x) {
  if (x.rows() != design.dim() || x.cols() != design.dim()) {
    throw DimensionError("operator_traces: matrix is " + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + ", design expects d=" +
                         std::to_string(design.dim()));
  }
  const int outcomes = design.outcomes_per_experiment();
  RMatrix t(design.num_experiments(), outcomes);
  for (int a = 0; a < design.num_experiments(); ++a) {
    const Experiment& e = design.experiment(a);
    for (int s = 0; s < outcomes; ++s) t(a, s) = e.outcomes[static_cast<std::size_t>(s)].trace_with(x);
  }
  return t;
}

ProbabilityTable born_probabilities(const MeasurementDesign& design, const DensityMatrix& rho) {
  return operator_traces(design, rho.matrix());
}

namespace {

long draw_binomial(long trials, double p, Rng& rng) {
  if (trials <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  std::binomial_distribution<long> dist(trials, p);
  return dist(rng);
}

}  // namespace

EmpiricalFrequencies simulate_counts(const MeasurementDesign& design, const DensityMatrix& rho,
                                     long m, std::uint64_t seed) {
  if (m < 1) throw ParameterError("simulate_counts: m must be >= 1");
  const ProbabilityTable probs = born_probabilities(design, rho);
  Rng rng(seed);
  EmpiricalFrequencies out;
  out.m = m;
  out.values = RMatrix::Zero(probs.rows(), probs.cols());
  const double inv_m = 1.0 / static_cast<double>(m);

  for (Eigen::Index a = 0; a < probs.rows(); ++a) {
    // Clip rounding noise so the row is a valid probability vector.
    RVector row = probs.row(a).transpose().cwiseMax(0.0);
    row /= row.sum();
    if (design.mode() == DesignMode::WholeSystem) {
      const long plus = draw_binomial(m, std::min(row[0], 1.0), rng);
      out.values(a, 0) = static_cast<double>(plus) * inv_m;
      out.values(a, 1) = static_cast<double>(m - plus) * inv_m;
      continue;
    }
    long remaining = m;
    double mass_left = 1.0;
    const Eigen::Index last = row.size() - 1;
    for (Eigen::Index s = 0; s < last && remaining > 0; ++s) {
      const double cond = mass_left > 0.0 ? std::clamp(row[s] / mass_left, 0.0, 1.0) : 0.0;
      const long c = draw_binomial(remaining, cond, rng);
      out.values(a, s) = static_cast<double>(c) * inv_m;
      remaining -= c;
      mass_left -= row[s];
    }
    out.values(a, last) += static_cast<double>(remaining) * inv_m;
  }
  return out;
}

}  // namespace bmtomo
