#pragma once

#include <string>
#include <vector>

#include "bmtomo/qstate.hpp"
#include "bmtomo/types.hpp"

namespace bmtomo {

enum class DesignMode {
  PerQubit,     // 3^n experiments over {x,y,z}^n, 2^n outcome vectors each
  WholeSystem,  // 4^n Pauli strings over {I,x,y,z}^n, outcomes (+, -)
};

std::string to_string(DesignMode mode);
DesignMode parse_design_mode(const std::string& s);

/// 2x2 Pauli matrix for label I, x, y or z (upper-case X, Y, Z accepted).
CMatrix pauli_matrix(char label);

/// A measurement operator, stored densely and as a coordinate list of its
/// nonzero entries. Pauli-string projectors have at most 2d nonzeros.
struct MeasurementOperator {
  struct Entry {
    int row;
    int col;
    Complex value;
  };
  CMatrix dense;
  std::vector<Entry> entries;

  /// Re tr(P X) for Hermitian P, using the sparse entries.
  double trace_with(const CMatrix& x) const;
};

struct Experiment {
  std::string label;  // one Pauli letter per qubit, qubit 0 first
  std::vector<MeasurementOperator> outcomes;
};

/// Immutable operator family {P_s^a}. Experiments are ordered
/// lexicographically over labels with alphabet (I <) x < y < z, qubit 0
/// leftmost. PerQubit outcomes enumerate o(s) as binary strings with bit 0
/// meaning +1, most significant bit = qubit 0; WholeSystem outcomes are
/// (+, -).
class MeasurementDesign {
 public:
  static constexpr int kDefaultMaxQubits = 5;

  MeasurementDesign(DesignMode mode, int n, std::vector<Experiment> experiments);

  DesignMode mode() const { return mode_; }
  int qubits() const { return n_; }
  int dim() const { return 1 << n_; }
  int num_experiments() const { return static_cast<int>(experiments_.size()); }
  int outcomes_per_experiment() const;
  std::size_t num_operators() const;
  const Experiment& experiment(int a) const { return experiments_.at(static_cast<std::size_t>(a)); }
  const std::vector<Experiment>& experiments() const { return experiments_; }

 private:
  DesignMode mode_;
  int n_;
  std::vector<Experiment> experiments_;
};

MeasurementDesign build_design(DesignMode mode, int n,
                               int max_qubits = MeasurementDesign::kDefaultMaxQubits);

/// Rows are experiments, columns outcomes.
using ProbabilityTable = RMatrix;

struct EmpiricalFrequencies {
  RMatrix values;  // counts / m, same shape as ProbabilityTable
  long m = 0;      // replications per experiment
};

/// tr(P_s^a X) for every operator, for any Hermitian X of matching size.
RMatrix operator_traces(const MeasurementDesign& design, const CMatrix& x);

ProbabilityTable born_probabilities(const MeasurementDesign& design, const DensityMatrix& rho);

/// PerQubit: one multinomial(m, Born row) draw per experiment, realized as
/// sequential conditional binomials. WholeSystem: binomial(m, p_+).
EmpiricalFrequencies simulate_counts(const MeasurementDesign& design, const DensityMatrix& rho,
                                     long m, std::uint64_t seed);

}  // namespace bmtomo
