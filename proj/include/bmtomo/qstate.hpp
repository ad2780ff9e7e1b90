#pragma once

#include <string>

#include "bmtomo/types.hpp"

namespace bmtomo {

/// Result of checking a matrix against the density-matrix invariants.
struct DensityCheck {
  double hermitian_defect = 0.0;  // max |M_ij - conj(M_ji)|
  double min_eigenvalue = 0.0;
  double trace_defect = 0.0;      // |tr M - 1|

  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kPsdTol = 1e-10;
  static constexpr double kTraceTol = 1e-10;

  bool hermitian() const { return hermitian_defect <= kHermitianTol; }
  bool psd() const { return min_eigenvalue >= -kPsdTol; }
  bool unit_trace() const { return trace_defect <= kTraceTol; }
  bool ok() const { return hermitian() && psd() && unit_trace(); }
  std::string describe() const;
  bool operator==(const DensityCheck&) const = default;
};

DensityCheck check_density(const CMatrix& m);

/// A d x d Hermitian, positive semidefinite, unit-trace complex matrix.
/// Construction validates the invariants and throws StructureError if any
/// of them fails.
class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix m);

  const CMatrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  CMatrix m_;
};

enum class TargetKind { Rank1, Rank2, ApproxRank2, MaximallyMixed };

struct TargetSpec {
  TargetKind kind = TargetKind::Rank2;
  double mixing_weight = 0.98;  // ApproxRank2 only, in (0, 1)
};

std::string to_string(TargetKind kind);
TargetKind parse_target_kind(const std::string& s);

/// Synthetic target states:
///   Rank1           v v^*, v Haar-random unit vector
///   Rank2           (v1 v1^* + v2 v2^*) / 2, v1, v2 Haar orthonormal
///   ApproxRank2     w * Rank2 + (1 - w) I / d
///   MaximallyMixed  I / d
DensityMatrix make_target(const TargetSpec& spec, SystemSize size, std::uint64_t seed);

/// d x r matrix with Haar-distributed orthonormal columns. QR of a complex
/// Ginibre matrix followed by phase correction of R's diagonal.
CMatrix haar_orthonormal(int d, int r, Rng& rng);
CMatrix haar_orthonormal(int d, int r, std::uint64_t seed);

/// Symmetric Dirichlet(alpha, ..., alpha) draw on the (r-1)-simplex.
RVector dirichlet_sample(int r, double alpha, Rng& rng);
RVector dirichlet_sample(int r, double alpha, std::uint64_t seed);
/// General Dirichlet(alpha_1, ..., alpha_r).
RVector dirichlet_sample(const RVector& alpha, Rng& rng);

/// Y0 = V diag(D)^{1/2}, V Haar d x r, D ~ Dirichlet(1/r). ||Y0||_F = 1.
BMFactor init_factor(SystemSize size, int r, std::uint64_t seed);

double frobenius_error(const DensityMatrix& est, const DensityMatrix& target);

}  // namespace bmtomo
