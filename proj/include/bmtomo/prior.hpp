#pragma once

#include "bmtomo/types.hpp"

namespace bmtomo {

/// Spectral scaled Student-t prior on d x r complex factors,
///   nu(Y) ∝ det(theta^2 I_d + Y Y^*)^{-(2d + r + 2)/2}.
/// The normalizing constant is never needed and never computed.
struct PriorParams {
  double theta = 100.0;
  int d = 2;
  int r = 1;

  /// (2d + r + 2) / 2
  double exponent() const { return (2.0 * d + r + 2.0) / 2.0; }
  void validate() const;
};

/// e * log det(theta^2 I_d + Y Y^*), the negative log prior up to the
/// normalizing constant. Evaluated on the real embedding through the
/// determinant lemma, costing O(d r^2).
double neg_log_prior(const BMFactor& y, const PriorParams& params);

/// ((2d + r + 2)/4) * log det((theta^2/sqrt2) I_2d + sqrt2 T T^T), the prior
/// part of the real-embedded negative log posterior. Same reduced-rank
/// evaluation as neg_log_prior.
double neg_log_prior_real(const RealFactor& t, const PriorParams& params);

/// Gradient of neg_log_prior_real with the Woodbury identity:
///   ((2d+r+2)/theta^2) (I - T (theta^2/2 I_2r + T^T T)^{-1} T^T) T.
/// Throws NumericalError if the 2r x 2r system has condition number above
/// 1e14.
RMatrix grad_neg_log_prior_real(const RealFactor& t, const PriorParams& params);

/// Same gradient through the dense 2d x 2d inverse,
///   ((2d+r+2)/theta^2) (I + (2/theta^2) T T^T)^{-1} T.
RMatrix grad_neg_log_prior_real_dense(const RealFactor& t, const PriorParams& params);

/// Numerically integrates the per-column second moment of the prior,
/// int ||y_1||^2 nu(Y) dY, for tiny shapes (d = 1 or r = 1, d r <= 3) by
/// adaptive quadrature in polar coordinates. The closed form is 2 theta^2 d.
double prior_second_moment_check(int d, int r, double theta);

struct PacBoundInputs {
  int n = 1;                     // qubits
  int r = 1;                     // rank budget
  long m = 1;                    // replications per experiment
  int p = 0;                     // rank of the reference factor
  double ref_frobenius = 0.0;    // ||Ybar||_F
  double ref_spectral = 0.0;     // ||Ybar||_2
  double theta = 1.0;
  double epsilon = 0.05;         // confidence level, in (0, 1)
};

/// High-probability bound on ||rho_hat - rho0||_F^2 for lambda = 3m/8 in the
/// complete per-qubit setting with N_tot = m 3^n:
///   3/N (3^{3n/4} 2^{(n+6)/4} (r + sqrt(r)||Ybar||_F) + 2r/m + 1)
///   + 8 3^n / (2^n N) (log(2/eps) + 2p(2^{n+1} + r + 2) log(1 + ||Ybar||_2/theta))
double pac_bound(const PacBoundInputs& in);

}  // namespace bmtomo
