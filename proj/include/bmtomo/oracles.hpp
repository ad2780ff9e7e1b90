#pragma once

#include <functional>

#include "bmtomo/measurement.hpp"
#include "bmtomo/types.hpp"

// Brute-force reference computations used to check the production kernels.
// Nothing here calls into the likelihood, gradient or prior code.
namespace bmtomo::oracles {

struct FiniteDiffSpec {
  double step = 1e-5;  // central differences only
};

using ScalarField = std::function<double(const RMatrix&)>;

/// Entrywise central differences (f(T + h E_ij) - f(T - h E_ij)) / 2h.
/// Throws NumericalError on a non-finite evaluation.
RMatrix finite_diff_gradient(const ScalarField& f, const RMatrix& t, const FiniteDiffSpec& spec = {});

/// Measurement operator for (mode, label, outcome) rebuilt from scratch with
/// explicit Kronecker loops.
CMatrix naive_operator(DesignMode mode, const std::string& label, int outcome);

/// The BM likelihood evaluated with explicit loops: rho = Y Y^* entry by
/// entry, operators rebuilt by naive_operator(), traces by double loops.
double dense_likelihood_oracle(const CMatrix& y, const EmpiricalFrequencies& freqs,
                               const MeasurementDesign& design);

/// Ratio int_0^R s^3 (theta^2 + s^2)^{-5/2} ds / int_0^R s (theta^2 + s^2)^{-5/2} ds
/// by adaptive Simpson on geometric panels. R is chosen so that the analytic
/// tail bound on both integrals is below 1e-12 relative; throws
/// NumericalError if that cannot be met.
double polar_quadrature_moment(double theta);

}  // namespace bmtomo::oracles
