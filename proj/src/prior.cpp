#include "bmtomo/prior.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/exp_sinh.hpp>

#include "bmtomo/realify.hpp"

namespace bmtomo {

void PriorParams::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw ParameterError("prior: theta must be positive and finite");
  }
  if (d < 1 || r < 1 || r > d) {
    throw ParameterError("prior: need 1 <= r <= d, got d=" + std::to_string(d) +
                         " r=" + std::to_string(r));
  }
}

namespace {

void check_real_shape(const RealFactor& t, const PriorParams& params) {
  if (t.rows() != 2 * params.d || t.cols() != 2 * params.r) {
    throw DimensionError("prior: expected a " + std::to_string(2 * params.d) + "x" +
                         std::to_string(2 * params.r) + " real factor, got " +
                         std::to_string(t.rows()) + "x" + std::to_string(t.cols()));
  }
  if (!t.allFinite()) throw NumericalError("prior: non-finite factor entries");
}

// log det((theta^2/sqrt2) I_2d + sqrt2 T T^T), reduced to the 2r x 2r
// matrix K = (theta^2/2) I + T^T T:
//   2d log(theta^2/sqrt2) + log det(K) - 2r log(theta^2/2).
double log_det_real_prior_matrix(const RealFactor& t, const PriorParams& params) {
  const double t2 = params.theta * params.theta;
  const Eigen::Index k = t.cols();
  RMatrix gram = RMatrix::Identity(k, k) * (0.5 * t2);
  gram.noalias() += t.transpose() * t;
  Eigen::LLT<RMatrix> llt(gram);
  if (llt.info() != Eigen::Success) throw NumericalError("prior: Cholesky factorization failed");
  const double log_det_k = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return 2.0 * params.d * std::log(t2 / std::sqrt(2.0)) + log_det_k -
         static_cast<double>(k) * std::log(0.5 * t2);
}

}  // namespace

double neg_log_prior_real(const RealFactor& t, const PriorParams& params) {
  params.validate();
  check_real_shape(t, params);
  return params.exponent() / 2.0 * log_det_real_prior_matrix(t, params);
}

double neg_log_prior(const BMFactor& y, const PriorParams& params) {
  params.validate();
  if (y.rows() != params.d || y.cols() != params.r) {
    throw DimensionError("neg_log_prior: factor shape does not match prior parameters");
  }
  if (!y.allFinite()) throw NumericalError("neg_log_prior: non-finite factor entries");
  // det M = sqrt(2^d det psi(M)) for Hermitian PSD M.
  const RealFactor t = embed(y);
  return params.exponent() / 2.0 *
         (log_det_real_prior_matrix(t, params) + params.d * std::log(2.0));
}

RMatrix grad_neg_log_prior_real(const RealFactor& t, const PriorParams& params) {
  params.validate();
  check_real_shape(t, params);
  const double t2 = params.theta * params.theta;
  const double coeff = (2.0 * params.d + params.r + 2.0) / t2;
  const RMatrix tt = t.transpose() * t;
  RMatrix small = tt;
  small.diagonal().array() += 0.5 * t2;

  const double floor = 0.5 * t2;
  if ((floor + tt.trace()) / floor > 1e14) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(small, Eigen::EigenvaluesOnly);
    const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    if (!(cond <= 1e14)) {
      throw NumericalError("prior gradient: Woodbury system condition number " +
                           std::to_string(cond) + " exceeds 1e14");
    }
  }
  Eigen::LLT<RMatrix> llt(small);
  if (llt.info() != Eigen::Success) throw NumericalError("prior gradient: Cholesky failed");
  // (I + (2/theta^2) T T^T)^{-1} T = (theta^2/2) T (T^T T + theta^2/2 I)^{-1}, no cancellation.
  const RMatrix x = llt.solve(RMatrix(t.transpose()));
  return (coeff * 0.5 * t2) * x.transpose();
}

RMatrix grad_neg_log_prior_real_dense(const RealFactor& t, const PriorParams& params) {
  params.validate();
  check_real_shape(t, params);
  const double t2 = params.theta * params.theta;
  const double coeff = (2.0 * params.d + params.r + 2.0) / t2;
  RMatrix a = RMatrix::Identity(t.rows(), t.rows());
  a.noalias() += (2.0 / t2) * (t * t.transpose());
  return coeff * a.partialPivLu().solve(t);
}

double prior_second_moment_check(int d, int r, double theta) {
  if (!(theta > 0.0)) throw ParameterError("prior_second_moment_check: theta must be positive");
  if (d < 1 || r < 1 || d * r > 3 || (d > 1 && r > 1)) {
    throw ParameterError("prior_second_moment_check: supported shapes are d = 1 or r = 1 with d r <= 3");
  }
  const double e = (2.0 * d + r + 2.0) / 2.0;
  const double t2 = theta * theta;
  boost::math::quadrature::exp_sinh<double> integrator;
  const double tol = 1e-10;

  auto integrate = [&](auto&& f) {
    double err = 0.0;
    double l1 = 0.0;
    const double v = integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), tol,
                                          &err, &l1);
    if (!std::isfinite(v) || err > 1e-6 * std::max(l1, 1e-300)) {
      throw NumericalError("prior_second_moment_check: quadrature did not converge");
    }
    return v;
  };

  // s^k (c + s^2)^{-e}, finite for every s >= 0 including the far tail.
  auto kernel = [e](double s, int k, double c) {
    if (s == 0.0) return k == 0 ? std::pow(c, -e) : 0.0;
    const double ls = std::log(s);
    const double lq = s > 1.0 ? 2.0 * ls + std::log1p(c / (s * s)) : std::log(c + s * s);
    return std::exp(k * ls - e * lq);
  };

  if (r == 1) {
    // Y = y in C^d with det(theta^2 I + y y^*) = theta^{2(d-1)} (theta^2 + |y|^2);
    // radial measure rho^{2d-1} d rho.
    const double num = integrate([&](double s) {
      return kernel(s, 2 * d + 1, t2);
    });
    const double den = integrate([&](double s) {
      return kernel(s, 2 * d - 1, t2);
    });
    return num / den;
  }

  // d = 1: det = theta^2 + |y_1|^2 + ||y_{2:r}||^2. Outer radius of y_1
  // (measure s ds), inner radius of the remaining r-1 complex coordinates
  // (measure u^{2r-3} du).
  auto inner = [&](double s, bool weighted) {
    const double base = t2 + s * s;
    const double v = integrate([&](double u) {
      return kernel(u, 2 * r - 3, base);
    });
    return (weighted ? s * s : 1.0) * s * v;
  };
  const double num = integrate([&](double s) { return inner(s, true); });
  const double den = integrate([&](double s) { return inner(s, false); });
  return num / den;
}

double pac_bound(const PacBoundInputs& in) {
  if (!(in.epsilon > 0.0 && in.epsilon < 1.0)) {
    throw ParameterError("pac_bound: epsilon must lie in (0, 1)");
  }
  if (in.n < 1 || in.r < 1 || in.m < 1 || in.p < 0) {
    throw ParameterError("pac_bound: n, r, m must be positive and p non-negative");
  }
  if (!(in.theta > 0.0) || in.ref_frobenius < 0.0 || in.ref_spectral < 0.0) {
    throw ParameterError("pac_bound: theta must be positive and norms non-negative");
  }
  const int d = 1 << in.n;
  if (in.p > std::min(d, in.r)) throw ParameterError("pac_bound: p exceeds min(d, r)");

  const double n = in.n;
  const double r = in.r;
  const double m = static_cast<double>(in.m);
  const double three_n = std::pow(3.0, n);
  const double n_tot = m * three_n;

  const double first = 3.0 / n_tot *
                       (std::pow(3.0, 3.0 * n / 4.0) * std::pow(2.0, (n + 6.0) / 4.0) *
                            (r + std::sqrt(r) * in.ref_frobenius) +
                        2.0 * r / m + 1.0);
  const double second =
      three_n * 8.0 / (std::pow(2.0, n) * n_tot) *
      (std::log(2.0 / in.epsilon) + 2.0 * in.p * (std::pow(2.0, n + 1.0) + r + 2.0) *
                                        std::log1p(in.ref_spectral / in.theta));
  return first + second;
}

}  // namespace bmtomo
