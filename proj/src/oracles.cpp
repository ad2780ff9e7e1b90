#include "bmtomo/oracles.hpp"

#include <cmath>
#include <string>

namespace bmtomo::oracles {

RMatrix finite_diff_gradient(const ScalarField& f, const RMatrix& t, const FiniteDiffSpec& spec) {
  if (!(spec.step > 0.0)) throw ParameterError("finite_diff_gradient: step must be positive");
  RMatrix g(t.rows(), t.cols());
  RMatrix probe = t;
  for (Eigen::Index j = 0; j < t.cols(); ++j) {
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      const double orig = probe(i, j);
      probe(i, j) = orig + spec.step;
      const double up = f(probe);
      probe(i, j) = orig - spec.step;
      const double down = f(probe);
      probe(i, j) = orig;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericalError("finite_diff_gradient: non-finite evaluation at entry (" +
                             std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      g(i, j) = (up - down) / (2.0 * spec.step);
    }
  }
  return g;
}

namespace {

using C = std::complex<double>;

// Single-qubit matrix for letter c with eigenvalue sign: sign = 0 gives the
// bare Pauli (or identity), sign = +1/-1 gives (I + sign * sigma)/2.
void single_qubit(char c, int sign, C out[2][2]) {
  C s[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
  if (c == 'x') {
    s[0][0] = 0.0; s[0][1] = 1.0; s[1][0] = 1.0; s[1][1] = 0.0;
  } else if (c == 'y') {
    s[0][0] = 0.0; s[0][1] = C(0.0, -1.0); s[1][0] = C(0.0, 1.0); s[1][1] = 0.0;
  } else if (c == 'z') {
    s[1][1] = -1.0;
  } else if (c != 'I') {
    throw ParameterError(std::string("naive_operator: bad letter ") + c);
  }
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out[i][j] = sign == 0 ? s[i][j] : 0.5 * ((i == j ? 1.0 : 0.0) + static_cast<double>(sign) * s[i][j]);
    }
  }
}

}  // namespace

CMatrix naive_operator(DesignMode mode, const std::string& label, int outcome) {
  const int n = static_cast<int>(label.size());
  const int d = 1 << n;
  CMatrix acc = CMatrix::Ones(1, 1);
  for (int q = 0; q < n; ++q) {
    C f[2][2];
    if (mode == DesignMode::PerQubit) {
      const int bit = (outcome >> (n - 1 - q)) & 1;
      single_qubit(label[static_cast<std::size_t>(q)], bit ? -1 : 1, f);
    } else {
      single_qubit(label[static_cast<std::size_t>(q)], 0, f);
    }
    const Eigen::Index m = acc.rows();
    CMatrix next(2 * m, 2 * m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) next(2 * i + a, 2 * j + b) = acc(i, j) * f[a][b];
    acc = std::move(next);
  }
  if (mode == DesignMode::WholeSystem) {
    const double sign = outcome == 0 ? 1.0 : -1.0;
    CMatrix p(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) p(i, j) = 0.5 * ((i == j ? 1.0 : 0.0) + sign * acc(i, j));
    return p;
  }
  return acc;
}

double dense_likelihood_oracle(const CMatrix& y, const EmpiricalFrequencies& freqs,
                               const MeasurementDesign& design) {
  const Eigen::Index d = y.rows();
  const Eigen::Index r = y.cols();
  CMatrix rho(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      C acc = 0.0;
      for (Eigen::Index k = 0; k < r; ++k) acc += y(i, k) * std::conj(y(j, k));
      rho(i, j) = acc;
    }
  }
  double total = 0.0;
  for (int a = 0; a < design.num_experiments(); ++a) {
    const std::string& label = design.experiment(a).label;
    for (int s = 0; s < design.outcomes_per_experiment(); ++s) {
      const CMatrix p = naive_operator(design.mode(), label, s);
      C tr = 0.0;
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k) tr += p(i, k) * rho(k, i);
      const double diff = freqs.values(a, s) - tr.real();
      total += diff * diff;
    }
  }
  return total;
}

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return adaptive_simpson(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 40);
}

}  // namespace

double polar_quadrature_moment(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw ParameterError("polar_quadrature_moment: theta must be positive");
  }
  const double t2 = theta * theta;
  auto numerator = [t2](double s) { return s * s * s * std::pow(t2 + s * s, -2.5); };
  auto denominator = [t2](double s) { return s * std::pow(t2 + s * s, -2.5); };

  // Panels [0, theta], [theta, 2 theta], ..., [2^{k-1} theta, 2^k theta].
  const int panels = 48;
  const double r_max = theta * std::ldexp(1.0, panels - 1);
  // Tails: s^3 (theta^2+s^2)^{-5/2} <= s^{-2} and s (theta^2+s^2)^{-5/2} <= s^{-4}.
  const double num_tail = 1.0 / r_max;
  const double den_tail = 1.0 / (3.0 * r_max * r_max * r_max);

  const double num_tol = 1e-13 / theta;
  const double den_tol = 1e-13 / (theta * theta * theta);
  double num = integrate(numerator, 0.0, theta, num_tol);
  double den = integrate(denominator, 0.0, theta, den_tol);
  double lo = theta;
  for (int k = 1; k < panels; ++k) {
    const double hi = 2.0 * lo;
    num += integrate(numerator, lo, hi, num_tol);
    den += integrate(denominator, lo, hi, den_tol);
    lo = hi;
  }
  if (num_tail > 1e-12 * num || den_tail > 1e-12 * den) {
    throw NumericalError("polar_quadrature_moment: tail bound exceeds tolerance");
  }
  return num / den;
}

}  // namespace bmtomo::oracles
