#include "bmtomo/qstate.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace bmtomo {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SystemSize SystemSize::qubits(int n) {
  if (n < 1 || n > 30) {
    throw ParameterError("qubit count must be in [1, 30], got " + std::to_string(n));
  }
  return SystemSize{n, 1 << n};
}

SystemSize SystemSize::from_dimension(long d) {
  int n = 0;
  while ((1L << n) < d) ++n;
  if (n < 1 || (1L << n) != d) {
    throw DimensionError("dimension " + std::to_string(d) + " is not 2^n with n >= 1");
  }
  return SystemSize{n, static_cast<int>(d)};
}

std::string DensityCheck::describe() const {
  std::ostringstream os;
  os << "hermitian_defect=" << hermitian_defect << " min_eigenvalue=" << min_eigenvalue
     << " trace_defect=" << trace_defect;
  return os.str();
}

DensityCheck check_density(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError("density matrix must be square and non-empty");
  }
  DensityCheck c;
  c.hermitian_defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
  const CMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  c.min_eigenvalue = es.eigenvalues().minCoeff();
  c.trace_defect = std::abs(m.trace() - Complex(1.0, 0.0));
  return c;
}

DensityMatrix::DensityMatrix(CMatrix m) : m_(std::move(m)) {
  const DensityCheck c = check_density(m_);
  if (!c.ok()) {
    throw StructureError("not a density matrix: " + c.describe());
  }
}

std::string to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::Rank1: return "rank1";
    case TargetKind::Rank2: return "rank2";
    case TargetKind::ApproxRank2: return "approx-rank2";
    case TargetKind::MaximallyMixed: return "mixed";
  }
  return "unknown";
}

TargetKind parse_target_kind(const std::string& s) {
  if (s == "rank1") return TargetKind::Rank1;
  if (s == "rank2") return TargetKind::Rank2;
  if (s == "approx-rank2") return TargetKind::ApproxRank2;
  if (s == "mixed") return TargetKind::MaximallyMixed;
  throw ParameterError("unknown target kind '" + s + "'");
}

CMatrix haar_orthonormal(int d, int r, Rng& rng) {
  if (d < 1 || r < 1) throw DimensionError("haar_orthonormal: d and r must be positive");
  if (r > d) {
    throw DimensionError("haar_orthonormal: r=" + std::to_string(r) + " exceeds d=" +
                         std::to_string(d));
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix g(d, r);
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < d; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(d, r);
  const CMatrix& packed = qr.matrixQR();
  // Q R = Q Lambda Lambda^* R with Lambda = diag(R_jj / |R_jj|) makes the
  // triangular factor's diagonal positive, which is the Haar-consistent
  // choice of Q.
  for (int j = 0; j < r; ++j) {
    const Complex rjj = packed(j, j);
    const double mag = std::abs(rjj);
    if (mag > 0.0) q.col(j) *= rjj / mag;
  }
  return q;
}

CMatrix haar_orthonormal(int d, int r, std::uint64_t seed) {
  Rng rng(seed);
  return haar_orthonormal(d, r, rng);
}

RVector dirichlet_sample(const RVector& alpha, Rng& rng) {
  if (alpha.size() < 1) throw ParameterError("dirichlet_sample: empty parameter vector");
  RVector x(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0.0) || !std::isfinite(alpha[i])) {
      throw ParameterError("dirichlet_sample: concentration must be positive and finite");
    }
    std::gamma_distribution<double> gamma(alpha[i], 1.0);
    x[i] = gamma(rng);
  }
  const double total = x.sum();
  if (!(total > 0.0)) {
    // Every gamma draw underflowed; only possible for vanishing alphas.
    throw NumericalError("dirichlet_sample: all gamma draws underflowed");
  }
  x /= total;
  return x;
}

RVector dirichlet_sample(int r, double alpha, Rng& rng) {
  if (r < 1) throw ParameterError("dirichlet_sample: size must be positive");
  if (!(alpha > 0.0)) throw ParameterError("dirichlet_sample: alpha must be positive");
  return dirichlet_sample(RVector::Constant(r, alpha), rng);
}

RVector dirichlet_sample(int r, double alpha, std::uint64_t seed) {
  Rng rng(seed);
  return dirichlet_sample(r, alpha, rng);
}

BMFactor init_factor(SystemSize size, int r, std::uint64_t seed) {
  if (r < 1 || r > size.d) {
    throw DimensionError("init_factor: rank " + std::to_string(r) + " outside [1, " +
                         std::to_string(size.d) + "]");
  }
  Rng rng(seed);
  CMatrix v = haar_orthonormal(size.d, r, rng);
  const RVector weights = dirichlet_sample(r, 1.0 / r, rng);
  for (int j = 0; j < r; ++j) v.col(j) *= std::sqrt(weights[j]);
  return v;
}

namespace {

CMatrix outer(const Eigen::VectorXcd& v) { return v * v.adjoint(); }

}  // namespace

DensityMatrix make_target(const TargetSpec& spec, SystemSize size, std::uint64_t seed) {
  const int d = size.d;
  const CMatrix identity_over_d = CMatrix::Identity(d, d) / static_cast<double>(d);
  switch (spec.kind) {
    case TargetKind::MaximallyMixed:
      return DensityMatrix(identity_over_d);
    case TargetKind::Rank1: {
      const CMatrix v = haar_orthonormal(d, 1, seed);
      return DensityMatrix(outer(v.col(0)));
    }
    case TargetKind::Rank2:
    case TargetKind::ApproxRank2: {
      if (d < 2) throw DimensionError("rank-2 target needs d >= 2");
      const CMatrix v = haar_orthonormal(d, 2, seed);
      CMatrix rho = 0.5 * outer(v.col(0)) + 0.5 * outer(v.col(1));
      if (spec.kind == TargetKind::ApproxRank2) {
        const double w = spec.mixing_weight;
        if (!(w > 0.0 && w < 1.0)) {
          throw ParameterError("approx-rank2 mixing weight must lie in (0, 1)");
        }
        rho = w * rho + (1.0 - w) * identity_over_d;
      }
      rho = 0.5 * (rho + rho.adjoint()).eval();
      return DensityMatrix(rho);
    }
  }
  throw ParameterError("unhandled target kind");
}

double frobenius_error(const DensityMatrix& est, const DensityMatrix& target) {
  if (est.dim() != target.dim()) {
    throw DimensionError("frobenius_error: dimension mismatch " + std::to_string(est.dim()) +
                         " vs " + std::to_string(target.dim()));
  }
  return (est.matrix() - target.matrix()).norm();
}

}  // namespace bmtomo
