#include "bmtomo/realify.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>

namespace bmtomo {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

template <typename Matrix>
double log_det_ldlt(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("log_det_psd: matrix must be square");
  if (m.rows() == 0) return 0.0;
  Eigen::LDLT<Matrix> ldlt(m);
  const auto diag = ldlt.vectorD().real().eval();
  const double largest = diag.cwiseAbs().maxCoeff();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!(diag[i] > 1e-14 * largest)) return -std::numeric_limits<double>::infinity();
    acc += std::log(diag[i]);
  }
  return acc;
}

}  // namespace

RMatrix embed(const CMatrix& m) {
  const Eigen::Index p = m.rows();
  const Eigen::Index q = m.cols();
  RMatrix t(2 * p, 2 * q);
  const RMatrix re = m.real();
  const RMatrix im = m.imag();
  t.topLeftCorner(p, q) = re;
  t.topRightCorner(p, q) = -im;
  t.bottomLeftCorner(p, q) = im;
  t.bottomRightCorner(p, q) = re;
  t *= kInvSqrt2;
  return t;
}

double block_structure_defect(const RMatrix& t) {
  if (t.rows() % 2 != 0 || t.cols() % 2 != 0) {
    throw StructureError("real embedding must have even dimensions");
  }
  const Eigen::Index p = t.rows() / 2;
  const Eigen::Index q = t.cols() / 2;
  if (p == 0 || q == 0) return 0.0;
  const double diag_gap = (t.topLeftCorner(p, q) - t.bottomRightCorner(p, q)).cwiseAbs().maxCoeff();
  const double off_gap = (t.topRightCorner(p, q) + t.bottomLeftCorner(p, q)).cwiseAbs().maxCoeff();
  return std::max(diag_gap, off_gap);
}

CMatrix unembed(const RMatrix& t) {
  if (t.rows() % 2 != 0 || t.cols() % 2 != 0) {
    throw DimensionError("unembed: real matrix must have even shape");
  }
  const double defect = block_structure_defect(t);
  const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
  if (!(defect <= kBlockStructureTol * scale)) {
    throw StructureError("unembed: block structure violated by " + std::to_string(defect));
  }
  const Eigen::Index p = t.rows() / 2;
  const Eigen::Index q = t.cols() / 2;
  const double s = std::sqrt(2.0);
  CMatrix m(p, q);
  // Average the redundant blocks so small arithmetic noise is projected out.
  m.real() = 0.5 * s * (t.topLeftCorner(p, q) + t.bottomRightCorner(p, q));
  m.imag() = 0.5 * s * (t.bottomLeftCorner(p, q) - t.topRightCorner(p, q));
  return m;
}

RMatrix real_gram(const RMatrix& t) { return std::sqrt(2.0) * (t * t.transpose()); }

double log_det_psd(const CMatrix& m) { return log_det_ldlt(m); }
double log_det_psd(const RMatrix& m) { return log_det_ldlt(m); }

EmbeddingIdentityGaps check_embedding_identities(const CMatrix& m, const CMatrix& n) {
  if (m.rows() != m.cols() || n.rows() != n.cols() || m.rows() != n.rows()) {
    throw DimensionError("check_embedding_identities: inputs must be square of equal size");
  }
  const double herm_tol = 1e-10;
  const double m_scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double n_scale = std::max(1.0, n.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > herm_tol * m_scale ||
      (n - n.adjoint()).cwiseAbs().maxCoeff() > herm_tol * n_scale) {
    throw ParameterError("check_embedding_identities: inputs must be Hermitian");
  }
  const auto d = static_cast<double>(m.rows());

  EmbeddingIdentityGaps g;
  const double tr_complex = (m * n).trace().real();
  const RMatrix pm = embed(m);
  const RMatrix pn = embed(n);
  const double tr_real = (pm * pn).trace();
  g.trace_gap = std::abs(tr_complex - tr_real);

  const double ld_complex = log_det_psd(m);
  const double ld_real = log_det_psd(pm);
  const double ld_from_real = 0.5 * (d * std::log(2.0) + ld_real);
  g.det_complex = std::exp(ld_complex);
  g.det_from_real = std::exp(ld_from_real);
  g.det_gap = std::abs(g.det_complex - g.det_from_real);
  if (std::isinf(ld_complex) && std::isinf(ld_from_real)) {
    g.det_relative_gap = 0.0;
  } else if (std::isinf(ld_complex) || std::isinf(ld_from_real)) {
    g.det_relative_gap = std::numeric_limits<double>::infinity();
  } else {
    g.det_relative_gap = std::abs(std::expm1(ld_from_real - ld_complex));
  }
  return g;
}

}  // namespace bmtomo
