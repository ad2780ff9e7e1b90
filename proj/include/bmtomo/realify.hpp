#pragma once

#include "bmtomo/types.hpp"

namespace bmtomo {

// Real representation of complex matrices,
//
//   psi(A + iB) = 1/sqrt(2) * [ A  -B ]
//                             [ B   A ]
//
// psi is linear over the reals, preserves the Frobenius norm and satisfies
// psi(M) psi(N) = psi(MN) / sqrt(2), psi(M)^T = psi(M^*).

/// Tolerance on the block structure accepted by unembed().
inline constexpr double kBlockStructureTol = 1e-9;

RMatrix embed(const CMatrix& m);

/// Inverse of embed(). Throws StructureError when the two diagonal blocks
/// differ or the off-diagonal blocks are not negatives of each other by
/// more than kBlockStructureTol (scaled by the magnitude of the input).
CMatrix unembed(const RMatrix& t);

/// Largest entrywise violation of the [[A, -B], [B, A]] pattern.
double block_structure_defect(const RMatrix& t);

/// sqrt(2) T T^T. Equals embed(Y Y^*) when T = embed(Y).
RMatrix real_gram(const RMatrix& t);

/// Natural log of det(M) for Hermitian PSD M, via pivoted LDL^T. Returns
/// -infinity for numerically singular input (pivot below 1e-14 of the
/// largest pivot).
double log_det_psd(const CMatrix& m);
double log_det_psd(const RMatrix& m);

struct EmbeddingIdentityGaps {
  double trace_gap = 0.0;         // |tr(MN) - tr(psi(M) psi(N))|
  double det_gap = 0.0;           // |det M - sqrt(2^d det psi(M))|
  double det_relative_gap = 0.0;  // det_gap / |det M|, 0 when both vanish
  double det_complex = 0.0;
  double det_from_real = 0.0;
};

/// Evaluates both sides of the trace and determinant identities linking a
/// Hermitian PSD matrix to its real embedding.
EmbeddingIdentityGaps check_embedding_identities(const CMatrix& m, const CMatrix& n);

}  // namespace bmtomo
