#pragma once

// Randomized generalized SVD for two SPD weights S (m x m) and T (n x n):
// U^T S U = I, V^T T V = I and A V = U Sigma, i.e. A ~ U Sigma V^T T, whose
// singular values are the stationary values of |A x|_S / |x|_T.

#include "randghep/sketch.hpp"

namespace randghep {

struct GsvdResult {
    Matrix U;     ///< m x k, U^T S U = I
    Matrix V;     ///< n x k, V^T T V = I
    Vector sigma; ///< nonnegative, nonincreasing

    Matrix Q1, SQ1; ///< S-orthonormal basis of range(A Omega_1)
    Matrix Q2, TQ2; ///< T-orthonormal basis of range(T^{-1} A^T Omega_2)
};

/// The column sketch Y1 = A Omega_1 is S-orthonormalized and the row sketch
/// Y2 = T^{-1} A^T Omega_2 is T-orthonormalized, so that
/// A ~ (Q1 Q1^T S) A (Q2 Q2^T T). The small core Q1^T S A Q2 is then
/// diagonalized by a dense SVD. Omega_1 and Omega_2 come from independent
/// streams split off cfg.seed.
inline GsvdResult randomized_gsvd(const LinearMap& A, const SpdOperator& S, const SpdOperator& T,
                                  const SketchConfig& cfg, QrAlgorithm qr = QrAlgorithm::precholqr)
{
    const Index m = A.rows(), n = A.cols();
    detail::require(S.dim() == m && T.dim() == n, "randomized_gsvd: weight dimensions do not match A");
    detail::require(cfg.k >= 1 && cfg.p >= 0, "randomized_gsvd: invalid k or p");
    if (cfg.r() > std::min(m, n))
        throw ConfigError("randomized_gsvd: k + p exceeds min(m, n)");
    if (!A.has_transpose())
        throw UnsupportedError("randomized_gsvd: A must expose transpose application");

    const Matrix Omega1 = gaussian_matrix(n, cfg.r(), derive_seed(cfg.seed, 1));
    const Matrix Omega2 = gaussian_matrix(m, cfg.r(), derive_seed(cfg.seed, 2));

    const BOrthoBasis b1 = weighted_qr(A.apply(Omega1), S, qr);
    const BOrthoBasis b2 = weighted_qr(T.apply_inverse(A.apply_transpose(Omega2)), T, qr);

    GsvdResult out;
    out.Q1  = b1.compact_Q();
    out.SQ1 = b1.compact_WQ();
    out.Q2  = b2.compact_Q();
    out.TQ2 = b2.compact_WQ();

    const Matrix F = out.SQ1.transpose() * A.apply(out.Q2);
    Eigen::JacobiSVD<Matrix> svd(F, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index kk = std::min<Index>(cfg.k, svd.singularValues().size());
    out.sigma      = svd.singularValues().head(kk);
    out.U          = out.Q1 * svd.matrixU().leftCols(kk);
    out.V          = out.Q2 * svd.matrixV().leftCols(kk);
    return out;
}

/// Generalized singular values of the pair (A, B) with rank(B) = n, computed
/// as the weighted values with S = I and T = B^T B.
inline Vector gsvd_pair_values(const MatrixRef& A, const MatrixRef& B, const SketchConfig& cfg)
{
    detail::require(A.cols() == B.cols(), "gsvd_pair_values: A and B need the same column count");
    const Index n = B.cols();
    Eigen::ColPivHouseholderQR<Matrix> qr(B);
    if (qr.rank() < n)
        throw UnsupportedError("gsvd_pair_values: B must have full column rank");
    const DenseMap Aop{Matrix(A)};
    const IdentitySpd S(A.rows());
    const DenseSpd T(detail::symmetrized(B.transpose() * B));
    return randomized_gsvd(Aop, S, T, cfg).sigma;
}

} // namespace randghep
