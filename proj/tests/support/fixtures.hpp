#pragma once

// Problem generators shared by the unit and acceptance tests.

#include "randghep/randghep.hpp"

#include <cmath>

namespace randghep::testing {

/// Euclidean orthonormal n x r matrix from a seeded Gaussian draw.
inline Matrix random_orthonormal(Index n, Index r, std::uint64_t seed)
{
    return detail::orthonormal_basis(gaussian_matrix(n, r, seed));
}

/// SPD matrix V diag(d) V^T with eigenvalues log-spaced in [1, kappa].
inline Matrix random_spd(Index n, double kappa, std::uint64_t seed)
{
    const Matrix V = random_orthonormal(n, n, seed);
    Vector d(n);
    for (Index i = 0; i < n; ++i)
        d(i) = std::pow(kappa, n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0);
    return detail::symmetrized(V * d.asDiagonal() * V.transpose());
}

/// Columns of G made B-orthonormal (Cholesky of G^T B G).
inline Matrix b_orthonormalize(const MatrixRef& G, const MatrixRef& B)
{
    const Matrix C = detail::symmetrized(G.transpose() * B * G);
    Eigen::LLT<Matrix> llt(C);
    return llt.matrixU().solve<Eigen::OnTheRight>(Matrix(G));
}

struct ExactRankPencil {
    Matrix A;
    Matrix B;
    Matrix U0; ///< U0^T B U0 = I
    Vector lambda0;
};

/// A = (B U0) diag(lambda0) (B U0)^T, so the pencil has exactly the nonzero
/// eigenvalues lambda0 with eigenvectors U0.
inline ExactRankPencil exact_rank_pencil(const MatrixRef& B, const VectorRef& lambda0, std::uint64_t seed)
{
    ExactRankPencil out;
    out.B       = B;
    out.lambda0 = lambda0;
    out.U0      = b_orthonormalize(gaussian_matrix(B.rows(), lambda0.size(), seed), B);
    const Matrix BU = B * out.U0;
    out.A       = detail::symmetrized(BU * lambda0.asDiagonal() * BU.transpose());
    return out;
}

inline double max_relative_error(const VectorRef& exact, const VectorRef& approx)
{
    double worst = 0.0;
    for (Index i = 0; i < exact.size(); ++i)
        worst = std::max(worst, std::abs(exact(i) - approx(i)) / std::abs(exact(i)));
    return worst;
}

inline double b_orthonormality_defect(const MatrixRef& U, const MatrixRef& B)
{
    return detail::spectral_norm(U.transpose() * B * U - Matrix::Identity(U.cols(), U.cols()));
}

} // namespace randghep::testing
