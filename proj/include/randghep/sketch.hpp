#pragma once

// Gaussian test matrices, the B = I randomized SVD / EVD, and the B-weighted
// range finder shared by the GHEP solvers.

#include "randghep/borth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>

namespace randghep {

/// SplitMix64 (Steele, Lea, Flood 2014). Fixed here so sketches are
/// reproducible from the seed alone.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z               = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z               = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on (0, 1], 53 bits.
    double uniform() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// Deterministic child seed; used to split one user seed into independent
/// streams (sketch columns, probes, the two GSVD sketches).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag)
{
    SplitMix64 g(seed ^ (0xd1b54a32d192ed03ULL * (tag + 1)));
    g.next();
    return g.next();
}

/// Fills one column from its own stream with the Box-Muller transform.
inline void fill_gaussian_column(Eigen::Ref<Vector> col, std::uint64_t seed, std::uint64_t column)
{
    SplitMix64 g(derive_seed(seed, column));
    const Index n = col.size();
    for (Index i = 0; i < n; i += 2) {
        const double u1  = g.uniform();
        const double u2  = g.uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        col(i)           = rad * std::cos(ang);
        if (i + 1 < n)
            col(i + 1) = rad * std::sin(ang);
    }
}

/// n x r matrix of i.i.d. N(0,1) entries. Column j depends only on (seed, j),
/// so a wider sketch extends a narrower one with the same seed.
inline Matrix gaussian_matrix(Index n, Index r, std::uint64_t seed, Index first_column = 0)
{
    detail::require(n >= 1 && r >= 1, "gaussian_matrix: n and r must be positive");
    Matrix Omega(n, r);
    for (Index j = 0; j < r; ++j)
        fill_gaussian_column(Omega.col(j), seed, static_cast<std::uint64_t>(first_column + j));
    return Omega;
}

struct SketchConfig {
    Index k            = 1;
    Index p            = 20;
    std::uint64_t seed = 1;

    Index r() const { return k + p; }

    void validate(Index n) const
    {
        detail::require(k >= 1, "SketchConfig: k must be at least 1");
        detail::require(p >= 0, "SketchConfig: p must be non-negative");
        detail::require(k + p <= n, "SketchConfig: k + p = " + std::to_string(k + p) +
                                        " exceeds the problem dimension " + std::to_string(n));
    }
};

enum class EigenOrder { algebraic, magnitude };

namespace detail {

/// Eigenpairs of a small symmetric matrix sorted descending by value (or |value|).
inline std::pair<Vector, Matrix> sorted_eig(const MatrixRef& T, EigenOrder order)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(T));
    if (es.info() != Eigen::Success)
        throw NumericalError("dense symmetric eigensolver failed");
    const Vector& w = es.eigenvalues();
    std::vector<Index> idx(static_cast<std::size_t>(w.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
        return order == EigenOrder::magnitude ? std::abs(w(a)) > std::abs(w(b)) : w(a) > w(b);
    });
    return {w(idx), es.eigenvectors()(Eigen::all, idx)};
}

/// Euclidean thin QR with nonnegative diagonal.
inline Matrix orthonormal_basis(const MatrixRef& Y)
{
    Eigen::HouseholderQR<Matrix> qr(Y);
    Matrix Q = qr.householderQ() * Matrix::Identity(Y.rows(), Y.cols());
    for (Index i = 0; i < Y.cols(); ++i)
        if (qr.matrixQR()(i, i) < 0.0)
            Q.col(i) *= -1.0;
    return Q;
}

} // namespace detail

struct SvdResult {
    Matrix U;
    Vector sigma;
    Matrix V;
};

/// Randomized SVD with a Euclidean range finder: Y = A Omega = QR,
/// SVD of Q^T A, U = Q U~. Requires transpose application.
inline SvdResult randomized_svd(const LinearMap& A, const SketchConfig& cfg)
{
    const Index m = A.rows(), n = A.cols();
    detail::require(cfg.k >= 1 && cfg.p >= 0, "randomized_svd: invalid k or p");
    if (cfg.r() > std::min(m, n))
        throw ConfigError("randomized_svd: k + p exceeds min(m, n)");
    if (!A.has_transpose())
        throw UnsupportedError("randomized_svd: operator must expose transpose application");

    const Matrix Omega = gaussian_matrix(n, cfg.r(), cfg.seed);
    const Matrix Q     = detail::orthonormal_basis(A.apply(Omega));
    const Matrix Bt    = A.apply_transpose(Q); // (Q^T A)^T
    Eigen::JacobiSVD<Matrix> svd(Bt.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdResult out;
    out.U     = Q * svd.matrixU().leftCols(cfg.k);
    out.sigma = svd.singularValues().head(cfg.k);
    out.V     = svd.matrixV().leftCols(cfg.k);
    return out;
}

enum class PassMode { two_pass, single_pass };

struct EvdResult {
    Matrix U;
    Vector lambda;
};

/// Randomized symmetric EVD (B = I). Two-pass forms T = Q^T A Q; single-pass
/// reuses the sketch, T ~ (Q^T Y)(Q^T Omega)^{-1}.
inline EvdResult randomized_evd(const LinearMap& A, const SketchConfig& cfg, PassMode mode,
                                EigenOrder order = EigenOrder::algebraic)
{
    detail::require(A.rows() == A.cols(), "randomized_evd: A must be square");
    cfg.validate(A.rows());
    const Matrix Omega = gaussian_matrix(A.cols(), cfg.r(), cfg.seed);
    const Matrix Y     = A.apply(Omega);
    const Matrix Q     = detail::orthonormal_basis(Y);

    Matrix T;
    if (mode == PassMode::two_pass) {
        T = Q.transpose() * A.apply(Q);
    } else {
        const Matrix F = Q.transpose() * Omega;
        const Vector s = Eigen::JacobiSVD<Matrix>(F).singularValues();
        if (!(s(s.size() - 1) > 1e-10 * s(0)))
            throw IllConditionedError("randomized_evd: Q^T Omega is numerically singular");
        // T F = Q^T Y  <=>  F^T T^T = (Q^T Y)^T
        const Matrix QtY = Q.transpose() * Y;
        T                = F.transpose().partialPivLu().solve(QtY.transpose()).transpose();
    }
    auto [w, S] = detail::sorted_eig(T, order);
    return EvdResult{Q * S.leftCols(cfg.k), w.head(cfg.k)};
}

struct RangeResult {
    BOrthoBasis basis;
    Matrix Y;     ///< B^{-1} A Omega
    Matrix Ybar;  ///< A Omega; empty when the direct C path was used
    Matrix Omega;

    std::uint64_t a_applies = 0;
    std::uint64_t b_solves  = 0;
    std::uint64_t c_applies = 0;
};

/// Draws Omega, forms Y = B^{-1} A Omega (keeping A Omega) and B-orthonormalizes
/// it. With `use_direct_c` and a pencil that provides C, Y = C Omega is formed
/// without a B-solve and Ybar is left empty.
inline RangeResult range_finder_b(const GhepPencil& pencil, const SketchConfig& cfg,
                                  QrAlgorithm qr_alg = QrAlgorithm::mgs_reorth, bool use_direct_c = false)
{
    pencil.validate();
    const Index n = pencil.dim();
    cfg.validate(n);
    RangeResult out;
    out.Omega        = gaussian_matrix(n, cfg.r(), cfg.seed);
    const auto ncols = static_cast<std::uint64_t>(cfg.r());
    if (use_direct_c && pencil.C) {
        out.Y         = pencil.C->apply(out.Omega);
        out.c_applies = ncols;
    } else {
        out.Ybar      = pencil.A->apply(out.Omega);
        out.Y         = pencil.B->apply_inverse(out.Ybar);
        out.a_applies = ncols;
        out.b_solves  = ncols;
    }
    out.basis = weighted_qr(out.Y, *pencil.B, qr_alg);
    return out;
}

} // namespace randghep
