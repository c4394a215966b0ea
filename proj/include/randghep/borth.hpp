#pragma once

// QR factorizations Y = QR with Q^T W Q = I in a weighted inner product
// <x, y>_W = y^T W x. Householder and Givens are unavailable in a non-Euclidean
// inner product, so everything here is Gram-Schmidt or Cholesky based.

#include "randghep/operators.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace randghep {

enum class QrAlgorithm { mgs, mgs_reorth, cholqr, precholqr };

inline std::string_view to_string(QrAlgorithm alg)
{
    switch (alg) {
    case QrAlgorithm::mgs: return "mgs";
    case QrAlgorithm::mgs_reorth: return "mgs-r";
    case QrAlgorithm::cholqr: return "cholqr";
    case QrAlgorithm::precholqr: return "precholqr";
    }
    return "?";
}

inline QrAlgorithm parse_qr_algorithm(std::string_view s)
{
    if (s == "mgs")
        return QrAlgorithm::mgs;
    if (s == "mgs-r" || s == "mgs_reorth" || s == "mgsr")
        return QrAlgorithm::mgs_reorth;
    if (s == "cholqr")
        return QrAlgorithm::cholqr;
    if (s == "precholqr")
        return QrAlgorithm::precholqr;
    throw ConfigError("unknown QR algorithm '" + std::string(s) + "'");
}

/// Y = Q R with Q^T W Q = I on the columns whose rank flag is set.
struct BOrthoBasis {
    Matrix Q;
    Matrix WQ; ///< cached W * Q
    Matrix R;  ///< upper triangular, nonnegative diagonal
    std::vector<bool> rank_flags;

    /// W applications a single orthogonalization sweep needs (one per column).
    std::uint64_t w_applies = 0;
    /// Additional W applications spent on re-orthogonalization sweeps.
    std::uint64_t reorth_w_applies = 0;

    Index cols() const { return Q.cols(); }

    Index effective_rank() const
    {
        Index r = 0;
        for (bool f : rank_flags)
            r += f ? 1 : 0;
        return r;
    }

    std::vector<Index> kept_columns() const
    {
        std::vector<Index> idx;
        for (std::size_t j = 0; j < rank_flags.size(); ++j)
            if (rank_flags[j])
                idx.push_back(static_cast<Index>(j));
        return idx;
    }

    /// Q restricted to independent columns.
    Matrix compact_Q() const { return Q(Eigen::all, kept_columns()); }
    Matrix compact_WQ() const { return WQ(Eigen::all, kept_columns()); }
    /// Rows of R belonging to independent columns; Q_c * R_c still equals Y.
    Matrix compact_R() const { return R(kept_columns(), Eigen::all); }
};

namespace detail {

inline constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon();

/// A column is dependent once its remaining W-norm drops below this fraction
/// of its norm before orthogonalization.
inline constexpr double kRankTolerance = 100.0 * kUnitRoundoff;

inline void check_qr_input(const MatrixRef& Y, const SpdOperator& W, const char* who)
{
    require(Y.rows() == W.dim(), std::string(who) + ": Y and W dimensions differ");
    require(Y.cols() >= 1, std::string(who) + ": Y has no columns");
    require(Y.cols() <= Y.rows(), std::string(who) + ": more columns than rows");
}

/// Shared column loop of the Gram-Schmidt variants. Columns [first, r) of
/// `basis` are orthogonalized against all previous ones; `max_sweeps` = 1 gives
/// plain MGS.
///
/// The norm t of the incoming column is recovered from the first sweep's
/// coefficients, t^2 = tt^2 + sum s^2, so a column costs exactly one W
/// application unless a re-orthogonalization sweep is triggered.
inline void gram_schmidt_columns(BOrthoBasis& basis, const SpdOperator& W, Index first, int max_sweeps)
{
    const Index r = basis.Q.cols();
    for (Index k = first; k < r; ++k) {
        auto qk   = basis.Q.col(k);
        double t  = 0.0;
        double t0 = 0.0;
        double tt = 0.0;
        bool dependent = false;
        int sweep      = 0;
        Vector wq;
        while (true) {
            ++sweep;
            double ss = 0.0;
            for (Index j = 0; j < k; ++j) {
                if (!basis.rank_flags[static_cast<std::size_t>(j)])
                    continue;
                const double s = basis.WQ.col(j).dot(qk);
                basis.R(j, k) += s;
                qk -= s * basis.Q.col(j);
                ss += s * s;
            }
            wq = W.apply(qk);
            if (sweep == 1)
                ++basis.w_applies;
            else
                ++basis.reorth_w_applies;
            tt = std::sqrt(std::max(wq.dot(qk), 0.0));
            if (sweep == 1) {
                t  = std::sqrt(tt * tt + ss);
                t0 = t;
            }

            if (tt <= kRankTolerance * t0) {
                dependent = true;
                break;
            }
            if (tt < t / 10.0 && max_sweeps > 1) {
                if (sweep >= max_sweeps) {
                    dependent = true;
                    break;
                }
                t = tt;
                continue;
            }
            break;
        }
        if (dependent) {
            basis.rank_flags[static_cast<std::size_t>(k)] = false;
            basis.R(k, k)                                  = 0.0;
            qk.setZero();
            basis.WQ.col(k).setZero();
        } else {
            basis.R(k, k)     = tt;
            qk /= tt;
            basis.WQ.col(k) = wq / tt;
        }
    }
}

inline BOrthoBasis start_basis(const MatrixRef& Y)
{
    BOrthoBasis b;
    b.Q          = Y;
    b.WQ         = Matrix::Zero(Y.rows(), Y.cols());
    b.R          = Matrix::Zero(Y.cols(), Y.cols());
    b.rank_flags = std::vector<bool>(static_cast<std::size_t>(Y.cols()), true);
    return b;
}

} // namespace detail

/// Modified Gram-Schmidt in the W-inner product, one sweep per column.
inline BOrthoBasis mgs_w(const MatrixRef& Y, const SpdOperator& W)
{
    detail::check_qr_input(Y, W, "mgs_w");
    auto b = detail::start_basis(Y);
    detail::gram_schmidt_columns(b, W, 0, 1);
    return b;
}

/// Maximum number of projection sweeps per column in mgs_w_reorth.
inline constexpr int kMaxReorthSweeps = 5;

/// Modified Gram-Schmidt in the W-inner product with Rutishauser-style
/// re-orthogonalization: a column is projected again while its W-norm keeps
/// collapsing by more than a factor 10, and is declared dependent once its
/// norm falls below kRankTolerance times its original norm. Dependent columns are zeroed
/// and flagged so column indices are preserved.
inline BOrthoBasis mgs_w_reorth(const MatrixRef& Y, const SpdOperator& W)
{
    detail::check_qr_input(Y, W, "mgs_w_reorth");
    auto b = detail::start_basis(Y);
    detail::gram_schmidt_columns(b, W, 0, kMaxReorthSweeps);
    return b;
}

/// Appends columns to an existing MGS-R basis, orthogonalizing only the new
/// ones. Used by the adaptive range finder.
inline void mgs_w_reorth_extend(BOrthoBasis& basis, const MatrixRef& Ynew, const SpdOperator& W)
{
    detail::require(Ynew.rows() == basis.Q.rows(), "mgs_w_reorth_extend: row mismatch");
    const Index r0 = basis.Q.cols();
    const Index r1 = r0 + Ynew.cols();
    detail::require(r1 <= basis.Q.rows(), "mgs_w_reorth_extend: more columns than rows");

    Matrix Q(basis.Q.rows(), r1), WQ = Matrix::Zero(basis.Q.rows(), r1), R = Matrix::Zero(r1, r1);
    Q << basis.Q, Ynew;
    WQ.leftCols(r0)       = basis.WQ;
    R.topLeftCorner(r0, r0) = basis.R;
    basis.Q  = std::move(Q);
    basis.WQ = std::move(WQ);
    basis.R  = std::move(R);
    basis.rank_flags.resize(static_cast<std::size_t>(r1), true);
    detail::gram_schmidt_columns(basis, W, r0, kMaxReorthSweeps);
}

/// Cholesky QR in the W-inner product: C = Y^T W Y = R^T R, Q = Y R^{-1}.
/// Throws IllConditionedError when the Gram matrix is not numerically
/// positive definite.
inline BOrthoBasis chol_qr_w(const MatrixRef& Y, const SpdOperator& W)
{
    detail::check_qr_input(Y, W, "chol_qr_w");
    BOrthoBasis b;
    Matrix Z = W.apply(Y);
    b.w_applies = static_cast<std::uint64_t>(Y.cols());
    const Matrix C = detail::symmetrized(Y.transpose() * Z);
    Eigen::LLT<Matrix> llt(C);
    const char* advice = "; use pre_chol_qr_w or mgs_w_reorth";
    if (llt.info() != Eigen::Success)
        throw IllConditionedError(std::string("chol_qr_w: Cholesky of the Gram matrix broke down") + advice);
    b.R = llt.matrixU();
    const Vector d = b.R.diagonal();
    // A pivot below sqrt(eps) relative means the Gram matrix lost all accuracy.
    if (!(d.minCoeff() > std::sqrt(detail::kUnitRoundoff) * d.maxCoeff()))
        throw IllConditionedError(std::string("chol_qr_w: Gram matrix is numerically singular") + advice);
    const auto Rt = b.R.triangularView<Eigen::Upper>();
    b.Q  = Rt.solve<Eigen::OnTheRight>(Matrix(Y));
    b.WQ = Rt.solve<Eigen::OnTheRight>(Z);
    b.rank_flags.assign(static_cast<std::size_t>(Y.cols()), true);
    return b;
}

/// CholQR preceded by a Euclidean Householder QR, Y = Z S, so the Gram matrix
/// handed to CholQR is Z^T W Z (conditioned like W rather than like Y^T W Y).
inline BOrthoBasis pre_chol_qr_w(const MatrixRef& Y, const SpdOperator& W)
{
    detail::check_qr_input(Y, W, "pre_chol_qr_w");
    Eigen::HouseholderQR<Matrix> hqr(Y);
    const Index r = Y.cols();
    Matrix Z      = hqr.householderQ() * Matrix::Identity(Y.rows(), r);
    Matrix S      = hqr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    for (Index i = 0; i < r; ++i) {
        if (S(i, i) < 0.0) {
            S.row(i) *= -1.0;
            Z.col(i) *= -1.0;
        }
    }
    BOrthoBasis b = chol_qr_w(Z, W);
    b.R           = (b.R * S).triangularView<Eigen::Upper>();
    return b;
}

inline BOrthoBasis weighted_qr(const MatrixRef& Y, const SpdOperator& W, QrAlgorithm alg)
{
    switch (alg) {
    case QrAlgorithm::mgs: return mgs_w(Y, W);
    case QrAlgorithm::mgs_reorth: return mgs_w_reorth(Y, W);
    case QrAlgorithm::cholqr: return chol_qr_w(Y, W);
    case QrAlgorithm::precholqr: return pre_chol_qr_w(Y, W);
    }
    throw ConfigError("weighted_qr: unknown algorithm");
}

struct QrMetrics {
    double residual;      ///< ||QR - Y||_2
    double orthogonality; ///< ||Q^T W Q - I||_2
    double projection;    ///< ||Q^T W Y - R||_2
    double inverse;       ///< ||Y R^{-1} - Q||_2, +inf when R is exactly singular
};

/// The four accuracy diagnostics of a weighted QR factorization. W Q is
/// recomputed rather than taken from the cache; orthogonality is measured on
/// the columns whose rank flag is set.
inline QrMetrics qr_metrics(const MatrixRef& Y, const BOrthoBasis& basis, const SpdOperator& W)
{
    detail::require(basis.Q.rows() == Y.rows() && basis.Q.cols() == Y.cols() && basis.R.rows() == Y.cols(),
                    "qr_metrics: shape mismatch");
    const Matrix WQ = W.apply(basis.Q);
    QrMetrics m{};
    m.residual      = detail::spectral_norm(basis.Q * basis.R - Y);
    const auto kept = basis.kept_columns();
    const auto nk   = static_cast<Index>(kept.size());
    m.orthogonality = detail::spectral_norm(basis.Q(Eigen::all, kept).transpose() * WQ(Eigen::all, kept) -
                                            Matrix::Identity(nk, nk));
    m.projection    = detail::spectral_norm(WQ.transpose() * Y - basis.R);
    if ((basis.R.diagonal().array() == 0.0).any()) {
        m.inverse = std::numeric_limits<double>::infinity();
    } else {
        const Matrix YRinv = basis.R.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(Matrix(Y));
        m.inverse          = detail::spectral_norm(YRinv - basis.Q);
    }
    return m;
}

} // namespace randghep
